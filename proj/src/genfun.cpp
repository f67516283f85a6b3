#include "lerw/genfun.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace lerw {

GenFun::GenFun(int deg_x, int deg_y)
    : dx_(deg_x),
      dy_(deg_y),
      num_(static_cast<std::size_t>(deg_x + 1) * static_cast<std::size_t>(deg_y + 1)) {
  if (deg_x < 0 || deg_y < 0) throw std::invalid_argument("negative degree");
}

GenFun GenFun::from_terms(const std::vector<Monomial>& terms) {
  int dx = 0, dy = 0;
  mpz_class den = 1;
  for (const Monomial& m : terms) {
    if (m.i < 0 || m.j < 0) throw std::invalid_argument("negative exponent");
    dx = std::max(dx, m.i);
    dy = std::max(dy, m.j);
    den = lcm(den, m.c.get_den());
  }
  GenFun f(dx, dy);
  f.den_ = den;
  for (const Monomial& m : terms) f.at(m.i, m.j) += m.c.get_num() * (den / m.c.get_den());
  f.normalize();
  return f;
}

GenFun GenFun::constant(const Rational& c) { return from_terms({{0, 0, c}}); }
GenFun GenFun::x() { return from_terms({{1, 0, Rational(1)}}); }
GenFun GenFun::y() { return from_terms({{0, 1, Rational(1)}}); }

Rational GenFun::coeff(int i, int j) const {
  if (i < 0 || j < 0 || i > dx_ || j > dy_) return 0;
  Rational q(at(i, j), den_);
  q.canonicalize();
  return q;
}

std::vector<Monomial> GenFun::terms() const {
  std::vector<Monomial> out;
  for (int i = 0; i <= dx_; ++i) {
    for (int j = 0; j <= dy_; ++j) {
      if (at(i, j) != 0) out.push_back({i, j, coeff(i, j)});
    }
  }
  return out;
}

void GenFun::normalize() {
  if (den_ < 0) {
    den_ = -den_;
    for (mpz_class& c : num_) c = -c;
  }
  int nx = 0, ny = 0;
  mpz_class g = den_;
  for (int i = 0; i <= dx_; ++i) {
    for (int j = 0; j <= dy_; ++j) {
      const mpz_class& c = at(i, j);
      if (c == 0) continue;
      nx = std::max(nx, i);
      ny = std::max(ny, j);
      if (g != 1) g = gcd(g, c);
    }
  }
  if (nx != dx_ || ny != dy_) {
    std::vector<mpz_class> trimmed(static_cast<std::size_t>(nx + 1) *
                                   static_cast<std::size_t>(ny + 1));
    for (int i = 0; i <= nx; ++i) {
      for (int j = 0; j <= ny; ++j) {
        trimmed[static_cast<std::size_t>(i) * (ny + 1) + j] = std::move(at(i, j));
      }
    }
    num_ = std::move(trimmed);
    dx_ = nx;
    dy_ = ny;
  }
  if (g > 1) {
    for (mpz_class& c : num_) {
      if (c != 0) mpz_divexact(c.get_mpz_t(), c.get_mpz_t(), g.get_mpz_t());
    }
    mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
  }
}

bool GenFun::nonnegative() const {
  return std::all_of(num_.begin(), num_.end(), [](const mpz_class& c) { return c >= 0; });
}

Rational GenFun::eval(const Rational& x, const Rational& y) const {
  Rational total = 0;
  for (int i = dx_; i >= 0; --i) {
    Rational row = 0;
    for (int j = dy_; j >= 0; --j) row = row * y + Rational(at(i, j));
    total = total * x + row;
  }
  total /= Rational(den_);
  total.canonicalize();
  return total;
}

double GenFun::eval(double x, double y) const {
  double total = 0;
  for (int i = dx_; i >= 0; --i) {
    double row = 0;
    for (int j = dy_; j >= 0; --j) {
      const mpz_class& c = at(i, j);
      row = row * y + (c == 0 ? 0.0 : Rational(c, den_).get_d());
    }
    total = total * x + row;
  }
  return total;
}

Rational GenFun::dx_at_one() const {
  mpz_class s = 0;
  for (int i = 1; i <= dx_; ++i) {
    for (int j = 0; j <= dy_; ++j) s += i * at(i, j);
  }
  Rational q(s, den_);
  q.canonicalize();
  return q;
}

Rational GenFun::dy_at_one() const {
  mpz_class s = 0;
  for (int i = 0; i <= dx_; ++i) {
    for (int j = 1; j <= dy_; ++j) s += j * at(i, j);
  }
  Rational q(s, den_);
  q.canonicalize();
  return q;
}

GenFun GenFun::operator+(const GenFun& o) const {
  GenFun r(std::max(dx_, o.dx_), std::max(dy_, o.dy_));
  r.den_ = lcm(den_, o.den_);
  const mpz_class ka = r.den_ / den_;
  const mpz_class kb = r.den_ / o.den_;
  for (int i = 0; i <= dx_; ++i) {
    for (int j = 0; j <= dy_; ++j) r.at(i, j) += at(i, j) * ka;
  }
  for (int i = 0; i <= o.dx_; ++i) {
    for (int j = 0; j <= o.dy_; ++j) r.at(i, j) += o.at(i, j) * kb;
  }
  r.normalize();
  return r;
}

GenFun GenFun::operator*(const Rational& k) const {
  GenFun r = *this;
  for (mpz_class& c : r.num_) c *= k.get_num();
  r.den_ *= k.get_den();
  r.normalize();
  return r;
}

namespace {

constexpr std::size_t kLimbBits = sizeof(mp_limb_t) * 8;

std::size_t bits_of(const mpz_class& c) { return c == 0 ? 0 : mpz_sizeinbase(c.get_mpz_t(), 2); }

}  // namespace

GenFun GenFun::operator*(const GenFun& o) const {
  GenFun r(dx_ + o.dx_, dy_ + o.dy_);
  r.den_ = den_ * o.den_;
  const std::size_t terms_a = num_.size();
  const std::size_t terms_b = o.num_.size();

  if (!nonnegative() || !o.nonnegative() || std::min(terms_a, terms_b) < 8) {
    for (int i = 0; i <= dx_; ++i) {
      for (int j = 0; j <= dy_; ++j) {
        const mpz_class& a = at(i, j);
        if (a == 0) continue;
        for (int k = 0; k <= o.dx_; ++k) {
          for (int l = 0; l <= o.dy_; ++l) {
            if (o.at(k, l) != 0) r.at(i + k, j + l) += a * o.at(k, l);
          }
        }
      }
    }
    r.normalize();
    return r;
  }

  // Kronecker substitution: pack each polynomial into one integer with
  // fixed-width slots wide enough that no product coefficient overflows.
  std::size_t ba = 0, bb = 0;
  for (const mpz_class& c : num_) ba = std::max(ba, bits_of(c));
  for (const mpz_class& c : o.num_) bb = std::max(bb, bits_of(c));
  std::size_t carry = 1;
  while ((std::size_t{1} << carry) < std::min(terms_a, terms_b)) ++carry;
  const std::size_t limbs = (ba + bb + carry + 1 + kLimbBits - 1) / kLimbBits;
  const std::size_t width = static_cast<std::size_t>(r.dy_ + 1);

  auto pack = [&](const GenFun& f) {
    const std::size_t slots = static_cast<std::size_t>(f.dx_) * width + f.dy_ + 1;
    std::vector<mp_limb_t> buf(slots * limbs, 0);
    for (int i = 0; i <= f.dx_; ++i) {
      for (int j = 0; j <= f.dy_; ++j) {
        const mpz_class& c = f.at(i, j);
        if (c == 0) continue;
        const std::size_t slot = static_cast<std::size_t>(i) * width + j;
        mpz_export(buf.data() + slot * limbs, nullptr, -1, sizeof(mp_limb_t), 0, 0,
                   c.get_mpz_t());
      }
    }
    mpz_class z;
    mpz_import(z.get_mpz_t(), buf.size(), -1, sizeof(mp_limb_t), 0, 0, buf.data());
    return z;
  };

  const mpz_class prod = pack(*this) * pack(o);
  const std::size_t slots = static_cast<std::size_t>(r.dx_ + 1) * width;
  std::vector<mp_limb_t> out(slots * limbs + 1, 0);
  std::size_t count = 0;
  mpz_export(out.data(), &count, -1, sizeof(mp_limb_t), 0, 0, prod.get_mpz_t());
  for (int i = 0; i <= r.dx_; ++i) {
    for (int j = 0; j <= r.dy_; ++j) {
      const std::size_t slot = static_cast<std::size_t>(i) * width + j;
      mpz_import(r.at(i, j).get_mpz_t(), limbs, -1, sizeof(mp_limb_t), 0, 0,
                 out.data() + slot * limbs);
    }
  }
  r.normalize();
  return r;
}

GenFun GenFun::compose(const GenFun& p, const GenFun& q) const {
  std::vector<GenFun> ppow{constant(Rational(1))};
  for (int i = 1; i <= dx_; ++i) ppow.push_back(ppow.back() * p);
  std::vector<GenFun> qpow{constant(Rational(1))};
  for (int j = 1; j <= dy_; ++j) qpow.push_back(qpow.back() * q);
  GenFun total = constant(Rational(0));
  for (int i = 0; i <= dx_; ++i) {
    for (int j = 0; j <= dy_; ++j) {
      if (at(i, j) == 0) continue;
      total = total + (ppow[static_cast<std::size_t>(i)] * qpow[static_cast<std::size_t>(j)]) *
                          coeff(i, j);
    }
  }
  return total;
}

std::string GenFun::to_string() const {
  std::ostringstream os;
  const bool scaled = den_ != 1;
  if (scaled) os << "(1/" << den_.get_str() << ")(";
  bool first = true;
  for (int total = 0; total <= dx_ + dy_; ++total) {
    for (int j = 0; j <= std::min(total, dy_); ++j) {
      const int i = total - j;
      if (i > dx_) continue;
      mpz_class c = at(i, j);
      if (c == 0) continue;
      if (!first) os << (c < 0 ? " - " : " + ");
      else if (c < 0) os << "-";
      first = false;
      c = abs(c);
      if (c != 1 || (i == 0 && j == 0)) os << c.get_str();
      if (i > 0) os << "x" << (i > 1 ? "^" + std::to_string(i) : "");
      if (j > 0) os << "y" << (j > 1 ? "^" + std::to_string(j) : "");
    }
  }
  if (first) os << "0";
  if (scaled) os << ")";
  return os.str();
}

bool operator==(const GenFun& a, const GenFun& b) {
  return a.dx_ == b.dx_ && a.dy_ == b.dy_ && a.den_ == b.den_ && a.num_ == b.num_;
}

}  // namespace lerw
