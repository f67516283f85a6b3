#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "lerw/rational.hpp"

namespace lerw {

struct Monomial {
  int i = 0;  // power of x
  int j = 0;  // power of y
  Rational c;
};

// Bivariate polynomial with rational coefficients, stored as a dense grid of
// integer numerators over one common denominator.
class GenFun {
 public:
  GenFun() : GenFun(0, 0) {}
  GenFun(int deg_x, int deg_y);

  static GenFun from_terms(const std::vector<Monomial>& terms);
  static GenFun constant(const Rational& c);
  static GenFun x();
  static GenFun y();

  int deg_x() const { return dx_; }
  int deg_y() const { return dy_; }
  Rational coeff(int i, int j) const;
  const mpz_class& denominator() const { return den_; }
  // Nonzero terms in (i, j) order.
  std::vector<Monomial> terms() const;

  Rational eval(const Rational& x, const Rational& y) const;
  double eval(double x, double y) const;
  Rational sum_of_coefficients() const { return eval(Rational(1), Rational(1)); }
  Rational dx_at_one() const;
  Rational dy_at_one() const;

  GenFun operator+(const GenFun& o) const;
  GenFun operator*(const GenFun& o) const;
  GenFun operator*(const Rational& k) const;

  // f(p, q).
  GenFun compose(const GenFun& p, const GenFun& q) const;

  std::string to_string() const;

  friend bool operator==(const GenFun& a, const GenFun& b);

 private:
  mpz_class& at(int i, int j) { return num_[static_cast<std::size_t>(i) * (dy_ + 1) + j]; }
  const mpz_class& at(int i, int j) const {
    return num_[static_cast<std::size_t>(i) * (dy_ + 1) + j];
  }
  void normalize();
  bool nonnegative() const;

  int dx_ = 0;
  int dy_ = 0;
  std::vector<mpz_class> num_;
  mpz_class den_ = 1;
};

}  // namespace lerw
