#include "lerw/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "lerw/ellf.hpp"
#include "lerw/errors.hpp"
#include "lerw/measures.hpp"
#include "lerw/srw.hpp"

namespace lerw {

namespace {

double reference_nu() {
  static const double nu = mean_matrix().nu();
  return nu;
}

}  // namespace

InfiniteWalkState sample_walk(std::size_t steps, const RandomStream& base, std::size_t replica) {
  if (steps > kMaxWalkSteps) {
    throw CapacityError("walk of " + std::to_string(steps) + " steps exceeds the budget of " +
                        std::to_string(kMaxWalkSteps));
  }
  RandomStream rng = base.split(replica);
  InfiniteWalkState st;
  extend_walk(st, steps, rng);
  if (!is_loopless(Path{st.points, 0})) {
    throw IntegrityError("sampled walk " + std::to_string(replica) + " contains a loop");
  }
  return st;
}

std::vector<std::size_t> dyadic_grid(int lo, int hi) {
  std::vector<std::size_t> out;
  for (int k = lo; k <= hi; ++k) out.push_back(std::size_t{1} << k);
  return out;
}

std::vector<MomentTable> estimate_moments(const std::vector<double>& s_list,
                                          const std::vector<std::size_t>& n_list,
                                          const BatchConfig& cfg) {
  if (n_list.empty()) throw std::invalid_argument("empty n grid");
  for (double s : s_list) {
    if (!(s > 0)) throw std::invalid_argument("moment exponent must be positive");
  }
  for (std::size_t i = 1; i < n_list.size(); ++i) {
    if (n_list[i] <= n_list[i - 1]) throw std::invalid_argument("n grid must be increasing");
  }
  if (cfg.replicas == 0) throw std::invalid_argument("no replicas");
  const std::size_t n_max = n_list.back();
  const RandomStream base(cfg.seed);

  // norms[r][row]
  std::vector<std::vector<double>> norms(cfg.replicas);
  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    const InfiniteWalkState st = sample_walk(n_max, base, r);
    norms[r].reserve(n_list.size());
    for (std::size_t n : n_list) norms[r].push_back(norm(position_at(st, n)));
  });

  std::vector<MomentTable> out;
  for (double s : s_list) {
    MomentTable t;
    t.s = s;
    for (std::size_t row = 0; row < n_list.size(); ++row) {
      std::vector<double> v(cfg.replicas);
      for (std::size_t r = 0; r < cfg.replicas; ++r) v[r] = std::pow(norms[r][row], s);
      const MeanStderr ms = mean_and_stderr(v);
      t.rows.push_back({n_list[row], ms.mean, ms.stderr_, cfg.replicas});
      t.values.push_back(std::move(v));
    }
    out.push_back(std::move(t));
  }
  return out;
}

MomentTable estimate_moments(double s, const std::vector<std::size_t>& n_list,
                             const BatchConfig& cfg) {
  return estimate_moments(std::vector<double>{s}, n_list, cfg).front();
}

namespace {

LinearFit log_fit(const std::vector<std::size_t>& n, const std::vector<double>& e) {
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(e[i] > 0)) throw std::invalid_argument("moment estimate is not positive");
    x.push_back(std::log(static_cast<double>(n[i])));
    y.push_back(std::log(e[i]));
  }
  return least_squares(x, y);
}

}  // namespace

ExponentFit fit_exponent(const MomentTable& table, std::uint64_t seed, std::size_t resamples) {
  if (table.rows.size() < 4) throw std::invalid_argument("exponent fit needs at least four rows");
  if (!(table.s > 0)) throw std::invalid_argument("moment exponent must be positive");
  std::vector<std::size_t> ns;
  std::vector<double> est;
  for (const MomentRow& r : table.rows) {
    ns.push_back(r.n);
    est.push_back(r.estimate);
  }
  const LinearFit f = log_fit(ns, est);
  ExponentFit out;
  out.s = table.s;
  out.nu_hat = f.slope / table.s;
  out.intercept = f.intercept;
  out.ci = {out.nu_hat, out.nu_hat};

  const bool have_replicas = table.values.size() == table.rows.size() && !table.values.empty() &&
                             table.values.front().size() > 1;
  if (!have_replicas || resamples == 0) return out;
  const std::size_t reps = table.values.front().size();
  RandomStream rng(seed);
  std::vector<double> slopes;
  slopes.reserve(resamples);
  std::vector<std::size_t> pick(reps);
  for (std::size_t b = 0; b < resamples; ++b) {
    for (std::size_t& i : pick) i = static_cast<std::size_t>(rng.below(reps));
    std::vector<double> means;
    for (const auto& row : table.values) {
      KahanSum s;
      for (std::size_t i : pick) s.add(row[i]);
      means.push_back(s.value() / static_cast<double>(reps));
    }
    slopes.push_back(log_fit(ns, means).slope / table.s);
  }
  out.ci = {quantile(slopes, 0.025), quantile(slopes, 0.975)};
  out.resamples = resamples;
  return out;
}

double psi(double n, double nu) {
  if (n < 16) throw std::domain_error("psi is used for n >= 16");
  return std::pow(n, nu) * std::pow(std::log(std::log(n)), 1 - nu);
}

LILReport lil_diagnostic(std::size_t n_max, const BatchConfig& cfg) {
  if (n_max < 16) throw std::invalid_argument("n_max must be at least 16");
  if (cfg.replicas == 0) throw std::invalid_argument("no replicas");
  LILReport rep;
  rep.nu = reference_nu();
  rep.n_max = n_max;
  rep.traces.resize(cfg.replicas);
  rep.final_max.resize(cfg.replicas);
  const RandomStream base(cfg.seed);

  std::vector<std::size_t> grid;
  for (double g = 16; g < static_cast<double>(n_max); g *= std::sqrt(2.0)) {
    const auto n = static_cast<std::size_t>(std::llround(g));
    if (grid.empty() || n > grid.back()) grid.push_back(n);
  }
  grid.push_back(n_max);
  std::vector<double> psi_table(n_max + 1, 0.0);
  for (std::size_t n = 16; n <= n_max; ++n) psi_table[n] = psi(static_cast<double>(n), rep.nu);

  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    const InfiniteWalkState st = sample_walk(n_max, base, r);
    LILTrace& tr = rep.traces[r];
    tr.id = r;
    double running = 0.0;
    std::size_t g = 0;
    for (std::size_t n = 16; n <= n_max; ++n) {
      const double ratio = norm(st.points[n]) / psi_table[n];
      running = std::max(running, ratio);
      if (g < grid.size() && grid[g] == n) {
        tr.samples.push_back({n, ratio, running});
        ++g;
      }
    }
    rep.final_max[r] = running;
  });
  rep.min = *std::min_element(rep.final_max.begin(), rep.final_max.end());
  rep.max = *std::max_element(rep.final_max.begin(), rep.final_max.end());
  rep.q05 = quantile(rep.final_max, 0.05);
  rep.median = quantile(rep.final_max, 0.5);
  rep.q95 = quantile(rep.final_max, 0.95);
  return rep;
}

int lambda_index(std::uint64_t n) {
  if (n < 1) throw std::invalid_argument("K(n) needs n >= 1");
  const QuadraticSurd lam = mean_matrix().lambda();
  const Rational target(mpz_class(std::to_string(n)));
  for (int digits = 30; digits <= 480; digits *= 2) {
    const auto [lo, hi] = lam.enclose(digits);
    Rational plo = 1, phi = 1;
    int k = 0;
    bool decided = true;
    for (;;) {
      const Rational nlo = plo * lo, nhi = phi * hi;
      if (nhi <= target) {
        plo = nlo;
        phi = nhi;
        ++k;
        continue;
      }
      if (nlo > target) break;
      decided = false;  // lambda^(k+1) too close to n at this precision
      break;
    }
    if (decided) return k;
  }
  throw std::runtime_error("could not separate lambda^K from n");
}

int dyadic_scale(const std::vector<LatticePoint>& points, std::size_t n) {
  if (n >= points.size()) throw std::out_of_range("D_n needs the first n steps");
  std::int64_t far = 0;
  for (std::size_t i = 0; i <= n; ++i) far = std::max(far, norm2(points[i]));
  int m = 0;
  while ((std::int64_t{1} << (2 * m)) < far) ++m;
  return m;
}

TailReport tail_decay(std::size_t n, const std::vector<int>& m_list, const BatchConfig& cfg) {
  if (m_list.empty()) throw std::invalid_argument("empty M list");
  if (cfg.replicas == 0) throw std::invalid_argument("no replicas");
  TailReport rep;
  rep.n = n;
  rep.k = lambda_index(n);
  rep.replicas = cfg.replicas;
  for (int m : m_list) {
    if (m < 0 || m >= rep.k) throw std::invalid_argument("tail diagnostics need 0 <= M < K(n)");
  }
  std::vector<int> scale(cfg.replicas);
  const RandomStream base(cfg.seed);
  parallel_for(cfg.replicas, cfg.threads, [&](std::size_t r) {
    scale[r] = dyadic_scale(sample_walk(n, base, r).points, n);
  });

  const Vec4Q alpha = type_chain().alpha;
  const long double w1 = Rational(alpha[0] + alpha[1]).get_d();
  const long double w2 = Rational(alpha[2] + alpha[3]).get_d();
  for (int m : m_list) {
    TailRow row;
    row.m = m;
    for (int d : scale) {
      row.short_count += d < rep.k - m ? 1 : 0;
      row.long_count += d > rep.k + m ? 1 : 0;
    }
    const double reps = static_cast<double>(cfg.replicas);
    row.short_p = static_cast<double>(row.short_count) / reps;
    row.long_p = static_cast<double>(row.long_count) / reps;
    row.short_ci = wilson_interval(row.short_count, cfg.replicas);
    row.long_ci = wilson_interval(row.long_count, cfg.replicas);

    const auto short_law = exit_time_pmf(rep.k - m, w1, w2, n);
    long double head = 0;
    for (long double p : short_law) head += p;
    row.short_bound = static_cast<double>(std::max(0.0L, 1 - head));
    const auto long_law = exit_time_pmf(rep.k + m, w1, w2, n);
    long double below = 0;
    for (std::size_t k = 0; k < n; ++k) below += long_law[k];
    row.long_bound = static_cast<double>(below);
    rep.rows.push_back(row);
  }
  return rep;
}

DecayVerdict superexponential_decay(const std::vector<double>& probs) {
  if (probs.size() < 3) return {false, "need at least three probabilities"};
  std::vector<double> logs;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0)) {
      return {false, "probability at position " + std::to_string(i) + " is zero; log undefined"};
    }
    logs.push_back(std::log(probs[i]));
  }
  double prev_drop = 0;
  for (std::size_t i = 1; i < logs.size(); ++i) {
    const double drop = logs[i - 1] - logs[i];
    if (!(drop > 0)) return {false, "log-probability does not decrease at position " + std::to_string(i)};
    if (i > 1 && !(drop > prev_drop)) {
      return {false, "drop at position " + std::to_string(i) + " is not larger than the previous one"};
    }
    prev_drop = drop;
  }
  return {true, ""};
}

namespace {

// Coarse shape label in the frame where the crossing ends at a_1.
int coarse_label(const Path& w, int level) {
  Path q = coarse_grain(w, level - 1);
  const std::int64_t span = std::int64_t{1} << (level - 1);
  for (LatticePoint& p : q.points) p = {p.u / span, p.v / span};
  if (q.back() == corner_b(1)) {
    for (LatticePoint& p : q.points) p = swap_ab(p);
  }
  return shape_label(q);
}

}  // namespace

LawComparison compare_with_ellf(int level, CrossingType type, std::size_t samples,
                                std::uint64_t seed, unsigned threads) {
  if (level < 1 || level > 3) throw std::invalid_argument("law comparison is available for N = 1..3");
  if (samples == 0) throw std::invalid_argument("no samples");
  LawComparison out;
  out.level = level;
  out.type = type;
  out.samples = samples;

  std::vector<int> zero_labels;
  for (const Shape& s : shape_catalog(type)) {
    if (s.probability == 0) zero_labels.push_back(s.label);
  }

  std::map<std::vector<LatticePoint>, std::size_t> index;
  std::vector<double> exact;
  for (const WeightedPath& w : enumerate_crossings(level, type)) {
    index.emplace(w.path.points, exact.size());
    exact.push_back(w.probability.get_d());
  }

  const RandomStream base(seed);
  const RandomStream sampler_base = base.split(0);
  const RandomStream ellf_base = base.split(1);
  const ConditionedWalk walk({level, type});
  std::vector<Path> from_sampler(samples), from_ellf(samples);
  parallel_for(samples, threads, [&](std::size_t i) {
    RandomStream a = sampler_base.split(i);
    from_sampler[i] = sample_crossing(level, type, a);
    RandomStream b = ellf_base.split(i);
    from_ellf[i] = ellf(walk.sample(b), level);
  });

  // Paths outside the enumerated support get their own categories; their
  // expected probability is zero, which the exact tests treat as a failure.
  auto tally = [&](const std::vector<Path>& paths, std::vector<std::uint64_t>& counts) {
    for (const Path& w : paths) {
      auto it = index.find(w.points);
      if (it == index.end()) {
        it = index.emplace(w.points, exact.size()).first;
        exact.push_back(0.0);
      }
      if (counts.size() < exact.size()) counts.resize(exact.size(), 0);
      ++counts[it->second];
      const int label = coarse_label(w, level);
      if (std::find(zero_labels.begin(), zero_labels.end(), label) != zero_labels.end()) {
        ++out.zero_mass_hits;
      }
    }
  };
  std::vector<std::uint64_t> cs, ce;
  tally(from_sampler, cs);
  tally(from_ellf, ce);
  cs.resize(exact.size(), 0);
  ce.resize(exact.size(), 0);
  out.categories = exact.size();
  out.two_sample = chi_square_two_sample(cs, ce);
  out.sampler_vs_exact = chi_square(cs, exact);
  out.ellf_vs_exact = chi_square(ce, exact);
  return out;
}

std::string to_csv(const MomentTable& t) {
  std::ostringstream os;
  os.precision(17);
  os << "s,n,estimate,stderr,replicas\n";
  for (const MomentRow& r : t.rows) {
    os << t.s << ',' << r.n << ',' << r.estimate << ',' << r.stderr_ << ',' << r.replicas << '\n';
  }
  return os.str();
}

std::string to_csv(const TailReport& t) {
  std::ostringstream os;
  os.precision(17);
  os << "n,K,M,short_count,short_p,short_lo,short_hi,short_bound,long_count,long_p,long_lo,long_hi,"
        "long_bound,replicas\n";
  for (const TailRow& r : t.rows) {
    os << t.n << ',' << t.k << ',' << r.m << ',' << r.short_count << ',' << r.short_p << ','
       << r.short_ci.lo << ',' << r.short_ci.hi << ',' << r.short_bound << ',' << r.long_count << ','
       << r.long_p << ',' << r.long_ci.lo << ',' << r.long_ci.hi << ',' << r.long_bound << ','
       << t.replicas << '\n';
  }
  return os.str();
}

}  // namespace lerw
