#include "lerw/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lerw/analysis.hpp"
#include "lerw/catalog.hpp"
#include "lerw/errors.hpp"
#include "lerw/measures.hpp"
#include "lerw/sampler.hpp"
#include "lerw/trajectory_io.hpp"

namespace lerw {

namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json frac(const Rational& q) { return to_fraction(q); }

json points_json(const std::vector<LatticePoint>& pts) {
  json a = json::array();
  for (const LatticePoint& p : pts) a.push_back({p.u, p.v});
  return a;
}

json genfun_json(const GenFun& f) {
  json terms = json::array();
  for (const Monomial& m : f.terms()) terms.push_back({{"x", m.i}, {"y", m.j}, {"c", frac(m.c)}});
  return {{"terms", terms}, {"text", f.to_string()}, {"value_at_one", frac(f.sum_of_coefficients())}};
}

json matrix_json(const Mat2Q& m) {
  return json::array({json::array({frac(m[0][0]), frac(m[0][1])}),
                      json::array({frac(m[1][0]), frac(m[1][1])})});
}

json mat4_json(const Mat4Q& m) {
  json a = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (const Rational& x : row) r.push_back(frac(x));
    a.push_back(r);
  }
  return a;
}

json vec4_json(const Vec4Q& v) {
  json a = json::array();
  for (const Rational& x : v) a.push_back(frac(x));
  return a;
}

std::string surd_text(const QuadraticSurd& s) {
  return to_string(s.p) + " + (" + to_string(s.q) + ")*sqrt(" + s.r.get_str() + ")";
}

json lambda_json() {
  const MeanMatrix mm = mean_matrix();
  const QuadraticSurd lam = mm.lambda();
  std::ostringstream nu;
  nu.precision(12);
  nu << std::fixed << static_cast<double>(std::log(2.0L) / std::log(lam.value()));
  return {{"exact", surd_text(lam)}, {"lambda", lam.decimal(12)}, {"nu", nu.str()}};
}

json catalog_json() {
  json out = json::object();
  for (CrossingType t : kAllTypes) {
    json shapes = json::array();
    for (const Shape& s : shape_catalog(t)) {
      shapes.push_back({{"label", "w" + std::to_string(s.label)},
                        {"path", points_json(s.path.points)},
                        {"probability", frac(s.probability)},
                        {"s1", s.s1},
                        {"s2", s.s2},
                        {"first_cell", std::string(to_string(s.first_cell))}});
    }
    out[std::string(to_string(t))] = shapes;
  }
  return out;
}

// Output target: a file when a path is given, otherwise the provided stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback, bool binary = false) {
    if (path.empty() || path == "-") {
      os_ = &fallback;
      return;
    }
    file_ = std::make_unique<std::ofstream>(path, binary ? std::ios::binary : std::ios::out);
    if (!*file_) throw std::runtime_error("cannot open " + path + " for writing");
    os_ = file_.get();
  }
  std::ostream& operator*() { return *os_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* os_ = nullptr;
};

json config_json(const CLI::App& sub) {
  json cfg = json::object();
  for (const CLI::Option* o : sub.get_options()) {
    if (o->get_name() == "--help" || o->get_name() == "--config") continue;
    const auto res = o->results();
    std::string name = o->get_name();
    while (!name.empty() && name.front() == '-') name.erase(name.begin());
    if (o->get_expected_max() == 0) {
      cfg[name] = o->count() > 0;
    } else if (res.size() == 1) {
      cfg[name] = res.front();
    } else if (!res.empty()) {
      cfg[name] = res;
    } else {
      cfg[name] = o->get_default_str();
    }
  }
  return cfg;
}

struct ExactArgs {
  std::string what = "all";
  int phi_level = 1;
  std::string out;
};

int cmd_exact(const ExactArgs& a, std::ostream& out) {
  json j;
  const bool all = a.what == "all";
  if (all || a.what == "catalog") j["catalog"] = catalog_json();
  if (all || a.what == "phi") {
    const PhiPair phi = phi_iterate(a.phi_level);
    j["phi"] = {{"level", a.phi_level}, {"phi1", genfun_json(phi.first)}, {"phi2", genfun_json(phi.second)}};
  }
  if (all || a.what == "matrix") {
    j["matrix"] = {{"M", matrix_json(mean_matrix().m)}};
    j["matrix"].update(lambda_json());
  }
  if (all || a.what == "chain") {
    const TypeChain tc = type_chain();
    j["chain"] = {{"types", {"A", "B", "BA", "AB"}}, {"P", mat4_json(tc.p)}, {"alpha", vec4_json(tc.alpha)}};
  }
  Sink sink(a.out, out);
  *sink << j.dump(2) << '\n';
  return kExitOk;
}

struct SampleArgs {
  std::string mode = "crossing";
  int level = 1;
  std::string type = "A";
  std::size_t steps = 0;
  std::uint64_t seed = 1;
  std::string format = "jsonl";
  std::size_t reps = 1;
  std::string out;
};

constexpr int kMaxCrossingLevel = 20;

int cmd_sample(const SampleArgs& a, std::ostream& out) {
  const auto type = parse_crossing_type(a.type);
  if (!type) throw UsageError("unknown crossing type " + a.type);
  if (a.mode != "infinite" && a.steps != 0) throw UsageError("--steps applies to --mode infinite only");
  if (a.mode == "infinite" && a.steps == 0) throw UsageError("--mode infinite needs --steps");
  if (a.mode == "exit-time" && a.format == "bin") throw UsageError("exit times are written as text");
  if (a.mode == "crossing" && a.level > kMaxCrossingLevel) {
    throw CapacityError("crossing level " + std::to_string(a.level) + " exceeds the limit " +
                        std::to_string(kMaxCrossingLevel));
  }
  if (a.steps > kMaxWalkSteps) {
    throw CapacityError("walk of " + std::to_string(a.steps) + " steps exceeds the budget of " +
                        std::to_string(kMaxWalkSteps));
  }
  const bool binary = a.format == "bin";
  Sink sink(a.out, out, binary);
  std::ostream& os = *sink;
  if (binary) write_binary_header(os);
  const RandomStream base(a.seed);
  for (std::size_t r = 0; r < a.reps; ++r) {
    RandomStream rng = base.split(r);
    if (a.mode == "exit-time") {
      os << sample_exit_time(a.level, *type, rng) << '\n';
      continue;
    }
    Trajectory t;
    if (a.mode == "crossing") {
      t = sample_crossing(a.level, *type, rng).points;
    } else {
      InfiniteWalkState st;
      extend_walk(st, a.steps, rng);
      t.assign(st.points.begin(), st.points.begin() + static_cast<std::ptrdiff_t>(a.steps) + 1);
    }
    if (binary) {
      write_binary_record(os, t);
    } else {
      write_jsonl(os, t);
    }
  }
  return kExitOk;
}

struct VerifyArgs {
  bool tamper = false;
  std::size_t samples = 20000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string out;
};

std::multiset<Rational> catalog_masses(CrossingType t) {
  std::multiset<Rational> m;
  for (const Shape& s : shape_catalog(t)) m.insert(s.probability);
  return m;
}

int cmd_verify(const VerifyArgs& a, const json& config, std::ostream& out) {
  json items = json::array();
  std::string first_failure;
  auto record = [&](const std::string& name, const std::function<std::string()>& check) {
    std::string failure;
    try {
      failure = check();
    } catch (const std::exception& e) {
      failure = e.what();
    }
    items.push_back({{"name", name}, {"pass", failure.empty()}, {"detail", failure}});
    if (!failure.empty() && first_failure.empty()) first_failure = name + ": " + failure;
  };
  auto q = [](long n, long d) {
    Rational r(n, d);
    r.canonicalize();
    return r;
  };

  record("catalog identity", [&]() -> std::string {
    const std::multiset<Rational> want_a{q(1, 2), q(2, 15), q(2, 15), q(2, 15), q(1, 30),
                                         q(1, 30), q(1, 30), q(0, 1), q(0, 1), q(0, 1)};
    const std::multiset<Rational> want_ba{q(1, 9),  q(11, 90), q(11, 90), q(2, 45), q(2, 45),
                                          q(2, 45), q(8, 45),  q(2, 9),   q(1, 18), q(1, 18)};
    if (catalog_masses(CrossingType::A) != want_a) return "type A masses differ";
    if (catalog_masses(CrossingType::BA) != want_ba) return "type BA masses differ";
    return "";
  });
  record("generating functions", []() -> std::string {
    const PhiPair phi = phi_base();
    if (phi.first.sum_of_coefficients() != 1 || phi.second.sum_of_coefficients() != 1) {
      return "Phi(1,1) != 1";
    }
    return "";
  });
  record("mean matrix", [&]() -> std::string {
    const Mat2Q want{{{q(9, 5), q(2, 5)}, {q(26, 15), q(13, 15)}}};
    return mean_matrix().m == want ? "" : "M differs from [[9/5,2/5],[26/15,13/15]]";
  });
  record("chain stationarity", []() -> std::string {
    const TypeChain tc = type_chain();
    for (std::size_t j = 0; j < 4; ++j) {
      Rational s = 0;
      for (std::size_t i = 0; i < 4; ++i) s += tc.alpha[i] * tc.p[i][j];
      if (s != tc.alpha[j]) return "alpha P != alpha in column " + std::to_string(j);
    }
    return "";
  });
  record("consistency identity", [&]() -> std::string {
    Vec4Q w = type_chain().alpha;
    if (a.tamper) w[0] = q(10, 28);
    const ConsistencyReport rep = consistency_identity(1, w);
    return rep.ok() ? "" : rep.first_failure;
  });
  for (int level : {1, 2}) {
    record("sampler vs ellf level " + std::to_string(level), [&]() -> std::string {
      const LawComparison c = compare_with_ellf(level, CrossingType::A, a.samples, a.seed, a.threads);
      if (c.zero_mass_hits != 0) return std::to_string(c.zero_mass_hits) + " draws on zero-probability shapes";
      if (c.two_sample.p_value < 1e-3) return "two-sample p-value " + std::to_string(c.two_sample.p_value);
      return "";
    });
  }

  json report = {{"all_pass", first_failure.empty()}, {"items", items}, {"config", config}};
  report.update(lambda_json());
  if (!first_failure.empty()) report["first_failure"] = first_failure;
  Sink sink(a.out, out);
  *sink << report.dump(2) << '\n';
  return first_failure.empty() ? kExitOk : kExitVerifyFailed;
}

struct EstimateArgs {
  std::string what = "moments";
  double s = 1.0;
  std::size_t n_min = 0;
  std::size_t n_max = 1 << 14;
  std::size_t replicas = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::vector<int> m_list{1, 2, 3};
  std::string csv;
  std::string out;
};

int cmd_estimate(const EstimateArgs& a, const json& config, std::ostream& out) {
  const BatchConfig cfg{a.seed, a.replicas, a.threads};
  json summary = {{"config", config}};
  summary["reference"] = lambda_json();
  std::string csv;
  if (a.what == "moments") {
    const std::size_t n_min = a.n_min != 0 ? a.n_min : std::min<std::size_t>(64, a.n_max / 8);
    if (n_min == 0 || n_min > a.n_max) throw UsageError("need 0 < n-min <= n-max");
    std::vector<std::size_t> grid;
    for (std::size_t n = n_min; n <= a.n_max; n *= 2) grid.push_back(n);
    const MomentTable t = estimate_moments(a.s, grid, cfg);
    const ExponentFit f = fit_exponent(t, a.seed);
    csv = to_csv(t);
    json rows = json::array();
    for (const MomentRow& r : t.rows) {
      rows.push_back({{"n", r.n}, {"estimate", r.estimate}, {"stderr", r.stderr_}});
    }
    summary["moments"] = rows;
    summary["fit"] = {{"s", f.s},           {"nu_hat", f.nu_hat},           {"ci_lo", f.ci.lo},
                      {"ci_hi", f.ci.hi},   {"resamples", f.resamples},     {"nu_reference", mean_matrix().nu()}};
  } else if (a.what == "lil") {
    const LILReport r = lil_diagnostic(a.n_max, cfg);
    std::ostringstream os;
    os.precision(17);
    os << "replica,running_max\n";
    for (std::size_t i = 0; i < r.final_max.size(); ++i) os << i << ',' << r.final_max[i] << '\n';
    csv = os.str();
    summary["lil"] = {{"n_max", r.n_max}, {"nu", r.nu},       {"min", r.min},         {"q05", r.q05},
                      {"median", r.median}, {"q95", r.q95},   {"max", r.max},         {"band", {r.band_lo, r.band_hi}},
                      {"in_band", r.in_band()}};
  } else if (a.what == "tail") {
    const TailReport r = tail_decay(a.n_max, a.m_list, cfg);
    csv = to_csv(r);
    json rows = json::array();
    for (const TailRow& row : r.rows) {
      rows.push_back({{"M", row.m},
                      {"short_p", row.short_p},
                      {"short_ci", {row.short_ci.lo, row.short_ci.hi}},
                      {"short_bound", row.short_bound},
                      {"long_p", row.long_p},
                      {"long_ci", {row.long_ci.lo, row.long_ci.hi}},
                      {"long_bound", row.long_bound}});
    }
    summary["tail"] = {{"n", r.n}, {"K", r.k}, {"rows", rows}};
  }
  if (!a.csv.empty()) {
    Sink sink(a.csv, out);
    *sink << csv;
  }
  Sink sink(a.out, out);
  *sink << summary.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loop-erased random walks on the pre-Sierpinski gasket"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "key=value file; command-line flags take precedence");

  ExactArgs ex;
  CLI::App* exact = app.add_subcommand("exact", "Exact rational data as JSON");
  exact->add_option("--what", ex.what)->check(CLI::IsMember({"catalog", "phi", "matrix", "chain", "all"}));
  exact->add_option("--phi-level", ex.phi_level, "level N of Phi_N")->check(CLI::Range(0, kDefaultPhiCap * 10));
  exact->add_option("--out", ex.out);

  SampleArgs sa;
  CLI::App* sample = app.add_subcommand("sample", "Draw crossings, infinite walks or exit times");
  sample->add_option("--mode", sa.mode)->check(CLI::IsMember({"crossing", "infinite", "exit-time"}));
  sample->add_option("--level", sa.level)->check(CLI::NonNegativeNumber);
  sample->add_option("--type", sa.type)->check(CLI::IsMember({"A", "B", "BA", "AB"}));
  sample->add_option("--steps", sa.steps);
  sample->add_option("--seed", sa.seed);
  sample->add_option("--format", sa.format)->check(CLI::IsMember({"jsonl", "bin"}));
  sample->add_option("--reps", sa.reps)->check(CLI::PositiveNumber);
  sample->add_option("--out", sa.out);

  VerifyArgs va;
  va.threads = default_threads();
  CLI::App* verify = app.add_subcommand("verify", "Run the exact and statistical identity checks");
  verify->add_flag("--tamper-weights", va.tamper, "use 10/28 for the first weight (negative control)");
  verify->add_option("--samples", va.samples, "draws per side for the sampler comparison")
      ->check(CLI::PositiveNumber);
  verify->add_option("--seed", va.seed);
  verify->add_option("--threads", va.threads)->check(CLI::PositiveNumber);
  verify->add_option("--out", va.out);

  EstimateArgs ea;
  ea.threads = default_threads();
  CLI::App* estimate = app.add_subcommand("estimate", "Moment fits, iterated-logarithm band, scale tails");
  estimate->add_option("--what", ea.what)->check(CLI::IsMember({"moments", "lil", "tail"}));
  estimate->add_option("--s", ea.s)->check(CLI::PositiveNumber);
  estimate->add_option("--n-min", ea.n_min);
  estimate->add_option("--n-max", ea.n_max)->check(CLI::PositiveNumber);
  estimate->add_option("--replicas", ea.replicas)->check(CLI::PositiveNumber);
  estimate->add_option("--seed", ea.seed);
  estimate->add_option("--threads", ea.threads)->check(CLI::PositiveNumber);
  estimate->add_option("--m", ea.m_list, "offsets M for --what tail");
  estimate->add_option("--csv", ea.csv);
  estimate->add_option("--out", ea.out);

  std::vector<std::string> args;
  for (int i = argc - 1; i >= 1; --i) args.emplace_back(argv[i]);
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*exact) return cmd_exact(ex, out);
    if (*sample) return cmd_sample(sa, out);
    if (*verify) return cmd_verify(va, config_json(*verify), out);
    if (*estimate) return cmd_estimate(ea, config_json(*estimate), out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const IntegrityError& e) {
    err << "integrity failure: " << e.what() << '\n';
    return kExitVerifyFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitVerifyFailed;
  }
  return kExitUsage;
}

}  // namespace lerw
