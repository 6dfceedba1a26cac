#include "nlfpe/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <limits>
#include <random>

#include "nlfpe/errors.hpp"
#include "nlfpe/expression.hpp"
#include "nlfpe/scheme_asymmetric.hpp"
#include "nlfpe/stable_process.hpp"

namespace nlfpe {

namespace {

using nlohmann::json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out_ << header << '\n';
  }
  template <class... Ts>
  void row(const Ts&... values) {
    bool first = true;
    ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
    out_ << '\n';
  }

 private:
  static std::string cell(double v) { return fmt(v); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(int v) { return std::to_string(v); }
  std::ofstream out_;
};

// Typed access to one config object.
class Reader {
 public:
  explicit Reader(const json& j) : j_(j) {}

  bool has(const char* key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void number(const char* key, double& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(key, "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) throw ConfigError(key, "must be finite");
  }
  void positive(const char* key, double& out) {
    number(key, out);
    if (has(key) && !(out > 0.0)) throw ConfigError(key, "must be positive");
  }
  template <class Int>
  void count(const char* key, Int& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(key, "expected a nonnegative integer");
    out = static_cast<Int>(v.get<unsigned long long>());
  }
  void text(const char* key, std::string& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(key, "expected a string");
    out = v.get<std::string>();
  }
  void text(const char* key, std::optional<std::string>& out) {
    if (!has(key)) return;
    std::string s;
    text(key, s);
    out = s;
  }
  void numbers(const char* key, std::vector<double>& out) {
    if (!has(key)) return;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(key, "expected an array of numbers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(key, "expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }

 private:
  const json& j_;
};

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys{
      "kind",    "preset",   "f",        "g",          "sigma",      "f_d1",      "sigma_d1",
      "sigma_d2", "alpha",   "beta",     "monotonicity", "h",        "dt",        "L_tilde",
      "boundary", "t0",      "t_final",  "stepper",    "sigma_bound", "k_init",   "snapshots",
      "levels",  "trials",   "steps",    "dt_fraction", "paths",     "mc_dt",     "T",
      "delta",   "snapshot_stride", "seed", "threads", "output_dir", "sweep"};
  return keys;
}

void apply_kind_defaults(ExperimentConfig& c) {
  switch (c.kind) {
    case ExperimentKind::fpe_symmetric:
      c.preset = "example1";
      break;
    case ExperimentKind::fpe_asymmetric:
      c.preset = "example2";
      c.beta = 0.5;
      break;
    case ExperimentKind::convergence:
      c.preset = "example1";
      c.boundary = BoundaryKind::natural;
      c.L_tilde = 10.0;
      c.h = 1.0 / 8.0;
      c.dt = 0.01;
      break;
    case ExperimentKind::max_principle:
      c.preset = "example1";
      c.sigma_bound = 3.0;
      break;
    case ExperimentKind::mc_compare:
      c.preset = "example1";
      c.h = 1.0 / 32.0;
      c.dt = 1e-4;
      c.t0 = 0.01;
      break;
    case ExperimentKind::filter:
      c.preset = "example53";
      c.alpha = 0.5;
      c.boundary = BoundaryKind::natural;
      c.h = 1.0 / 32.0;
      c.L_tilde = 4.0;
      break;
  }
}

ScalarFn expression_fn(const std::string& key, const std::string& text) {
  try {
    Expression e = Expression::parse(text);
    return [e](double x) { return e(x); };
  } catch (const ParseError& err) {
    throw ConfigError(key, err.what());
  }
}

ScalarFn constant_fn(double v) {
  return [v](double) { return v; };
}

void apply_overrides(StableNoiseModel& m, const ExperimentConfig& c) {
  if (c.f) {
    m.f = expression_fn("f", *c.f);
    m.f_d1 = c.f_d1 ? expression_fn("f_d1", *c.f_d1) : nullptr;
  }
  if (c.g) {
    m.g = expression_fn("g", *c.g);
    m.g_d1 = nullptr;
    m.g_d2 = nullptr;
  }
  if (c.sigma) {
    m.sigma = expression_fn("sigma", *c.sigma);
    m.sigma_d1 = c.sigma_d1 ? expression_fn("sigma_d1", *c.sigma_d1) : nullptr;
    m.sigma_d2 = c.sigma_d2 ? expression_fn("sigma_d2", *c.sigma_d2) : nullptr;
    m.sigma_alpha_d1 = nullptr;
    m.sigma_alpha_d2 = nullptr;
  }
  if (c.monotonicity != SigmaMonotonicity::unspecified) m.monotonicity = c.monotonicity;
}

bool is_filter_preset(const std::string& p) { return p == "example53" || p == "filter_example"; }

std::string monotonicity_name(SigmaMonotonicity m) {
  switch (m) {
    case SigmaMonotonicity::positive_increasing: return "positive_increasing";
    case SigmaMonotonicity::negative_decreasing: return "negative_decreasing";
    case SigmaMonotonicity::unspecified: break;
  }
  return "unspecified";
}

int grid_count(const char* key, double length, double h) {
  const double n = length / h;
  const double r = std::round(n);
  if (r < 1.0 || std::abs(n - r) > 1e-9 * std::max(1.0, r)) {
    throw ConfigError(key, "h = " + fmt(h) + " does not divide " + fmt(length));
  }
  return static_cast<int>(r);
}

DensityState narrow_gaussian(const Grid1D& grid, double k, double t) {
  return sample_density(grid, [k](double x) { return gaussian_initial_density(x, k); }, t);
}

void write_states(const std::filesystem::path& path, const Grid1D& grid, const std::vector<DensityState>& states) {
  CsvWriter out(path, "t,x,p");
  const int lo = grid.kind() == BoundaryKind::absorbing ? -grid.J() : grid.j_min();
  for (const auto& s : states) {
    for (int j = lo; j <= -lo; ++j) out.row(s.time, grid.x(j), s.values[static_cast<Eigen::Index>(grid.index(j))]);
  }
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

RunOutcome run_fpe(const ExperimentConfig& c, const std::filesystem::path& dir, bool asym) {
  const auto model = model_from_config(c);
  const auto grid = grid_from_config(c);
  if (asym && grid.kind() != BoundaryKind::absorbing) {
    throw ConfigError("boundary", "the skewed-noise scheme needs the absorbing domain (-1, 1)");
  }
  if (asym && c.stepper != Stepper::implicit_euler) {
    throw ConfigError("stepper", "the skewed-noise scheme is advanced by backward Euler only");
  }
  if (!(c.t_final > c.t0)) throw ConfigError("t_final", "must exceed t0");
  const double M_tilde = sigma_bound_estimate(model, grid, c.sigma_bound);
  const auto bound = stability_bound(model.alpha, grid.h(), M_tilde);
  if (c.stepper == Stepper::explicit_euler && c.dt > bound.dt_max) {
    throw ConfigError("dt", "dt = " + fmt(c.dt) + " exceeds the explicit stability bound dt_max = " +
                                fmt(bound.dt_max) + " (M~ = " + fmt(M_tilde) + ")");
  }
  const auto init = narrow_gaussian(grid, c.k_init, c.t0);
  const auto states = asym ? solve_asym(model, grid, init, c.t0, c.t_final, c.dt, c.snapshots)
                           : solve(model, grid, init, c.t0, c.t_final, c.dt, c.stepper, c.snapshots);
  RunOutcome r;
  r.files.push_back(dir / "density.csv");
  write_states(r.files.back(), grid, states);
  r.summary = {{"dt_max", bound.dt_max},
               {"M_tilde", M_tilde},
               {"mass_final", trapezoid_mass(grid, states.back().values)},
               {"min_final", states.back().values.minCoeff()},
               {"snapshots", states.size()}};
  return r;
}

RunOutcome run_convergence(const ExperimentConfig& c, const std::filesystem::path& dir) {
  if (c.levels < 2) throw ConfigError("levels", "need at least two levels");
  if (!(c.t_final > c.t0)) throw ConfigError("t_final", "must exceed t0");
  grid_count("h", c.L_tilde, c.h);
  const auto model = model_from_config(c);
  const auto res = convergence_study(model, c.L_tilde, c.h, c.dt, c.levels, c.t0, c.t_final, c.k_init);
  RunOutcome r;
  r.files.push_back(dir / "convergence.csv");
  CsvWriter out(r.files.back(), "level,h,dt,error");
  for (std::size_t l = 0; l < res.levels.size(); ++l) {
    out.row(l, res.levels[l].h, res.levels[l].dt, res.levels[l].error);
  }
  r.summary = {{"slope", res.slope}, {"strictly_decreasing", res.strictly_decreasing}};
  return r;
}

RunOutcome run_max_principle(const ExperimentConfig& c, const std::filesystem::path& dir) {
  const auto model = model_from_config(c);
  const auto grid = grid_from_config(c);
  const double M_tilde = sigma_bound_estimate(model, grid, c.sigma_bound);
  if (!(c.dt_fraction > 0.0 && c.dt_fraction <= 1.0)) throw ConfigError("dt_fraction", "must lie in (0, 1]");
  const auto a = max_principle_audit(model, grid, M_tilde, c.dt_fraction, c.trials, c.steps, c.seed);
  RunOutcome r;
  r.files.push_back(dir / "max_principle.csv");
  CsvWriter out(r.files.back(), "alpha,h,dt,dt_max,trials,steps,observed_min,max_excess,violations");
  out.row(model.alpha, grid.h(), a.dt, a.dt_max, a.trials, a.steps, a.observed_min, a.max_excess, a.violations);
  r.summary = {{"dt", a.dt}, {"dt_max", a.dt_max}, {"violations", a.violations}, {"ok", a.ok()}};
  return r;
}

RunOutcome run_mc(const ExperimentConfig& c, const std::filesystem::path& dir) {
  if (c.boundary != BoundaryKind::absorbing) throw ConfigError("boundary", "mc_compare uses the absorbing domain");
  if (!(c.t_final > c.t0)) throw ConfigError("t_final", "must exceed t0");
  const int J = grid_count("h", 1.0, c.h);
  const auto model = model_from_config(c);
  const auto cmp = mc_compare(model, J, c.t0, c.t_final, c.dt, c.mc_dt, c.paths, c.k_init, c.seed, c.threads);
  RunOutcome r;
  r.files.push_back(dir / "mc_compare.csv");
  CsvWriter out(r.files.back(), "x,p_pde,p_mc");
  for (int j = -J; j <= J; ++j) {
    const auto i = static_cast<Eigen::Index>(cmp.grid.index(j));
    out.row(cmp.grid.x(j), cmp.p_pde[i], cmp.p_mc[i]);
  }
  r.summary = {{"l1", cmp.l1}, {"pde_mass", cmp.pde_mass}, {"surviving_fraction", cmp.surviving_fraction}};
  return r;
}

RunOutcome run_filter_experiment(const ExperimentConfig& c, const std::filesystem::path& dir) {
  const auto model = filter_model_from_config(c);
  const auto grid = grid_from_config(c);
  if (grid.kind() != BoundaryKind::natural) throw ConfigError("boundary", "the filter runs on a natural grid");
  const auto init = narrow_gaussian(grid, c.k_init, 0.0);
  FilterOptions prior_opt;
  prior_opt.use_observations = false;
  const auto prior = run_filter(model, grid, init, uniform_partition(c.T, c.delta), ObservationRecord{}, prior_opt);
  const double t_from = std::min(1.0, 0.2 * c.T);
  const auto res = tracking_experiment(model, grid, c.T, c.delta, c.seed, c.k_init, t_from, &prior, c.snapshot_stride);

  RunOutcome r;
  r.files.push_back(dir / "tracking.csv");
  {
    CsvWriter out(r.files.back(), "t,mean,prior_mean,signal");
    for (std::size_t i = 0; i < res.filter.times.size(); ++i) {
      out.row(res.filter.times[i], res.filter.means[i], prior.means[i], res.twin.signal[i]);
    }
  }
  r.files.push_back(dir / "filter_density.csv");
  {
    CsvWriter out(r.files.back(), "t,x,p_unnormalized,p_normalized");
    for (const auto& s : res.filter.snapshots) {
      for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
        const auto i = static_cast<Eigen::Index>(grid.index(j));
        out.row(s.t, grid.x(j), s.p_unnormalized[i], s.p_normalized[i]);
      }
    }
  }
  r.files.push_back(dir / "observations.csv");
  write_record_csv(r.files.back().string(), res.twin.record);
  r.summary = {{"filter_error", res.filter_error},
               {"prior_error", res.prior_error},
               {"jumps", res.twin.record.jump_times.size()},
               {"clip_defect", res.filter.clip_defect}};
  return r;
}

}  // namespace

ExperimentKind parse_kind(const std::string& name) {
  if (name == "fpe_symmetric") return ExperimentKind::fpe_symmetric;
  if (name == "fpe_asymmetric") return ExperimentKind::fpe_asymmetric;
  if (name == "convergence") return ExperimentKind::convergence;
  if (name == "max_principle") return ExperimentKind::max_principle;
  if (name == "mc_compare") return ExperimentKind::mc_compare;
  if (name == "filter") return ExperimentKind::filter;
  throw ConfigError("kind", "unknown experiment kind '" + name + "'");
}

std::string kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::fpe_symmetric: return "fpe_symmetric";
    case ExperimentKind::fpe_asymmetric: return "fpe_asymmetric";
    case ExperimentKind::convergence: return "convergence";
    case ExperimentKind::max_principle: return "max_principle";
    case ExperimentKind::mc_compare: return "mc_compare";
    case ExperimentKind::filter: return "filter";
  }
  return "unknown";
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError(key, "unknown key");
  }
  if (!j.contains("kind") || !j.at("kind").is_string()) throw ConfigError("kind", "required string");

  ExperimentConfig c;
  c.kind = parse_kind(j.at("kind").get<std::string>());
  apply_kind_defaults(c);

  Reader r(j);
  r.text("preset", c.preset);
  r.text("f", c.f);
  r.text("f_d1", c.f_d1);
  r.text("sigma", c.sigma);
  r.text("sigma_d1", c.sigma_d1);
  r.text("sigma_d2", c.sigma_d2);
  if (r.has("g")) {
    if (j.at("g").is_number()) {
      r.number("g", c.g_value);
    } else {
      r.text("g", c.g);
    }
  }
  r.number("alpha", c.alpha);
  if (!(c.alpha > 0.0 && c.alpha < 2.0)) throw ConfigError("alpha", "must lie in (0, 2)");
  r.number("beta", c.beta);
  if (!(c.beta > -1.0 && c.beta < 1.0)) throw ConfigError("beta", "must lie in (-1, 1)");
  if (r.has("monotonicity")) {
    std::string s;
    r.text("monotonicity", s);
    if (s == "positive_increasing") {
      c.monotonicity = SigmaMonotonicity::positive_increasing;
    } else if (s == "negative_decreasing") {
      c.monotonicity = SigmaMonotonicity::negative_decreasing;
    } else if (s == "unspecified") {
      c.monotonicity = SigmaMonotonicity::unspecified;
    } else {
      throw ConfigError("monotonicity", "unknown value '" + s + "'");
    }
  }
  if (r.has("boundary")) {
    std::string s;
    r.text("boundary", s);
    if (s == "absorbing") {
      c.boundary = BoundaryKind::absorbing;
    } else if (s == "natural") {
      c.boundary = BoundaryKind::natural;
    } else {
      throw ConfigError("boundary", "expected absorbing or natural");
    }
  }
  if (r.has("stepper")) {
    std::string s;
    r.text("stepper", s);
    if (s == "explicit") {
      c.stepper = Stepper::explicit_euler;
    } else if (s == "implicit") {
      c.stepper = Stepper::implicit_euler;
    } else {
      throw ConfigError("stepper", "expected explicit or implicit");
    }
  }
  r.positive("h", c.h);
  r.positive("L_tilde", c.L_tilde);
  r.positive("dt", c.dt);
  r.number("t0", c.t0);
  r.number("t_final", c.t_final);
  if (r.has("sigma_bound")) {
    double v = 0.0;
    r.positive("sigma_bound", v);
    c.sigma_bound = v;
  }
  r.positive("k_init", c.k_init);
  r.numbers("snapshots", c.snapshots);
  r.count("levels", c.levels);
  r.count("trials", c.trials);
  r.count("steps", c.steps);
  r.positive("dt_fraction", c.dt_fraction);
  r.count("paths", c.paths);
  if (c.paths == 0) throw ConfigError("paths", "must be positive");
  r.positive("mc_dt", c.mc_dt);
  r.positive("T", c.T);
  r.positive("delta", c.delta);
  r.count("snapshot_stride", c.snapshot_stride);
  r.count("seed", c.seed);
  r.count("threads", c.threads);
  r.text("output_dir", c.output_dir);
  if (r.has("sweep")) {
    if (!j.at("sweep").is_array()) throw ConfigError("sweep", "expected an array of objects");
    for (const auto& e : j.at("sweep")) {
      if (!e.is_object()) throw ConfigError("sweep", "expected an array of objects");
      if (e.contains("sweep") || e.contains("output_dir") || e.contains("kind")) {
        throw ConfigError("sweep", "entries may not set kind, output_dir or sweep");
      }
    }
    c.sweep = j.at("sweep");
  }
  if (!c.preset.empty() && c.preset != "example1" && c.preset != "example2" && !is_filter_preset(c.preset)) {
    throw ConfigError("preset", "unknown preset '" + c.preset + "'");
  }
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  json j = {{"kind", kind_name(c.kind)},
            {"preset", c.preset},
            {"g", c.g ? json(*c.g) : json(c.g_value)},
            {"alpha", c.alpha},
            {"beta", c.beta},
            {"monotonicity", monotonicity_name(c.monotonicity)},
            {"boundary", c.boundary == BoundaryKind::absorbing ? "absorbing" : "natural"},
            {"h", c.h},
            {"L_tilde", c.L_tilde},
            {"dt", c.dt},
            {"t0", c.t0},
            {"t_final", c.t_final},
            {"stepper", c.stepper == Stepper::explicit_euler ? "explicit" : "implicit"},
            {"k_init", c.k_init},
            {"snapshots", c.snapshots},
            {"levels", c.levels},
            {"trials", c.trials},
            {"steps", c.steps},
            {"dt_fraction", c.dt_fraction},
            {"paths", c.paths},
            {"mc_dt", c.mc_dt},
            {"T", c.T},
            {"delta", c.delta},
            {"snapshot_stride", c.snapshot_stride},
            {"seed", c.seed},
            {"threads", c.threads},
            {"output_dir", c.output_dir}};
  const auto opt = [&j](const char* key, const std::optional<std::string>& v) {
    if (v) j[key] = *v;
  };
  opt("f", c.f);
  opt("f_d1", c.f_d1);
  opt("sigma", c.sigma);
  opt("sigma_d1", c.sigma_d1);
  opt("sigma_d2", c.sigma_d2);
  if (c.sigma_bound) j["sigma_bound"] = *c.sigma_bound;
  return j;
}

StableNoiseModel model_from_config(const ExperimentConfig& c) {
  StableNoiseModel m;
  if (c.preset == "example1") {
    m = example1_model(c.alpha, c.g_value);
  } else if (c.preset == "example2") {
    m = example2_model(c.alpha, c.beta, c.g_value);
  } else if (is_filter_preset(c.preset)) {
    m = bistable_signal_model(c.alpha);
  } else if (c.preset.empty()) {
    if (!c.sigma) throw ConfigError("sigma", "required when no preset is given");
    if (c.g_value != 0.0) {
      m.g = constant_fn(c.g_value);
      m.g_d1 = constant_fn(0.0);
      m.g_d2 = constant_fn(0.0);
    }
  } else {
    throw ConfigError("preset", "unknown preset '" + c.preset + "'");
  }
  m.alpha = c.alpha;
  m.beta = c.kind == ExperimentKind::fpe_symmetric ? 0.0 : c.beta;
  apply_overrides(m, c);
  return m;
}

SignalObservationModel filter_model_from_config(const ExperimentConfig& c) {
  if (!c.preset.empty() && !is_filter_preset(c.preset)) {
    throw ConfigError("preset", "the filter runs the example53 model only");
  }
  auto m = bistable_filter_example(c.alpha);
  apply_overrides(m.signal, c);
  return m;
}

Grid1D grid_from_config(const ExperimentConfig& c) {
  if (c.boundary == BoundaryKind::absorbing) return Grid1D::absorbing(grid_count("h", 1.0, c.h));
  grid_count("h", c.L_tilde, c.h);
  return Grid1D::natural(c.L_tilde, c.h);
}

double sigma_bound_estimate(const StableNoiseModel& model, const Grid1D& grid, std::optional<double> declared) {
  if (declared) return *declared;
  const int lo = grid.kind() == BoundaryKind::absorbing ? -grid.J() : grid.j_min();
  double m = 0.0;
  for (int j = lo; j <= -lo; ++j) m = std::max(m, std::abs(model.noise(grid.x(j))));
  return m;
}

ConvergenceResult convergence_study(const StableNoiseModel& model, double L_tilde, double h0, double dt0,
                                    int levels, double t0, double t1, double k_init) {
  if (levels < 2) throw DomainError("convergence_study: need at least two levels");
  std::vector<Grid1D> grids;
  std::vector<Eigen::VectorXd> finals;
  std::vector<double> dts;
  for (int l = 0; l < levels; ++l) {
    const double h = h0 / std::ldexp(1.0, l);
    const double dt = dt0 / std::ldexp(1.0, 2 * l);
    grids.push_back(Grid1D::natural(L_tilde, h));
    dts.push_back(dt);
    const auto init = narrow_gaussian(grids.back(), k_init, t0);
    finals.push_back(solve(model, grids.back(), init, t0, t1, dt, Stepper::implicit_euler).back().values);
  }
  const auto& ref_grid = grids.back();
  const auto& ref = finals.back();
  ConvergenceResult res;
  std::vector<double> lx, ly;
  for (int l = 0; l + 1 < levels; ++l) {
    const auto& g = grids[static_cast<std::size_t>(l)];
    const int ratio = 1 << (levels - 1 - l);
    double err = 0.0;
    for (int j = g.j_min(); j <= g.j_max(); ++j) {
      if (std::abs(g.x(j)) > 0.5 * L_tilde + 1e-12) continue;
      const double a = finals[static_cast<std::size_t>(l)][static_cast<Eigen::Index>(g.index(j))];
      const double b = ref[static_cast<Eigen::Index>(ref_grid.index(j * ratio))];
      err = std::max(err, std::abs(a - b));
    }
    res.levels.push_back({g.h(), dts[static_cast<std::size_t>(l)], err});
    lx.push_back(std::log(g.h()));
    ly.push_back(std::log(err));
  }
  res.strictly_decreasing = true;
  for (std::size_t l = 1; l < res.levels.size(); ++l) {
    if (!(res.levels[l].error < res.levels[l - 1].error)) res.strictly_decreasing = false;
  }
  res.slope = res.levels.size() >= 2 ? least_squares_slope(lx, ly) : 0.0;
  return res;
}

MaxPrincipleAudit max_principle_audit(const StableNoiseModel& model, const Grid1D& grid, double M_tilde,
                                      double dt_fraction, std::size_t trials, std::size_t steps,
                                      std::uint64_t seed, double slack) {
  StableNoiseModel m = model;
  m.f = nullptr;
  m.f_d1 = nullptr;
  m.g = nullptr;
  m.g_d1 = nullptr;
  m.g_d2 = nullptr;
  const auto op = assemble(m, grid);
  const auto bound = stability_bound(m.alpha, grid.h(), M_tilde);

  MaxPrincipleAudit a;
  a.dt_max = bound.dt_max;
  a.dt = dt_fraction * bound.dt_max;
  a.trials = trials;
  a.steps = steps;
  a.observed_min = std::numeric_limits<double>::infinity();
  a.max_excess = -std::numeric_limits<double>::infinity();

  const auto n = static_cast<Eigen::Index>(grid.unknown_count());
  const auto t = static_cast<Eigen::Index>(trials);
  Eigen::MatrixXd U(n, t);
  for (Eigen::Index c = 0; c < t; ++c) {
    Rng rng = substream(seed, static_cast<std::uint64_t>(c));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) U(i, c) = u01(rng);
  }
  const Eigen::RowVectorXd upper = U.colwise().maxCoeff();
  Eigen::MatrixXd next(n, t);
  for (std::size_t s = 1; s <= steps; ++s) {
    next.noalias() = op.matrix * U;
    U += a.dt * next;
    if (!U.allFinite()) throw IntegrationError(s, "max_principle_audit: non-finite state");
    for (Eigen::Index c = 0; c < t; ++c) {
      for (Eigen::Index i = 0; i < n; ++i) {
        const double v = U(i, c);
        a.observed_min = std::min(a.observed_min, v);
        a.max_excess = std::max(a.max_excess, v - upper[c]);
        if (v < -slack || v > upper[c] + slack) ++a.violations;
      }
    }
  }
  return a;
}

McComparison mc_compare(const StableNoiseModel& model, int J, double t0, double t1, double pde_dt, double mc_dt,
                        std::size_t paths, double k_init, std::uint64_t seed, unsigned threads) {
  McComparison r;
  r.grid = Grid1D::absorbing(J);
  const auto init = narrow_gaussian(r.grid, k_init, t0);
  r.p_pde = solve(model, r.grid, init, t0, t1, pde_dt, Stepper::implicit_euler).back().values;
  r.pde_mass = trapezoid_mass(r.grid, r.p_pde);

  const auto x0 = sample_gaussian_initial(paths, k_init, seed);
  SimulationOptions opt;
  opt.kill_outside = std::pair{-1.0, 1.0};
  opt.threads = threads;
  const auto ens = simulate_paths(model, std::span<const double>(x0), mc_dt, t1 - t0, seed, opt);
  r.p_mc = empirical_density(ens, r.grid, true).values;
  r.surviving_fraction = static_cast<double>(ens.count(PathStatus::alive)) / static_cast<double>(paths);

  double l1 = 0.0;
  for (int j = r.grid.first_unknown(); j <= r.grid.last_unknown(); ++j) {
    const auto i = static_cast<Eigen::Index>(r.grid.index(j));
    l1 += std::abs(r.p_pde[i] - r.p_mc[i]);
  }
  r.l1 = l1 * r.grid.h();
  return r;
}

double tracking_error(const FilterRun& run, const TwinExperiment& twin, double t_from) {
  if (twin.signal.size() != run.times.size()) {
    throw DomainError("tracking_error: signal and filter time grids differ");
  }
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    if (run.times[i] < t_from - 1e-12) continue;
    sum += std::abs(run.means[i] - twin.signal[i]);
    ++n;
  }
  if (n == 0) throw DomainError("tracking_error: no times after t_from");
  return sum / static_cast<double>(n);
}

TrackingResult tracking_experiment(const SignalObservationModel& model, const Grid1D& grid, double T,
                                   double delta, std::uint64_t seed, double k_init, double t_from,
                                   const FilterRun* prior, std::size_t snapshot_stride) {
  TrackingResult r;
  r.twin = simulate_twin(model, 0.0, delta, T, seed);
  const auto part = uniform_partition(T, delta);
  const auto init = narrow_gaussian(grid, k_init, 0.0);
  FilterOptions opt;
  opt.snapshot_stride = snapshot_stride;
  r.filter = run_filter(model, grid, init, part, r.twin.record, opt);
  r.filter_error = tracking_error(r.filter, r.twin, t_from);
  if (prior != nullptr) {
    r.prior_error = tracking_error(*prior, r.twin, t_from);
  } else {
    FilterOptions none;
    none.use_observations = false;
    r.prior_error = tracking_error(run_filter(model, grid, init, part, r.twin.record, none), r.twin, t_from);
  }
  return r;
}

RunOutcome run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  switch (c.kind) {
    case ExperimentKind::fpe_symmetric: return run_fpe(c, dir, false);
    case ExperimentKind::fpe_asymmetric: return run_fpe(c, dir, true);
    case ExperimentKind::convergence: return run_convergence(c, dir);
    case ExperimentKind::max_principle: return run_max_principle(c, dir);
    case ExperimentKind::mc_compare: return run_mc(c, dir);
    case ExperimentKind::filter: return run_filter_experiment(c, dir);
  }
  throw ConfigError("kind", "unhandled kind");
}

json execute(const json& config) {
  const ExperimentConfig base = config_from_json(config);
  const std::filesystem::path root = base.output_dir;

  std::vector<ExperimentConfig> runs;
  std::vector<std::filesystem::path> dirs;
  if (base.sweep.empty()) {
    runs.push_back(base);
    dirs.push_back(root);
  } else {
    for (std::size_t i = 0; i < base.sweep.size(); ++i) {
      json merged = config;
      merged.erase("sweep");
      merged.merge_patch(base.sweep[i]);
      runs.push_back(config_from_json(merged));
      dirs.push_back(root / ("run_" + std::to_string(i)));
    }
  }
  // every configuration is validated before any run starts
  for (const auto& c : runs) {
    if (c.kind == ExperimentKind::filter) {
      filter_model_from_config(c);
    } else {
      model_from_config(c);
    }
    if (c.kind != ExperimentKind::convergence) grid_from_config(c);
  }

  std::vector<RunOutcome> outcomes;
  if (runs.size() == 1) {
    outcomes.push_back(run_experiment(runs[0], dirs[0]));
  } else {
    std::vector<std::future<RunOutcome>> futures;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      futures.push_back(std::async(std::launch::async, [&, i] { return run_experiment(runs[i], dirs[i]); }));
    }
    for (auto& f : futures) f.wait();
    for (auto& f : futures) outcomes.push_back(f.get());
  }

  json manifest;
  manifest["kind"] = kind_name(base.kind);
  json files = json::array();
  json entries = json::array();
  for (std::size_t i = 0; i < runs.size(); ++i) {
    json listed = json::array();
    for (const auto& p : outcomes[i].files) {
      listed.push_back(std::filesystem::relative(p, root).generic_string());
      files.push_back(listed.back());
    }
    entries.push_back({{"config", config_to_json(runs[i])}, {"files", listed}, {"summary", outcomes[i].summary}});
  }
  manifest["files"] = files;
  manifest["runs"] = entries;
  std::ofstream out(root / "manifest.json");
  if (!out) throw std::runtime_error("cannot write " + (root / "manifest.json").string());
  out << manifest.dump(2) << '\n';
  return manifest;
}

}  // namespace nlfpe
