#include "nlfpe/zakai_filter.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nlfpe/errors.hpp"
#include "nlfpe/fpe_core.hpp"

namespace nlfpe {

MarkMeasure::Quadrature MarkMeasure::quadrature() const {
  if (quad_nodes < 2 || !(quad_hi > quad_lo)) throw DomainError("MarkMeasure: invalid quadrature range");
  if (!density) throw DomainError("MarkMeasure: density callback missing");
  const double dz = (quad_hi - quad_lo) / (quad_nodes - 1);
  Quadrature q;
  for (int k = 0; k < quad_nodes; ++k) {
    const double z = quad_lo + k * dz;
    const double w = (k == 0 || k == quad_nodes - 1) ? 0.5 : 1.0;
    q.nodes.push_back(z);
    q.weights.push_back(w * dz * density(z));
  }
  return q;
}

namespace {

template <class F>
double apply_quadrature(const MarkMeasure::Quadrature& q, const F& fn) {
  double sum = 0.0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) sum += q.weights[k] * fn(q.nodes[k]);
  return sum;
}

}  // namespace

double MarkMeasure::integrate(const std::function<double(double)>& F) const {
  return apply_quadrature(quadrature(), F);
}

MarkMeasure standard_normal_marks() {
  MarkMeasure nu;
  nu.density = [](double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); };
  nu.total_mass = 1.0;
  nu.sample = [](Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); };
  return nu;
}

SignalObservationModel bistable_filter_example(double alpha) {
  SignalObservationModel m;
  m.signal = bistable_signal_model(alpha);
  m.f2 = [](double, double x) { return std::cos(x) / (2.0 * std::sqrt(2.0)); };
  m.f2_bound = 1.0 / (2.0 * std::sqrt(2.0));
  m.gamma = [](double, double x, double z) { return std::cos(x) * std::exp(-0.5 * z * z); };
  m.nu = standard_normal_marks();
  m.theta = [](double, double, double) { return 0.5; };
  return m;
}

TwinExperiment simulate_twin(const SignalObservationModel& model, double x0, double dt, double T,
                             std::uint64_t seed, double stiff_threshold) {
  if (!(model.nu.total_mass > 0.0)) throw DomainError("simulate_twin: mark intensity lambda must be positive");
  if (!model.nu.sample || !model.nu.density) throw DomainError("simulate_twin: mark measure needs density and sampler");
  SimulationOptions opt;
  opt.keep_paths = true;
  opt.threads = 1;
  opt.stiff_threshold = stiff_threshold;
  const PathEnsemble ens = simulate_paths(model.signal, x0, dt, T, 1, seed, opt);
  if (ens.status[0] == PathStatus::escaped) throw IntegrationError(ens.steps, "simulate_twin: signal escaped");

  TwinExperiment tw;
  tw.signal = ens.paths[0];
  const std::size_t steps = ens.steps;
  tw.times.resize(steps + 1);
  for (std::size_t n = 0; n <= steps; ++n) tw.times[n] = static_cast<double>(n) * dt;

  Rng rng = substream(seed, 1);
  const double lambda = model.nu.total_mass;
  const double t_end = tw.times.back();
  for (double t = -std::log(open_unit_uniform(rng)) / lambda; t <= t_end;
       t += -std::log(open_unit_uniform(rng)) / lambda) {
    tw.record.jump_times.push_back(t);
    tw.record.marks.push_back(model.nu.sample(rng));
  }

  const auto quad = model.nu.quadrature();
  tw.observation.assign(steps + 1, 0.0);
  tw.record.drift_path.assign(steps + 1, 0.0);
  std::size_t next_jump = 0;
  for (std::size_t n = 0; n < steps; ++n) {
    const double t = tw.times[n];
    const double x = tw.signal[n];
    const double drift = model.f2 ? model.f2(t, x) * dt : 0.0;
    double dy = drift;
    if (model.gamma) {
      while (next_jump < tw.record.jump_times.size() && tw.record.jump_times[next_jump] <= tw.times[n + 1]) {
        dy += model.gamma(t, x, tw.record.marks[next_jump]);
        ++next_jump;
      }
      dy -= dt * apply_quadrature(quad, [&](double z) { return model.gamma(t, x, z); });
    }
    tw.observation[n + 1] = tw.observation[n] + dy;
    tw.record.drift_path[n + 1] = tw.record.drift_path[n] + drift;
  }
  return tw;
}

double chi_weight(double x, double t_i, double delta, const ObservationRecord& record,
                  const SignalObservationModel& model) {
  if (!model.theta) return 1.0;
  return chi_weight(x, t_i, delta, record, model, model.nu.quadrature());
}

double chi_weight(double x, double t_i, double delta, const ObservationRecord& record,
                  const SignalObservationModel& model, const MarkMeasure::Quadrature& quad) {
  if (!model.theta) return 1.0;
  double exponent = 0.0;
  const auto& times = record.jump_times;
  const auto first = std::upper_bound(times.begin(), times.end(), t_i);
  for (auto it = first; it != times.end() && *it <= t_i + delta; ++it) {
    const double th = model.theta(t_i, x, record.marks[static_cast<std::size_t>(it - times.begin())]);
    if (!(th < 1.0)) {
      throw PreconditionError("chi_weight: theta >= 1 at an observed mark (t = " + std::to_string(*it) + ")");
    }
    exponent -= std::log1p(-th);
  }
  if (delta != 0.0) exponent -= delta * apply_quadrature(quad, [&](double z) { return model.theta(t_i, x, z); });
  return std::exp(exponent);
}

Eigen::VectorXd chi_weights(const Grid1D& grid, double t_i, double delta, const ObservationRecord& record,
                            const SignalObservationModel& model) {
  Eigen::VectorXd chi = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid.size()));
  if (!model.theta) return chi;
  const auto quad = model.nu.quadrature();
  for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
    chi[static_cast<Eigen::Index>(grid.index(j))] = chi_weight(grid.x(j), t_i, delta, record, model, quad);
  }
  return chi;
}

Eigen::MatrixXd ZakaiOperator::a_star() const { return s.cwiseInverse().asDiagonal() * R * s.asDiagonal(); }

ZakaiOperator zakai_operator(const StableNoiseModel& signal, const Grid1D& grid) {
  if (grid.kind() != BoundaryKind::natural) throw DomainError("zakai_operator: the filter uses a natural grid");
  StableNoiseModel m = signal;
  m.g = nullptr;
  m.g_d1 = nullptr;
  m.g_d2 = nullptr;
  const CoefficientField cf = build_coefficients(m, grid);
  ZakaiOperator op;
  op.grid = grid;
  op.R = assemble(m, grid, cf).matrix;
  op.s = cf.sigma_abs_alpha;
  return op;
}

namespace {

FilterState finish_step(const FilterState& state, Eigen::VectorXd p, double delta) {
  FilterState next;
  next.window_index = state.window_index + 1;
  next.clip_defect = state.clip_defect;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0) {
      next.clip_defect = std::max(next.clip_defect, -p[i]);
      p[i] = 0.0;
    }
  }
  next.p_unnormalized.values = std::move(p);
  next.p_unnormalized.representation = Representation::p;
  next.p_unnormalized.time = state.p_unnormalized.time + delta;
  return next;
}

void check_step_inputs(const FilterState& state, const Eigen::VectorXd& chi, const ZakaiOperator& op) {
  const auto n = static_cast<Eigen::Index>(op.grid.size());
  if (state.p_unnormalized.values.size() != n || chi.size() != n) {
    throw DomainError("zakai_step: state or chi does not match the operator grid");
  }
}

}  // namespace

FilterState zakai_step(const FilterState& state, const Eigen::VectorXd& chi, const ZakaiOperator& op, double delta) {
  check_step_inputs(state, chi, op);
  if (delta == 0.0) return finish_step(state, chi.cwiseProduct(state.p_unnormalized.values), 0.0);
  return zakai_step(state, chi, op, ImplicitEuler(op.R, delta));
}

FilterState zakai_step(const FilterState& state, const Eigen::VectorXd& chi, const ZakaiOperator& op,
                       const ImplicitEuler& factorized) {
  check_step_inputs(state, chi, op);
  // (I - delta S^-1 R S) p = b  <=>  (I - delta R) (S p) = S b
  const Eigen::VectorXd rhs = op.s.cwiseProduct(chi.cwiseProduct(state.p_unnormalized.values));
  Eigen::VectorXd p = factorized.solve(rhs).cwiseQuotient(op.s);
  if (!p.allFinite()) throw IntegrationError(state.window_index + 1, "zakai_step: non-finite density");
  return finish_step(state, std::move(p), factorized.dt());
}

std::pair<DensityState, double> normalize(const DensityState& state, const Grid1D& grid) {
  const double mass = trapezoid_mass(grid, state.values);
  if (!(mass > 0.0) || !std::isfinite(mass)) {
    throw FilterDegeneracyError("normalize: filter density has non-positive mass");
  }
  DensityState out = state;
  out.values = state.values / mass;
  Eigen::VectorXd xp(out.values.size());
  for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
    const auto i = static_cast<Eigen::Index>(grid.index(j));
    xp[i] = grid.x(j) * out.values[i];
  }
  return {out, trapezoid_mass(grid, xp)};
}

std::vector<double> uniform_partition(double T, double delta) {
  if (!(T > 0.0) || !(delta > 0.0)) throw DomainError("uniform_partition: need T > 0 and delta > 0");
  const auto n = static_cast<std::size_t>(std::max(1.0, std::round(T / delta)));
  std::vector<double> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = static_cast<double>(i) * delta;
  out.back() = T;
  return out;
}

FilterRun run_filter(const SignalObservationModel& model, const Grid1D& grid, const DensityState& init,
                     const std::vector<double>& partition, const ObservationRecord& record,
                     const FilterOptions& options) {
  if (partition.size() < 2) throw DomainError("run_filter: partition needs at least two times");
  for (std::size_t i = 1; i < partition.size(); ++i) {
    if (!(partition[i] > partition[i - 1])) throw DomainError("run_filter: partition must be increasing");
  }
  const ZakaiOperator op = zakai_operator(model.signal, grid);

  FilterRun run;
  FilterState state;
  state.p_unnormalized = init;
  state.p_unnormalized.representation = Representation::p;
  state.p_unnormalized.time = partition.front();

  const std::size_t windows = partition.size() - 1;
  const auto record_window = [&](std::size_t i) {
    const auto [normed, mean] = normalize(state.p_unnormalized, grid);
    run.times.push_back(partition[i]);
    run.means.push_back(mean);
    run.unnormalized_mass.push_back(trapezoid_mass(grid, state.p_unnormalized.values));
    run.normalized_mass.push_back(trapezoid_mass(grid, normed.values));
    const bool snap = i == 0 || i == windows || (options.snapshot_stride && i % options.snapshot_stride == 0);
    if (snap) run.snapshots.push_back({partition[i], state.p_unnormalized.values, normed.values});
  };
  record_window(0);

  std::optional<ImplicitEuler> solver;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < windows; ++i) {
    const double t_i = partition[i];
    const double delta = partition[i + 1] - t_i;
    if (!solver || std::abs(solver->dt() - delta) > 1e-12 * delta) solver.emplace(op.R, delta);
    const Eigen::VectorXd chi =
        options.use_observations ? chi_weights(grid, t_i, delta, record, model) : ones;
    state = zakai_step(state, chi, op, *solver);
    state.p_unnormalized.time = partition[i + 1];
    record_window(i + 1);
  }
  run.clip_defect = state.clip_defect;
  return run;
}

void write_record_csv(const std::string& path, const ObservationRecord& record) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << "t,z\n";
  char buf[64];
  for (std::size_t i = 0; i < record.jump_times.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", record.jump_times[i], record.marks[i]);
    out << buf;
  }
}

ObservationRecord read_record_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  ObservationRecord rec;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line_no == 1 && line.rfind("t,z", 0) == 0) continue;
    std::istringstream row(line);
    double t = 0.0;
    double z = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> z) || comma != ',') {
      throw DomainError(path + ":" + std::to_string(line_no) + ": expected 't,z'");
    }
    if (!rec.jump_times.empty() && !(t > rec.jump_times.back())) {
      throw DomainError(path + ":" + std::to_string(line_no) + ": jump times must be strictly increasing");
    }
    rec.jump_times.push_back(t);
    rec.marks.push_back(z);
  }
  return rec;
}

}  // namespace nlfpe
