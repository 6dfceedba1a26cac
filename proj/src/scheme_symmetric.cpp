#include "nlfpe/scheme_symmetric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "nlfpe/errors.hpp"
#include "nlfpe/special_functions.hpp"

namespace nlfpe {

std::vector<double> nonlocal_weights(const Grid1D& grid, int j) {
  const int J = grid.J();
  const int k_lo = -J - j;
  const int k_hi = J - j;
  std::vector<double> w(static_cast<std::size_t>(k_hi - k_lo + 1), 1.0);
  w.front() = 0.5;
  w.back() = 0.5;
  if (k_lo <= 0 && 0 <= k_hi) w[static_cast<std::size_t>(-k_lo)] = 0.0;
  return w;
}

SemiDiscreteOperator assemble(const StableNoiseModel& model, const Grid1D& grid, const CoefficientField& coeffs) {
  const auto n_all = static_cast<Eigen::Index>(grid.size());
  if (coeffs.M.size() != n_all || coeffs.N.size() != n_all || coeffs.C_h.size() != n_all ||
      coeffs.sigma_abs_alpha.size() != n_all) {
    throw DomainError("assemble: coefficient field does not match the grid");
  }
  const int J = grid.J();
  const double h = grid.h();
  const double alpha = model.alpha;
  const double c = symmetric_levy_constant(alpha);
  const int first = grid.first_unknown();
  const int last = grid.last_unknown();
  const auto n = static_cast<Eigen::Index>(grid.unknown_count());
  const bool absorbing = grid.kind() == BoundaryKind::absorbing;

  // |kh|^(-1-alpha) for k = 1 .. 2J
  std::vector<double> kernel(static_cast<std::size_t>(2 * J + 1), 0.0);
  for (int k = 1; k <= 2 * J; ++k) kernel[static_cast<std::size_t>(k)] = std::pow(k * h, -1.0 - alpha);

  SemiDiscreteOperator op;
  op.matrix.setZero(n, n);
  op.grid = grid;
  op.boundary = grid.kind();
  op.alpha = alpha;

  const auto add = [&](int row, int col, double v) {
    if (col < first || col > last) return;  // zero exterior / pinned boundary
    op.matrix(row - first, col - first) += v;
  };

  for (int j = first; j <= last; ++j) {
    const auto gi = static_cast<Eigen::Index>(grid.index(j));
    const double ch = coeffs.C_h[gi] / (h * h);
    add(j, j - 1, ch);
    add(j, j, -2.0 * ch);
    add(j, j + 1, ch);

    const double m = coeffs.M[gi];
    if (m < 0.0) {
      add(j, j, m / h);
      add(j, j - 1, -m / h);
    } else {
      add(j, j + 1, m / h);
      add(j, j, -m / h);
    }

    const double reaction = absorbing ? coeffs.N_tilde[gi] : coeffs.N[gi];
    if (!std::isfinite(reaction)) {
      throw DomainError("assemble: reaction coefficient undefined at x = " + std::to_string(grid.x(j)));
    }
    add(j, j, reaction);

    const double scale = c * h * coeffs.sigma_abs_alpha[gi];
    const auto w = nonlocal_weights(grid, j);
    const int k_lo = -J - j;
    double diag = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) {
      if (w[t] == 0.0) continue;
      const int k = k_lo + static_cast<int>(t);
      const double a = scale * w[t] * kernel[static_cast<std::size_t>(std::abs(k))];
      add(j, j + k, a);
      diag -= a;
    }
    add(j, j, diag);
  }
  return op;
}

SemiDiscreteOperator assemble(const StableNoiseModel& model, const Grid1D& grid) {
  return assemble(model, grid, build_coefficients(model, grid));
}

StabilityBound stability_bound(double alpha, double h, double M_tilde) {
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("stability_bound: alpha must lie in (0, 2)");
  if (!(h > 0.0) || !(M_tilde > 0.0)) throw DomainError("stability_bound: h and M_tilde must be positive");
  const double c = symmetric_levy_constant(alpha);
  const double bracket = 1.0 + 1.0 / alpha - riemann_zeta(alpha - 1.0);
  StabilityBound b;
  b.alpha = alpha;
  b.h = h;
  b.M_tilde = M_tilde;
  b.dt_max = std::pow(h, alpha) / (2.0 * std::pow(M_tilde, alpha) * c * bracket);
  return b;
}

Eigen::VectorXd restrict_to_unknowns(const Grid1D& grid, const Eigen::VectorXd& full) {
  if (full.size() != static_cast<Eigen::Index>(grid.size())) {
    throw DomainError("restrict_to_unknowns: vector size does not match the grid");
  }
  return full.segment(static_cast<Eigen::Index>(grid.unknown_offset()),
                      static_cast<Eigen::Index>(grid.unknown_count()));
}

Eigen::VectorXd extend_from_unknowns(const Grid1D& grid, const Eigen::VectorXd& interior) {
  if (interior.size() != static_cast<Eigen::Index>(grid.unknown_count())) {
    throw DomainError("extend_from_unknowns: vector size does not match the unknown count");
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  full.segment(static_cast<Eigen::Index>(grid.unknown_offset()), interior.size()) = interior;
  return full;
}

namespace {

void require_u(const DensityState& U, const SemiDiscreteOperator& R) {
  if (U.values.size() != static_cast<Eigen::Index>(R.grid.size())) {
    throw DomainError("time step: state size does not match the operator grid");
  }
}

void require_finite(const Eigen::VectorXd& v, std::size_t step) {
  if (!v.allFinite()) throw IntegrationError(step, "non-finite value in time stepping");
}

}  // namespace

DensityState step_explicit(const DensityState& U, const SemiDiscreteOperator& R, double dt, std::size_t step_index) {
  require_u(U, R);
  const Eigen::VectorXd in = restrict_to_unknowns(R.grid, U.values);
  const Eigen::VectorXd out = in + dt * (R.matrix * in);
  require_finite(out, step_index);
  DensityState next = U;
  next.values = extend_from_unknowns(R.grid, out);
  next.time = U.time + dt;
  return next;
}

ImplicitEuler::ImplicitEuler(const Eigen::MatrixXd& R, double dt) : dt_(dt) {
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(R.rows(), R.cols()) - dt * R;
  lu_.compute(system);
  rcond_ = lu_.rcond();
  if (!(rcond_ > 1e-14)) {
    throw SingularSystemError("implicit Euler: I - dt R is singular (rcond = " + std::to_string(rcond_) + ")");
  }
}

Eigen::VectorXd ImplicitEuler::solve(const Eigen::VectorXd& rhs) const { return lu_.solve(rhs); }

DensityState step_implicit(const DensityState& U, const SemiDiscreteOperator& R, double dt, std::size_t step_index) {
  require_u(U, R);
  const ImplicitEuler solver(R.matrix, dt);
  const Eigen::VectorXd out = solver.solve(restrict_to_unknowns(R.grid, U.values));
  require_finite(out, step_index);
  DensityState next = U;
  next.values = extend_from_unknowns(R.grid, out);
  next.time = U.time + dt;
  return next;
}

std::vector<DensityState> solve(const StableNoiseModel& model, const Grid1D& grid, const DensityState& init,
                                double t0, double t1, double dt, Stepper stepper,
                                const std::vector<double>& snapshot_times, Representation output) {
  if (!(dt > 0.0) || !(t1 >= t0)) throw DomainError("solve: need dt > 0 and t1 >= t0");
  if (init.values.size() != static_cast<Eigen::Index>(grid.size())) {
    throw DomainError("solve: initial state does not match the grid");
  }
  const auto steps = static_cast<std::size_t>(std::max(0.0, std::ceil((t1 - t0) / dt - 1e-9)));
  const double step = steps ? (t1 - t0) / static_cast<double>(steps) : 0.0;

  std::vector<std::size_t> marks{0, steps};
  for (double t : snapshot_times) {
    if (t < t0 || t > t1) throw DomainError("solve: snapshot time outside [t0, t1]");
    marks.push_back(steps ? static_cast<std::size_t>(std::llround((t - t0) / step)) : 0);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  DensityState p0 = init;
  p0.representation = Representation::p;
  p0.time = t0;
  if (grid.kind() == BoundaryKind::absorbing) {
    p0.values = extend_from_unknowns(grid, restrict_to_unknowns(grid, p0.values));
  }
  const CoefficientField coeffs = build_coefficients(model, grid);
  const SemiDiscreteOperator R = assemble(model, grid, coeffs);

  Eigen::VectorXd u = restrict_to_unknowns(grid, transform(p0, grid, model, Representation::u).values);
  std::optional<ImplicitEuler> implicit;
  if (stepper == Stepper::implicit_euler && steps) implicit.emplace(R.matrix, step);

  std::vector<DensityState> out;
  std::size_t next_mark = 0;
  const auto record = [&](std::size_t n) {
    DensityState s;
    s.values = extend_from_unknowns(grid, u);
    s.representation = Representation::u;
    s.time = n == steps ? t1 : t0 + static_cast<double>(n) * step;
    out.push_back(output == Representation::u ? s : transform(s, grid, model, Representation::p));
  };
  for (std::size_t n = 0;; ++n) {
    if (next_mark < marks.size() && marks[next_mark] == n) {
      record(n);
      ++next_mark;
    }
    if (n == steps) break;
    if (implicit) {
      u = implicit->solve(u);
    } else {
      u += step * (R.matrix * u);
    }
    require_finite(u, n + 1);
  }
  return out;
}

MaxPrincipleReport check_max_principle(const std::vector<DensityState>& series, const Grid1D& grid,
                                       std::pair<double, double> bounds, double slack) {
  MaxPrincipleReport r;
  r.lower = bounds.first;
  r.upper = bounds.second;
  r.observed_min = std::numeric_limits<double>::infinity();
  r.observed_max = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < series.size(); ++s) {
    const auto& v = series[s].values;
    for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
      const double x = v[static_cast<Eigen::Index>(grid.index(j))];
      r.observed_min = std::min(r.observed_min, x);
      r.observed_max = std::max(r.observed_max, x);
      if (!(x >= bounds.first - slack && x <= bounds.second + slack)) r.violations.push_back({s, j, x});
    }
  }
  return r;
}

}  // namespace nlfpe
