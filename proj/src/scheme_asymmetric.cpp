#include "nlfpe/scheme_asymmetric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "nlfpe/errors.hpp"
#include "nlfpe/fpe_core.hpp"
#include "nlfpe/scheme_symmetric.hpp"
#include "nlfpe/special_functions.hpp"

namespace nlfpe {

AsymCoefficients build_asym_coefficients(const StableNoiseModel& model, const Grid1D& grid) {
  if (grid.kind() != BoundaryKind::absorbing) {
    throw DomainError("build_asym_coefficients: only the absorbing grid is supported");
  }
  const double alpha = model.alpha;
  const double beta = model.beta;
  const auto k = stable_constants(alpha, beta);
  const double h = grid.h();
  const int J = grid.J();

  double sign = 0.0;
  for (int j = -J; j <= J; ++j) {
    const double s = model.noise(grid.x(j));
    const double sg = s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
    if (sg == 0.0 || (sign != 0.0 && sg != sign)) {
      throw PreconditionError("build_asym_coefficients: sigma must keep one sign on [-1, 1] (x = " +
                              std::to_string(grid.x(j)) + ")");
    }
    sign = sg;
  }

  const CoefficientField base = build_coefficients(model, grid);
  const double zeta_corr = 0.5 * k.c_alpha * riemann_zeta(alpha - 1.0) * std::pow(h, 2.0 - alpha);
  const double c1 = sign > 0.0 ? k.c_p : k.c_n;
  const double c2 = -sign * beta * k.c_alpha;
  const double c1_flip = c1 + c2;  // C_{1,-beta}

  const auto n = static_cast<Eigen::Index>(grid.unknown_count());
  AsymCoefficients out;
  out.grid = grid;
  out.alpha = alpha;
  out.beta = beta;
  out.c1.setConstant(n, c1);
  out.c2.setConstant(n, c2);
  out.M_hat.resize(n);
  out.N_hat.resize(n);
  out.C_h.resize(n);
  out.sigma_abs_alpha.resize(n);
  out.case_flag.resize(static_cast<std::size_t>(n));
  out.m.assign(static_cast<std::size_t>(n), 0);

  for (int j = grid.first_unknown(); j <= grid.last_unknown(); ++j) {
    const auto i = static_cast<Eigen::Index>(j - grid.first_unknown());
    const auto gi = static_cast<Eigen::Index>(grid.index(j));
    const double x = grid.x(j);
    const double a = std::abs(model.noise(x));
    const double s = base.sigma_abs_alpha[gi];
    out.sigma_abs_alpha[i] = s;
    out.C_h[i] = 0.5 * std::pow(model.gauss(x), 2) - zeta_corr * s;
    out.N_hat[i] = base.N[gi] + beta * k.c_alpha * model.noise_d1(x) -
                   s * c1_flip / alpha * std::pow(1.0 - x, -alpha) - s * c1 / alpha * std::pow(1.0 + x, -alpha);
    const bool wide = a + x >= 1.0;
    out.case_flag[static_cast<std::size_t>(i)] = wide ? AsymCase::wide : AsymCase::narrow;
    if (wide) {
      const double bracket = alpha == 1.0
                                 ? std::log(a) - std::log(1.0 - x)
                                 : (std::pow(a, 1.0 - alpha) - std::pow(1.0 - x, 1.0 - alpha)) / (1.0 - alpha);
      out.M_hat[i] = base.M[gi] - s * c2 * bracket;
    } else {
      out.M_hat[i] = base.M[gi];
      const int m = static_cast<int>(std::floor(a / h));
      out.m[static_cast<std::size_t>(i)] = std::min(m, J - j);
    }
  }
  return out;
}

namespace {

void check_dims(const AsymCoefficients& c, const Grid1D& grid) {
  const auto n = static_cast<Eigen::Index>(grid.unknown_count());
  if (!(c.grid == grid) || c.c1.size() != n || c.c2.size() != n || c.M_hat.size() != n || c.N_hat.size() != n ||
      c.C_h.size() != n || c.sigma_abs_alpha.size() != n || c.case_flag.size() != static_cast<std::size_t>(n) ||
      c.m.size() != static_cast<std::size_t>(n)) {
    throw DomainError("asymmetric assembly: coefficients do not match the grid");
  }
}

struct RowWriter {
  Eigen::MatrixXd& mat;
  int first;
  int last;
  void add(int row, int col, double v) const {
    if (col < first || col > last) return;
    mat(row - first, col - first) += v;
  }
};

}  // namespace

Eigen::MatrixXd assemble_A(const AsymCoefficients& coeffs, const Grid1D& grid) {
  check_dims(coeffs, grid);
  const double h = grid.h();
  const auto n = static_cast<Eigen::Index>(grid.unknown_count());
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  const RowWriter w{A, grid.first_unknown(), grid.last_unknown()};
  for (int j = grid.first_unknown(); j <= grid.last_unknown(); ++j) {
    const auto i = static_cast<Eigen::Index>(j - grid.first_unknown());
    const double ch = coeffs.C_h[i] / (h * h);
    w.add(j, j - 1, ch);
    w.add(j, j, -2.0 * ch);
    w.add(j, j + 1, ch);
    const double m = coeffs.M_hat[i];
    if (m < 0.0) {
      w.add(j, j, m / h);
      w.add(j, j - 1, -m / h);
    } else {
      w.add(j, j + 1, m / h);
      w.add(j, j, -m / h);
    }
    w.add(j, j, coeffs.N_hat[i]);
  }
  return A;
}

Eigen::MatrixXd assemble_B(const AsymCoefficients& coeffs, const Grid1D& grid) {
  check_dims(coeffs, grid);
  const double h = grid.h();
  const int J = grid.J();
  const double alpha = coeffs.alpha;
  const auto n = static_cast<Eigen::Index>(grid.unknown_count());
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, n);
  const RowWriter w{B, grid.first_unknown(), grid.last_unknown()};

  std::vector<double> kernel(static_cast<std::size_t>(2 * J + 1), 0.0);
  for (int d = 1; d <= 2 * J; ++d) kernel[static_cast<std::size_t>(d)] = std::pow(d * h, -1.0 - alpha);
  const auto K = [&](int j, int k) { return kernel[static_cast<std::size_t>(std::abs(k - j))]; };

  for (int j = grid.first_unknown(); j <= grid.last_unknown(); ++j) {
    const auto i = static_cast<Eigen::Index>(j - grid.first_unknown());
    const double s = coeffs.sigma_abs_alpha[i];

    // (U_k - U_j) terms
    const auto plain = [&](int k, double weight, double scale) {
      const double a = scale * weight * K(j, k);
      w.add(j, k, a);
      w.add(j, j, -a);
    };
    // U_k - U_j - (x_k - x_j)(U_j - U_{j-1}) / h
    const auto corrected = [&](int k, double weight, double scale) {
      const double a = scale * weight * K(j, k);
      const double taylor = a * static_cast<double>(k - j);
      w.add(j, k, a);
      w.add(j, j, -a - taylor);
      w.add(j, j - 1, taylor);
    };

    const double scale1 = s * coeffs.c1[i] * h;
    if (scale1 != 0.0) {
      for (int k = -J; k <= J; ++k) {
        if (k == j) continue;
        plain(k, (k == -J || k == J) ? 0.5 : 1.0, scale1);
      }
    }

    const double scale2 = s * coeffs.c2[i] * h;
    if (scale2 == 0.0) continue;
    const int m = coeffs.m[static_cast<std::size_t>(i)];
    if (coeffs.case_flag[static_cast<std::size_t>(i)] == AsymCase::wide) {
      for (int k = j + 1; k <= J; ++k) corrected(k, k == J ? 0.5 : 1.0, scale2);
    } else if (m == 0) {
      for (int k = j + 1; k <= J; ++k) plain(k, k == J ? 0.5 : 1.0, scale2);
    } else {
      const int top = j + m;
      for (int k = j + 1; k <= top; ++k) corrected(k, k == top ? 0.5 : 1.0, scale2);
      for (int k = top; k <= J; ++k) plain(k, (k == top || k == J) ? 0.5 : 1.0, scale2);
    }
  }
  return B;
}

std::vector<DensityState> solve_asym(const StableNoiseModel& model, const Grid1D& grid, const DensityState& init,
                                     double t0, double t1, double dt, const std::vector<double>& snapshot_times,
                                     Representation output) {
  if (!(dt > 0.0) || !(t1 >= t0)) throw DomainError("solve_asym: need dt > 0 and t1 >= t0");
  if (init.values.size() != static_cast<Eigen::Index>(grid.size())) {
    throw DomainError("solve_asym: initial state does not match the grid");
  }
  const AsymCoefficients coeffs = build_asym_coefficients(model, grid);
  const Eigen::MatrixXd R = assemble_A(coeffs, grid) + assemble_B(coeffs, grid);

  const auto steps = static_cast<std::size_t>(std::max(0.0, std::ceil((t1 - t0) / dt - 1e-9)));
  const double step = steps ? (t1 - t0) / static_cast<double>(steps) : 0.0;
  std::vector<std::size_t> marks{0, steps};
  for (double t : snapshot_times) {
    if (t < t0 || t > t1) throw DomainError("solve_asym: snapshot time outside [t0, t1]");
    marks.push_back(steps ? static_cast<std::size_t>(std::llround((t - t0) / step)) : 0);
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end()), marks.end());

  DensityState p0 = init;
  p0.representation = Representation::p;
  p0.time = t0;
  p0.values = extend_from_unknowns(grid, restrict_to_unknowns(grid, p0.values));
  Eigen::VectorXd u = restrict_to_unknowns(grid, transform(p0, grid, model, Representation::u).values);
  std::optional<ImplicitEuler> solver;
  if (steps) solver.emplace(R, step);

  std::vector<DensityState> out;
  std::size_t next_mark = 0;
  for (std::size_t n = 0;; ++n) {
    if (next_mark < marks.size() && marks[next_mark] == n) {
      DensityState s;
      s.values = extend_from_unknowns(grid, u);
      s.representation = Representation::u;
      s.time = n == steps ? t1 : t0 + static_cast<double>(n) * step;
      out.push_back(output == Representation::u ? s : transform(s, grid, model, Representation::p));
      ++next_mark;
    }
    if (n == steps) break;
    u = solver->solve(u);
    if (!u.allFinite()) throw IntegrationError(n + 1, "non-finite value in time stepping");
  }
  return out;
}

AsymMaxPrincipleReport check_max_principle_asym(const std::vector<DensityState>& series,
                                                const AsymCoefficients& coeffs, double slack) {
  const Grid1D& grid = coeffs.grid;
  AsymMaxPrincipleReport r;
  for (int j = grid.first_unknown(); j <= grid.last_unknown(); ++j) {
    const auto i = static_cast<Eigen::Index>(j - grid.first_unknown());
    if (coeffs.N_hat[i] > 0.0) r.n_hat_violations.push_back(j);
    if (coeffs.c2[i] < 0.0) r.c2_violations.push_back(j);
  }
  r.n_hat_nonpositive = r.n_hat_violations.empty();
  r.c2_nonnegative = r.c2_violations.empty();
  if (series.empty()) return r;

  constexpr double inf = std::numeric_limits<double>::infinity();
  r.boundary_max = 0.0;
  r.boundary_min = 0.0;
  for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
    const double v = series.front().values[static_cast<Eigen::Index>(grid.index(j))];
    r.boundary_max = std::max(r.boundary_max, v);
    r.boundary_min = std::min(r.boundary_min, v);
  }
  r.interior_max = -inf;
  r.interior_min = inf;
  for (std::size_t s = 1; s < series.size(); ++s) {
    for (int j = grid.first_unknown(); j <= grid.last_unknown(); ++j) {
      const double v = series[s].values[static_cast<Eigen::Index>(grid.index(j))];
      r.interior_max = std::max(r.interior_max, v);
      r.interior_min = std::min(r.interior_min, v);
    }
  }
  if (series.size() > 1) {
    r.extrema_on_boundary = r.interior_max <= r.boundary_max + slack && r.interior_min >= r.boundary_min - slack;
  }
  return r;
}

}  // namespace nlfpe
