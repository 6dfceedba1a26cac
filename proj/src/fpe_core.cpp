#include "nlfpe/fpe_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nlfpe/errors.hpp"

namespace nlfpe {

DensityState transform(const DensityState& state, const Grid1D& grid, const StableNoiseModel& model,
                       Representation target) {
  if (state.values.size() != static_cast<Eigen::Index>(grid.size())) {
    throw DomainError("transform: state size does not match grid");
  }
  DensityState out = state;
  out.representation = target;
  if (state.representation == target) return out;
  for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
    const auto i = static_cast<Eigen::Index>(grid.index(j));
    const double s = model.noise_abs_alpha(grid.x(j));
    if (!(s > 0.0)) {
      throw DomainError("transform: sigma vanishes at x = " + std::to_string(grid.x(j)));
    }
    out.values[i] = target == Representation::u ? state.values[i] * s : state.values[i] / s;
  }
  return out;
}

CoefficientField build_coefficients(const StableNoiseModel& model, const Grid1D& grid) {
  const auto n = static_cast<Eigen::Index>(grid.size());
  const double alpha = model.alpha;
  const double c = symmetric_levy_constant(alpha);
  const double zeta_corr = c * riemann_zeta(alpha - 1.0) * std::pow(grid.h(), 2.0 - alpha);

  CoefficientField cf;
  cf.M.resize(n);
  cf.N.resize(n);
  cf.N_tilde.setConstant(n, std::numeric_limits<double>::quiet_NaN());
  cf.C_h.resize(n);
  cf.sigma_abs_alpha.resize(n);

  for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
    const auto i = static_cast<Eigen::Index>(grid.index(j));
    const double x = grid.x(j);
    const double s = model.noise_abs_alpha(x);
    if (!(s > 0.0)) throw DomainError("build_coefficients: sigma vanishes at x = " + std::to_string(x));
    const double s1 = model.noise_abs_alpha_d1(x);
    const double s2 = model.noise_abs_alpha_d2(x);
    const double f = model.drift(x);
    const double f1 = model.drift_d1(x);
    const double g = model.gauss(x);
    const double g1 = model.gauss_d1(x);
    const double g2 = model.gauss_d2(x);

    const double q = g * g;
    const double q1 = 2.0 * g * g1;
    const double q2 = 2.0 * g1 * g1 + 2.0 * g * g2;
    const double q_over_s_d1 = (q1 * s - q * s1) / (s * s);
    const double q_over_s_d2 = q2 / s - 2.0 * q1 * s1 / (s * s) - q * s2 / (s * s) + 2.0 * q * s1 * s1 / (s * s * s);
    const double f_over_s_d1 = f1 / s - f * s1 / (s * s);

    cf.sigma_abs_alpha[i] = s;
    cf.M[i] = s * q_over_s_d1 - f;
    cf.N[i] = 0.5 * s * q_over_s_d2 - s * f_over_s_d1;
    cf.C_h[i] = 0.5 * q - zeta_corr * s;
    if (grid.kind() == BoundaryKind::absorbing && std::abs(x) < 1.0 && grid.is_unknown(j)) {
      cf.N_tilde[i] = cf.N[i] - c * s / alpha * (std::pow(1.0 + x, -alpha) + std::pow(1.0 - x, -alpha));
    }
  }
  return cf;
}

namespace {

struct LevyWeights {
  double pos;  ///< density constant of positive jumps
  double neg;  ///< density constant of negative jumps
};

// int_a^b F(z) z^(-1-alpha) dz by the trapezoidal rule in s = log z.
template <class Fn>
double log_trapezoid(const Fn& F, double a, double b, double alpha, int cells) {
  if (!(b > a)) return 0.0;
  const double la = std::log(a);
  const double lb = std::log(b);
  const double ds = (lb - la) / cells;
  double sum = 0.0;
  for (int k = 0; k <= cells; ++k) {
    const double s = la + k * ds;
    const double z = std::exp(s);
    const double w = (k == 0 || k == cells) ? 0.5 : 1.0;
    sum += w * F(z) * std::exp(-alpha * s);
  }
  return sum * ds;
}

// int_a^b z^(-p) dz for p = alpha or alpha+1 style exponents.
double power_integral(double a, double b, double p) {
  if (std::abs(p - 1.0) < 1e-14) return std::log(b / a);
  return (std::pow(b, 1.0 - p) - std::pow(a, 1.0 - p)) / (1.0 - p);
}

void check_window(double x, const QuadratureConfig& q) {
  if (!(q.epsilon > 0.0) || !(q.z_max > q.epsilon) || q.cells < 8) {
    throw PreconditionError("quadrature config: need 0 < epsilon < z_max and cells >= 8");
  }
  if (q.support_lo < x - q.z_max || q.support_hi > x + q.z_max) {
    throw PreconditionError("quadrature window [x - z_max, x + z_max] does not cover the test-function support at x = " +
                            std::to_string(x));
  }
}

int cells_for(double a, double b, const QuadratureConfig& q) {
  const double total = std::log(q.z_max / q.epsilon);
  const double part = std::log(b / a);
  return std::max(8, static_cast<int>(std::ceil(q.cells * part / total)));
}

// Symmetric principal value  c * int [w(x+z) - w(x)] |z|^(-1-alpha) dz
// written with second differences w(x+z) + w(x-z) - 2 w(x).
template <class W>
double levy_symmetric(const W& w, double w0, double w2, double x, double c, double alpha,
                      const QuadratureConfig& q) {
  const double eps = q.epsilon;
  const double inner = w2 * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);
  const auto F = [&](double z) { return w(x + z) + w(x - z) - 2.0 * w0; };
  const double outer = log_trapezoid(F, eps, q.z_max, alpha, cells_for(eps, q.z_max, q));
  const double tail = -2.0 * w0 * std::pow(q.z_max, -alpha) / alpha;
  return c * (inner + outer + tail);
}

// int [w(x+z) - w(x) - z w'(x) 1{|z| < cut}] (pos 1{z>0} + neg 1{z<0}) |z|^(-1-alpha) dz
template <class W>
double levy_skewed(const W& w, double w0, double w1, double w2, double x, double cut, LevyWeights k,
                   double alpha, const QuadratureConfig& q) {
  const double eps = q.epsilon;
  if (!(cut > eps)) {
    throw PreconditionError("compensator radius |sigma(x)| must exceed the quadrature epsilon");
  }
  const double inner = 0.5 * w2 * (k.pos + k.neg) * std::pow(eps, 2.0 - alpha) / (2.0 - alpha);

  const auto side = [&](double dir, double weight) {
    if (weight == 0.0) return 0.0;
    const auto compensated = [&](double z) { return w(x + dir * z) - w0 - dir * z * w1; };
    const auto plain = [&](double z) { return w(x + dir * z) - w0; };
    double acc = 0.0;
    const double split = std::min(cut, q.z_max);
    acc += log_trapezoid(compensated, eps, split, alpha, cells_for(eps, split, q));
    if (cut < q.z_max) acc += log_trapezoid(plain, cut, q.z_max, alpha, cells_for(cut, q.z_max, q));
    acc += -w0 * std::pow(q.z_max, -alpha) / alpha;
    if (cut > q.z_max) acc += -dir * w1 * power_integral(q.z_max, cut, alpha);
    return weight * acc;
  };
  return inner + side(1.0, k.pos) + side(-1.0, k.neg);
}

struct LocalData {
  double f, f1, g, g1, g2;
};

LocalData local_data(const StableNoiseModel& m, double x) {
  return {m.drift(x), m.drift_d1(x), m.gauss(x), m.gauss_d1(x), m.gauss_d2(x)};
}

// -(f v)' + 1/2 (g^2 v)''
double local_adjoint(const LocalData& d, double v0, double v1, double v2) {
  const double q = d.g * d.g;
  const double q1 = 2.0 * d.g * d.g1;
  const double q2 = 2.0 * d.g1 * d.g1 + 2.0 * d.g * d.g2;
  return -(d.f1 * v0 + d.f * v1) + 0.5 * (q2 * v0 + 2.0 * q1 * v1 + q * v2);
}

}  // namespace

double apply_generator(const TestFunction& phi, double x, const StableNoiseModel& model,
                       const QuadratureConfig& quad) {
  check_window(x, quad);
  const double alpha = model.alpha;
  const double p0 = phi.value(x);
  const double p1 = phi.d1(x);
  const double p2 = phi.d2(x);
  const double g = model.gauss(x);
  const double local = model.drift(x) * p1 + 0.5 * g * g * p2;
  const double sig = model.noise(x);
  const double s = std::pow(std::abs(sig), alpha);
  if (s == 0.0) return local;

  if (model.beta == 0.0) {
    const double c = symmetric_levy_constant(alpha);
    return local + s * levy_symmetric(phi.value, p0, p2, x, c, alpha, quad);
  }
  const auto k = stable_constants(alpha, model.beta);
  // z = sigma(x) y maps nu_{alpha,beta}(dy) to |sigma|^alpha nu_{alpha, beta sgn sigma}(dz).
  const LevyWeights w = sig > 0.0 ? LevyWeights{k.c_p, k.c_n} : LevyWeights{k.c_n, k.c_p};
  return local + s * levy_skewed(phi.value, p0, p1, p2, x, std::abs(sig), w, alpha, quad);
}

double apply_adjoint_sym(const TestFunction& v, double x, const StableNoiseModel& model,
                         const QuadratureConfig& quad) {
  check_window(x, quad);
  const double alpha = model.alpha;
  const double v0 = v.value(x);
  const double v1 = v.d1(x);
  const double v2 = v.d2(x);
  const double local = local_adjoint(local_data(model, x), v0, v1, v2);

  const double s = model.noise_abs_alpha(x);
  const double s1 = model.noise_abs_alpha_d1(x);
  const double s2 = model.noise_abs_alpha_d2(x);
  const double w0 = s * v0;
  const double w2 = s2 * v0 + 2.0 * s1 * v1 + s * v2;
  const auto w = [&](double y) { return model.noise_abs_alpha(y) * v.value(y); };
  const double c = symmetric_levy_constant(alpha);
  return local + levy_symmetric(w, w0, w2, x, c, alpha, quad);
}

double apply_adjoint_asym(const TestFunction& v, double x, const StableNoiseModel& model,
                          const QuadratureConfig& quad) {
  check_window(x, quad);
  double declared_sign = 0.0;
  switch (model.monotonicity) {
    case SigmaMonotonicity::positive_increasing: declared_sign = 1.0; break;
    case SigmaMonotonicity::negative_decreasing: declared_sign = -1.0; break;
    case SigmaMonotonicity::unspecified:
      throw PreconditionError("apply_adjoint_asym: sigma monotonicity must be declared");
  }
  const double alpha = model.alpha;
  const auto k = stable_constants(alpha, model.beta);
  const double v0 = v.value(x);
  const double v1 = v.d1(x);
  const double v2 = v.d2(x);
  const double local = local_adjoint(local_data(model, x), v0, v1, v2);

  const double sig = model.noise(x);
  if (sig * declared_sign <= 0.0) {
    throw PreconditionError("apply_adjoint_asym: sigma(x) has the wrong sign at x = " + std::to_string(x));
  }
  const double s = model.noise_abs_alpha(x);
  const double s1 = model.noise_abs_alpha_d1(x);
  const double s2 = model.noise_abs_alpha_d2(x);
  const double w0 = s * v0;
  const double w1 = s1 * v0 + s * v1;
  const double w2 = s2 * v0 + 2.0 * s1 * v1 + s * v2;
  const auto w = [&](double y) {
    const double sy = model.noise(y);
    if (sy * declared_sign <= 0.0) {
      throw PreconditionError("apply_adjoint_asym: sigma changes sign inside the quadrature window (y = " +
                              std::to_string(y) + ")");
    }
    return std::pow(std::abs(sy), alpha) * v.value(y);
  };
  // Positive increasing sigma flips the skewness; negative decreasing keeps it.
  const LevyWeights weights =
      declared_sign > 0.0 ? LevyWeights{k.c_n, k.c_p} : LevyWeights{k.c_p, k.c_n};
  const double nonlocal = levy_skewed(w, w0, w1, w2, x, std::abs(sig), weights, alpha, quad);
  return local + nonlocal + model.beta * k.c_alpha * v0 * model.noise_d1(x);
}

}  // namespace nlfpe
