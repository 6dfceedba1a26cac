#include "nlfpe/noise_model.hpp"

#include <cmath>
#include <numbers>

namespace nlfpe {

namespace {

double fd_step1(double x) { return 1e-5 * (1.0 + std::abs(x)); }
double fd_step2(double x) { return 1e-4 * (1.0 + std::abs(x)); }

template <class Fn>
double central_d1(const Fn& fn, double x) {
  const double h = fd_step1(x);
  return (fn(x + h) - fn(x - h)) / (2.0 * h);
}

template <class Fn>
double central_d2(const Fn& fn, double x) {
  const double h = fd_step2(x);
  return (fn(x + h) - 2.0 * fn(x) + fn(x - h)) / (h * h);
}

double sign(double v) { return v < 0.0 ? -1.0 : 1.0; }

}  // namespace

double StableNoiseModel::drift(double x) const { return f ? f(x) : 0.0; }

double StableNoiseModel::drift_d1(double x) const {
  if (f_d1) return f_d1(x);
  if (!f) return 0.0;
  return central_d1(f, x);
}

double StableNoiseModel::gauss(double x) const { return g ? g(x) : 0.0; }

double StableNoiseModel::gauss_d1(double x) const {
  if (g_d1) return g_d1(x);
  if (!g) return 0.0;
  return central_d1(g, x);
}

double StableNoiseModel::gauss_d2(double x) const {
  if (g_d2) return g_d2(x);
  if (!g) return 0.0;
  return central_d2(g, x);
}

double StableNoiseModel::noise(double x) const { return sigma ? sigma(x) : 0.0; }

double StableNoiseModel::noise_d1(double x) const {
  if (sigma_d1) return sigma_d1(x);
  if (!sigma) return 0.0;
  return central_d1(sigma, x);
}

double StableNoiseModel::noise_abs_alpha(double x) const {
  return std::pow(std::abs(noise(x)), alpha);
}

double StableNoiseModel::noise_abs_alpha_d1(double x) const {
  if (sigma_alpha_d1) return sigma_alpha_d1(x);
  if (sigma && sigma_d1) {
    const double s = sigma(x);
    return alpha * std::pow(std::abs(s), alpha - 1.0) * sign(s) * sigma_d1(x);
  }
  return central_d1([this](double y) { return noise_abs_alpha(y); }, x);
}

double StableNoiseModel::noise_abs_alpha_d2(double x) const {
  if (sigma_alpha_d2) return sigma_alpha_d2(x);
  if (sigma && sigma_d1 && sigma_d2) {
    const double s = sigma(x);
    const double a = std::abs(s);
    const double d1 = sigma_d1(x);
    return alpha * (alpha - 1.0) * std::pow(a, alpha - 2.0) * d1 * d1 +
           alpha * std::pow(a, alpha - 1.0) * sign(s) * sigma_d2(x);
  }
  return central_d2([this](double y) { return noise_abs_alpha(y); }, x);
}

namespace {

StableNoiseModel with_constant_gauss(StableNoiseModel m, double g) {
  if (g != 0.0) {
    m.g = [g](double) { return g; };
    m.g_d1 = [](double) { return 0.0; };
    m.g_d2 = [](double) { return 0.0; };
  }
  return m;
}

}  // namespace

StableNoiseModel example1_model(double alpha, double g) {
  StableNoiseModel m;
  m.f = [](double x) { return -0.2 * x; };
  m.f_d1 = [](double) { return -0.2; };
  m.sigma = [](double x) { return 2.0 + std::sin(x); };
  m.sigma_d1 = [](double x) { return std::cos(x); };
  m.sigma_d2 = [](double x) { return -std::sin(x); };
  m.alpha = alpha;
  return with_constant_gauss(std::move(m), g);
}

StableNoiseModel example2_model(double alpha, double beta, double g) {
  StableNoiseModel m;
  m.f = [](double x) { return -0.2 * x; };
  m.f_d1 = [](double) { return -0.2; };
  m.sigma = [](double x) { return std::numbers::pi + std::atan(x); };
  m.sigma_d1 = [](double x) { return 1.0 / (1.0 + x * x); };
  m.sigma_d2 = [](double x) { return -2.0 * x / ((1.0 + x * x) * (1.0 + x * x)); };
  m.alpha = alpha;
  m.beta = beta;
  m.monotonicity = SigmaMonotonicity::positive_increasing;
  return with_constant_gauss(std::move(m), g);
}

StableNoiseModel bistable_signal_model(double alpha) {
  StableNoiseModel m;
  m.f = [](double x) { return x - x * x * x; };
  m.f_d1 = [](double x) { return 1.0 - 3.0 * x * x; };
  m.sigma = [](double x) { return 2.0 + std::sin(x); };
  m.sigma_d1 = [](double x) { return std::cos(x); };
  m.sigma_d2 = [](double x) { return -std::sin(x); };
  m.alpha = alpha;
  return m;
}

}  // namespace nlfpe
