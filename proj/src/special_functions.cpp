#include "nlfpe/special_functions.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "nlfpe/errors.hpp"

namespace nlfpe {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<double, 9> kLanczos = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_gamma(double x) {
  if (x < 0.5) return kPi / (std::sin(kPi * x) * lanczos_gamma(1.0 - x));
  x -= 1.0;
  double a = kLanczos[0];
  const double t = x + 7.5;
  for (std::size_t i = 1; i < kLanczos.size(); ++i) a += kLanczos[i] / (x + static_cast<double>(i));
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

// Borwein's accelerated alternating series for eta(s), s >= 0.
// Truncation error is below 3 (3 + sqrt 8)^-n / |Gamma(s)|.
double dirichlet_eta(double s) {
  constexpr int n = 32;
  std::array<double, n + 1> d{};
  double term = 1.0;
  double acc = 1.0;
  d[0] = acc;
  for (int i = 1; i <= n; ++i) {
    term *= 4.0 * (n + i - 1) * (n - i + 1) / ((2.0 * i) * (2.0 * i - 1.0));
    acc += term;
    d[i] = acc;
  }
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    sum += sign * (d[k] - d[n]) * std::pow(k + 1.0, -s);
  }
  return -sum / d[n];
}

// zeta(s) = eta(s) / (1 - 2^(1-s)) for s >= 0, s != 1.
double zeta_from_eta(double s) {
  const double denom = -std::expm1((1.0 - s) * std::numbers::ln2);
  return dirichlet_eta(s) / denom;
}

}  // namespace

double gamma_fn(double x) {
  if (!std::isfinite(x) || x <= 0.0) {
    throw DomainError("gamma_fn: argument must be positive and finite, got " + std::to_string(x));
  }
  return lanczos_gamma(x);
}

double riemann_zeta(double s) {
  if (!(s > -3.0 && s < 1.0)) {
    throw DomainError("riemann_zeta: argument must lie in (-3, 1), got " + std::to_string(s));
  }
  if (s >= 0.0) return zeta_from_eta(s);
  const double reflected = 1.0 - s;
  return std::pow(2.0, s) * std::pow(kPi, s - 1.0) * std::sin(0.5 * kPi * s) *
         gamma_fn(reflected) * zeta_from_eta(reflected);
}

double symmetric_levy_constant(double alpha) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw DomainError("symmetric_levy_constant: alpha must lie in (0, 2), got " + std::to_string(alpha));
  }
  return alpha * gamma_fn(0.5 * (1.0 + alpha)) /
         (std::pow(2.0, 1.0 - alpha) * std::sqrt(kPi) * gamma_fn(1.0 - 0.5 * alpha));
}

StableConstants stable_constants(double alpha, double beta) {
  if (!(alpha > 0.0 && alpha < 2.0)) {
    throw DomainError("stable_constants: alpha must lie in (0, 2), got " + std::to_string(alpha));
  }
  if (!(beta > -1.0 && beta < 1.0)) {
    throw DomainError("stable_constants: beta must lie in (-1, 1), got " + std::to_string(beta));
  }
  StableConstants k;
  k.alpha = alpha;
  k.beta = beta;
  k.c_sym = symmetric_levy_constant(alpha);
  if (alpha == 1.0) {
    k.c_alpha = 2.0 / kPi;
  } else {
    // cos(pi alpha / 2) written as sin(pi (1 - alpha) / 2) keeps full
    // relative accuracy for alpha close to 1.
    const double one_minus = 1.0 - alpha;
    k.c_alpha = alpha * one_minus / (gamma_fn(2.0 - alpha) * std::sin(0.5 * kPi * one_minus));
  }
  k.c_p = k.c_alpha * 0.5 * (1.0 + beta);
  k.c_n = k.c_alpha * 0.5 * (1.0 - beta);
  return k;
}

}  // namespace nlfpe
