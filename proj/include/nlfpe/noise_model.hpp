#pragma once

#include <functional>

namespace nlfpe {

using ScalarFn = std::function<double(double)>;

/// Declared shape of sigma on the domain. Selects the measure branch of the
/// asymmetric adjoint; it is a modelling assertion and is not detected.
enum class SigmaMonotonicity { unspecified, positive_increasing, negative_decreasing };

/// dX = f(X) dt + g(X) dB + sigma(X-) dL, L standard alpha-stable with skewness beta.
///
/// Empty f or g mean the zero function. Empty derivative callbacks fall back to
/// central differences (step 1e-5 (1 + |x|) for first, 1e-4 (1 + |x|) for
/// second derivatives). Derivatives of |sigma|^alpha default to the chain rule
/// when sigma_d1 (and sigma_d2) are present.
///
/// The Fokker-Planck solvers assume |sigma|^alpha in C^2 and sigma nowhere zero.
struct StableNoiseModel {
  ScalarFn f;
  ScalarFn f_d1;
  ScalarFn g;
  ScalarFn g_d1;
  ScalarFn g_d2;
  ScalarFn sigma;
  ScalarFn sigma_d1;
  ScalarFn sigma_d2;
  ScalarFn sigma_alpha_d1;  ///< d/dx |sigma(x)|^alpha
  ScalarFn sigma_alpha_d2;  ///< d^2/dx^2 |sigma(x)|^alpha
  double alpha = 1.0;
  double beta = 0.0;
  SigmaMonotonicity monotonicity = SigmaMonotonicity::unspecified;

  double drift(double x) const;
  double drift_d1(double x) const;
  double gauss(double x) const;
  double gauss_d1(double x) const;
  double gauss_d2(double x) const;
  double noise(double x) const;
  double noise_d1(double x) const;
  double noise_abs_alpha(double x) const;
  double noise_abs_alpha_d1(double x) const;
  double noise_abs_alpha_d2(double x) const;
};

/// f = -0.2 x, sigma = 2 + sin x, constant Gaussian intensity g.
StableNoiseModel example1_model(double alpha, double g);

/// f = -0.2 x, sigma = pi + arctan x (positive, increasing), constant g.
StableNoiseModel example2_model(double alpha, double beta, double g);

/// Bistable signal of the filtering example: f = x - x^3, sigma = 2 + sin x, g = 0.
StableNoiseModel bistable_signal_model(double alpha);

}  // namespace nlfpe
