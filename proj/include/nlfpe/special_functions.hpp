#pragma once

// Gamma, Riemann zeta on (-3, 1) and the alpha-stable Levy-measure constants.

namespace nlfpe {

/// Second Bernoulli number. Enters the Euler-Maclaurin remainder of the
/// corrected trapezoidal rule for the nonlocal sum.
inline constexpr double kBernoulliB2 = 1.0 / 6.0;

/// Gamma function for x > 0 (Lanczos, g = 7, nine terms).
/// Throws DomainError for x <= 0 or non-finite x.
double gamma_fn(double x);

/// Riemann zeta for real s in (-3, 1).
///
/// For s >= 0 the Dirichlet eta series is summed with Borwein's acceleration
/// and divided by 1 - 2^(1-s). For s < 0 the functional equation
///   zeta(s) = 2^s pi^(s-1) sin(pi s / 2) Gamma(1 - s) zeta(1 - s)
/// reflects onto 1 - s in (1, 4), where the same eta series is used.
double riemann_zeta(double s);

struct StableConstants {
  double alpha = 0.0;
  double beta = 0.0;
  double c_sym = 0.0;    ///< c(1, alpha): density of the symmetric measure is c_sym / |z|^(1+alpha)
  double c_alpha = 0.0;  ///< C_alpha of the skewed measure
  double c_p = 0.0;      ///< weight of positive jumps, C_alpha (1 + beta) / 2
  double c_n = 0.0;      ///< weight of negative jumps, C_alpha (1 - beta) / 2
};

/// alpha in (0, 2), beta in (-1, 1). alpha == 1 takes the closed form
/// C_alpha = 2 / pi.
StableConstants stable_constants(double alpha, double beta = 0.0);

/// c(1, alpha) alone.
double symmetric_levy_constant(double alpha);

}  // namespace nlfpe
