#pragma once

#include <Eigen/Dense>
#include <limits>

#include "nlfpe/grid.hpp"
#include "nlfpe/noise_model.hpp"
#include "nlfpe/special_functions.hpp"

namespace nlfpe {

/// Node-wise coefficients of the u-equation
///   u_t = g^2/2 u_xx + M u_x + N u + |sigma|^alpha * (nonlocal part)
/// indexed like the grid. N_tilde adds the absorbing loss and is NaN outside
/// (-1, 1) and on natural grids.
struct CoefficientField {
  Eigen::VectorXd M;
  Eigen::VectorXd N;
  Eigen::VectorXd N_tilde;
  Eigen::VectorXd C_h;  ///< g^2/2 - c(1,alpha) zeta(alpha-1) |sigma|^alpha h^(2-alpha)
  Eigen::VectorXd sigma_abs_alpha;
};

/// p <-> u = |sigma|^alpha p at every node. Throws DomainError where sigma(x_j) = 0.
DensityState transform(const DensityState& state, const Grid1D& grid, const StableNoiseModel& model,
                       Representation target);

/// M = |s|^a (g^2/|s|^a)' - f,  N = 1/2 |s|^a (g^2/|s|^a)'' - |s|^a (f/|s|^a)'.
CoefficientField build_coefficients(const StableNoiseModel& model, const Grid1D& grid);

/// Principal-value quadrature settings for the pointwise operators below.
///
/// |z| < epsilon is handled by the second-order Taylor term, [epsilon, z_max]
/// by the trapezoidal rule in log z (split at the compensator radius), and the
/// tail |z| > z_max in closed form assuming the test function vanishes there.
/// [support_lo, support_hi] must contain the support of the test function.
struct QuadratureConfig {
  double epsilon = 1e-6;
  double z_max = 12.0;
  int cells = 6000;
  double support_lo = -4.0;
  double support_hi = 4.0;
};

/// A smooth function with its first two derivatives.
struct TestFunction {
  ScalarFn value;
  ScalarFn d1;
  ScalarFn d2;
};

/// Generator of the SDE applied to phi at x:
///   f phi' + g^2/2 phi'' + int [phi(x + sigma y) - phi(x) - sigma y phi' 1{|y|<1}] nu(dy).
/// beta = 0 uses the symmetric measure c(1,alpha)|y|^(-1-alpha); otherwise the
/// skewed measure with C_p(beta), C_n(beta).
double apply_generator(const TestFunction& phi, double x, const StableNoiseModel& model,
                       const QuadratureConfig& quad = {});

/// Adjoint of the symmetric generator applied to v at x:
///   -(f v)' + 1/2 (g^2 v)'' + PV int [|s(x+z)|^a v(x+z) - |s(x)|^a v(x)] nu(dz).
double apply_adjoint_sym(const TestFunction& v, double x, const StableNoiseModel& model,
                         const QuadratureConfig& quad = {});

/// Adjoint of the skewed generator. Requires model.monotonicity to be
/// declared; the measure is nu_{alpha,-beta} for positive increasing sigma and
/// nu_{alpha,beta} for negative decreasing sigma, plus beta C_alpha sigma' v.
/// Throws PreconditionError when sigma has the wrong sign inside the window.
double apply_adjoint_asym(const TestFunction& v, double x, const StableNoiseModel& model,
                          const QuadratureConfig& quad = {});

}  // namespace nlfpe
