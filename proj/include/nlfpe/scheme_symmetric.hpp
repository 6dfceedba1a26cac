#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <utility>
#include <vector>

#include "nlfpe/fpe_core.hpp"
#include "nlfpe/grid.hpp"
#include "nlfpe/noise_model.hpp"

namespace nlfpe {

/// Semi-discrete right-hand side dU/dt = R U in u-variables, over the grid's
/// unknown nodes (ordered first_unknown() .. last_unknown()).
struct SemiDiscreteOperator {
  Eigen::MatrixXd matrix;
  Grid1D grid = Grid1D::absorbing(1);
  BoundaryKind boundary = BoundaryKind::absorbing;
  double alpha = 1.0;
};

/// Row j of R:
///   C_h (U_{j-1} - 2U_j + U_{j+1}) / h^2 + M delta_u U_j + N' U_j
///   + c(1,alpha) h |sigma_j|^alpha sum_{k=-J-j, k!=0}^{J-j} w_k (U_{j+k} - U_j) / |kh|^(1+alpha)
/// with N' = N_tilde (absorbing) or N (natural), w_k = 1/2 at both end indices
/// and 1 otherwise. delta_u is the backward difference when M < 0 and the
/// forward difference otherwise (M = 0 included). Values at |x| >= 1
/// (absorbing) or beyond +-L (natural) are zero.
SemiDiscreteOperator assemble(const StableNoiseModel& model, const Grid1D& grid, const CoefficientField& coeffs);
SemiDiscreteOperator assemble(const StableNoiseModel& model, const Grid1D& grid);

/// Trapezoidal weights of the nonlocal sum in row j: entry k - (-J - j) holds
/// w_k for k in [-J - j, J - j] (the k = 0 slot is 0).
std::vector<double> nonlocal_weights(const Grid1D& grid, int j);

struct StabilityBound {
  double dt_max = 0.0;
  double alpha = 0.0;
  double h = 0.0;
  double M_tilde = 0.0;
};

/// dt_max = h^alpha / (2 M~^alpha c(1,alpha) [1 + 1/alpha - zeta(alpha - 1)]).
StabilityBound stability_bound(double alpha, double h, double M_tilde);

/// Unknown-node segment of a full grid vector, and its inverse (non-unknown
/// nodes set to zero).
Eigen::VectorXd restrict_to_unknowns(const Grid1D& grid, const Eigen::VectorXd& full);
Eigen::VectorXd extend_from_unknowns(const Grid1D& grid, const Eigen::VectorXd& interior);

/// U <- U + dt R U. Throws IntegrationError(step_index) on non-finite output.
DensityState step_explicit(const DensityState& U, const SemiDiscreteOperator& R, double dt,
                           std::size_t step_index = 0);

/// Backward Euler (I - dt R) U_next = U with a factorization computed once.
class ImplicitEuler {
 public:
  /// Throws SingularSystemError when I - dt R is numerically singular.
  ImplicitEuler(const Eigen::MatrixXd& R, double dt);
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
  double dt() const { return dt_; }
  double rcond() const { return rcond_; }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double dt_;
  double rcond_;
};

/// One backward-Euler step. Factorizes on every call; use ImplicitEuler for
/// repeated steps.
DensityState step_implicit(const DensityState& U, const SemiDiscreteOperator& R, double dt,
                           std::size_t step_index = 0);

enum class Stepper { explicit_euler, implicit_euler };

/// Marches p from t0 to t1 in u-variables with n = ceil((t1 - t0) / dt) equal
/// steps. Returns states at t0, at each requested time (rounded to the
/// nearest step) and at t1, in increasing time order without duplicates.
std::vector<DensityState> solve(const StableNoiseModel& model, const Grid1D& grid, const DensityState& init,
                                double t0, double t1, double dt, Stepper stepper,
                                const std::vector<double>& snapshot_times = {},
                                Representation output = Representation::p);

struct MaxPrincipleViolation {
  std::size_t snapshot = 0;
  int node = 0;  ///< grid index j
  double value = 0.0;
};

struct MaxPrincipleReport {
  double lower = 0.0;
  double upper = 0.0;
  double observed_min = 0.0;
  double observed_max = 0.0;
  std::vector<MaxPrincipleViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Flags every node value outside [lower - slack, upper + slack].
MaxPrincipleReport check_max_principle(const std::vector<DensityState>& series, const Grid1D& grid,
                                       std::pair<double, double> bounds, double slack = 1e-12);

}  // namespace nlfpe
