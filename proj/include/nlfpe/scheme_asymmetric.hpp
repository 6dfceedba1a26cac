#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "nlfpe/grid.hpp"
#include "nlfpe/noise_model.hpp"

namespace nlfpe {

enum class AsymCase : std::uint8_t {
  wide,   ///< |sigma(x_j)| + x_j >= 1: the compensator window reaches past the right edge
  narrow  ///< |sigma(x_j)| + x_j < 1
};

/// Node-wise data of the skewed-noise scheme on an absorbing grid, indexed by
/// unknown node (entry i is x_{first_unknown + i}).
///
///   C1 = C_p if sigma > 0, C_n if sigma < 0;   C2 = -beta C_alpha sgn(sigma)
///   M^ = M - |sigma|^alpha C2 / (1 - alpha) [|sigma|^(1-alpha) - (1 - x)^(1-alpha)]   (wide)
///        M                                                                         (narrow)
///   N^ = N + beta C_alpha sigma' - |sigma|^alpha C_{1,-beta} / alpha (1 - x)^(-alpha)
///          - |sigma|^alpha C1 / alpha (1 + x)^(-alpha)
///   C_h = g^2 / 2 - C_alpha |sigma|^alpha / 2 zeta(alpha - 1) h^(2 - alpha)
/// At alpha = 1 the wide correction is |sigma| C2 [ln|sigma| - ln(1 - x)].
struct AsymCoefficients {
  Grid1D grid = Grid1D::absorbing(1);
  double alpha = 1.0;
  double beta = 0.0;
  Eigen::VectorXd c1;
  Eigen::VectorXd c2;
  Eigen::VectorXd M_hat;
  Eigen::VectorXd N_hat;
  Eigen::VectorXd C_h;
  Eigen::VectorXd sigma_abs_alpha;
  std::vector<AsymCase> case_flag;
  std::vector<int> m;  ///< floor(|sigma| / h) on narrow nodes, 0 on wide nodes
};

/// Requires an absorbing grid and sigma of one sign at every node of [-1, 1].
/// Throws PreconditionError on a sign change.
AsymCoefficients build_asym_coefficients(const StableNoiseModel& model, const Grid1D& grid);

/// Local part: C_h second difference + M^ upwind difference + N^ on the
/// diagonal, with the symmetric scheme's upwind rule.
Eigen::MatrixXd assemble_A(const AsymCoefficients& coeffs, const Grid1D& grid);

/// Nonlocal part. Row j carries
///   |sigma_j|^alpha C1 h sum_{k=-J, k!=j}^{J} (U_k - U_j) / |x_k - x_j|^(1+alpha)
/// with both end terms halved (U_{+-J} = 0), plus |sigma_j|^alpha C2 h times
///   wide:   sum'_{k=j+1}^{J} [U_k - U_j - (x_k - x_j)(U_j - U_{j-1}) / h] / |x_k - x_j|^(1+alpha)
///   narrow: the same corrected sum over k = j+1 .. j+m, plus
///           sum_{k=j+m}^{J} (U_k - U_j) / |x_k - x_j|^(1+alpha)
/// where sum' halves the top term and sum halves both end terms. With m = 0
/// only the uncorrected sum over k = j+1 .. J (top halved) remains.
Eigen::MatrixXd assemble_B(const AsymCoefficients& coeffs, const Grid1D& grid);

/// Backward Euler for dU/dt = (A + B) U. Same snapshot rules as solve().
std::vector<DensityState> solve_asym(const StableNoiseModel& model, const Grid1D& grid, const DensityState& init,
                                     double t0, double t1, double dt,
                                     const std::vector<double>& snapshot_times = {},
                                     Representation output = Representation::p);

struct AsymMaxPrincipleReport {
  bool n_hat_nonpositive = true;
  bool c2_nonnegative = true;
  std::vector<int> n_hat_violations;  ///< grid indices j with N^ > 0
  std::vector<int> c2_violations;     ///< grid indices j with C2 < 0
  double interior_max = 0.0;  ///< over unknown nodes and t > t_0
  double interior_min = 0.0;
  double boundary_max = 0.0;  ///< over the initial state and the pinned exterior (value 0)
  double boundary_min = 0.0;
  bool extrema_on_boundary = true;

  bool hypotheses_hold() const { return n_hat_nonpositive && c2_nonnegative; }
  /// Boundary attainment is only asserted when the hypotheses hold.
  bool certified() const { return hypotheses_hold() && extrema_on_boundary; }
};

/// series: u-states of one run, first entry the initial state.
AsymMaxPrincipleReport check_max_principle_asym(const std::vector<DensityState>& series,
                                                const AsymCoefficients& coeffs, double slack = 1e-12);

}  // namespace nlfpe
