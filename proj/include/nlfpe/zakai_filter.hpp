#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nlfpe/grid.hpp"
#include "nlfpe/noise_model.hpp"
#include "nlfpe/scheme_symmetric.hpp"
#include "nlfpe/stable_process.hpp"

namespace nlfpe {

using TimeStateFn = std::function<double(double t, double x)>;
using MarkKernelFn = std::function<double(double t, double x, double z)>;

/// Finite mark measure nu(dz) = density(z) dz with total mass lambda.
/// Integrals against nu use the trapezoidal rule on [quad_lo, quad_hi].
struct MarkMeasure {
  ScalarFn density;
  double total_mass = 1.0;
  std::function<double(Rng&)> sample;  ///< draws from nu / lambda
  double quad_lo = -8.0;
  double quad_hi = 8.0;
  int quad_nodes = 161;

  struct Quadrature {
    std::vector<double> nodes;
    std::vector<double> weights;  ///< trapezoid weight times density
  };
  Quadrature quadrature() const;

  /// int F(z) nu(dz) by the fixed trapezoidal rule.
  double integrate(const std::function<double(double)>& F) const;
};

/// Standard normal marks, lambda = 1.
MarkMeasure standard_normal_marks();

/// Signal dX = f dt + sigma(X-) dL (g = 0) observed through
///   dY = f2(t, X) dt + int gamma(t, X-, z) (N(dt, dz) - nu(dz) dt).
/// theta(t, x, z) < 1 is the measure-change kernel.
struct SignalObservationModel {
  StableNoiseModel signal;
  TimeStateFn f2;
  double f2_bound = 0.0;
  MarkKernelFn gamma;
  MarkMeasure nu;
  MarkKernelFn theta;
};

/// Bistable filtering example: f = x - x^3, sigma = 2 + sin x,
/// f2 = cos(x) / (2 sqrt 2), gamma = cos(x) exp(-z^2/2), standard normal marks,
/// theta = 1/2.
SignalObservationModel bistable_filter_example(double alpha);

struct ObservationRecord {
  std::vector<double> jump_times;  ///< strictly increasing, in (0, T]
  std::vector<double> marks;
  std::vector<double> drift_path;  ///< int_0^{t_n} f2 dt on the signal time grid, diagnostic only
};

struct TwinExperiment {
  std::vector<double> times;        ///< t_n = n dt
  std::vector<double> signal;       ///< X at t_n
  std::vector<double> observation;  ///< Y at t_n, Y_0 = 0
  ObservationRecord record;
};

/// Simulates the signal with the Euler-Maruyama integrator of
/// simulate_paths (stream substream(seed, 0)) and the observation jumps with a
/// rate-lambda Poisson clock and i.i.d. marks (stream substream(seed, 1)).
TwinExperiment simulate_twin(const SignalObservationModel& model, double x0, double dt, double T,
                             std::uint64_t seed, double stiff_threshold = 0.5);

/// chi = exp{ -sum_{t_i < tau_k <= t_i + delta} ln(1 - theta(t_i, x, z_k)) - delta int theta(t_i, x, z) nu(dz) }.
/// Throws PreconditionError when theta >= 1 at an observed mark.
double chi_weight(double x, double t_i, double delta, const ObservationRecord& record,
                  const SignalObservationModel& model);
double chi_weight(double x, double t_i, double delta, const ObservationRecord& record,
                  const SignalObservationModel& model, const MarkMeasure::Quadrature& quad);

/// chi at every grid node.
Eigen::VectorXd chi_weights(const Grid1D& grid, double t_i, double delta, const ObservationRecord& record,
                            const SignalObservationModel& model);

/// A* of the signal (g = 0) on a natural grid, stored as the u-operator R:
/// A*_p = S^-1 R S with S = diag(|sigma(x_j)|^alpha).
struct ZakaiOperator {
  Grid1D grid = Grid1D::natural(1.0, 1.0);
  Eigen::MatrixXd R;
  Eigen::VectorXd s;  ///< |sigma|^alpha over the grid nodes

  /// The p-variable matrix S^-1 R S.
  Eigen::MatrixXd a_star() const;
};

ZakaiOperator zakai_operator(const StableNoiseModel& signal, const Grid1D& grid);

struct FilterState {
  DensityState p_unnormalized;
  std::size_t window_index = 0;
  double clip_defect = 0.0;  ///< largest negative entry removed so far (magnitude)
};

/// (I - delta A*) p_{i+1} = chi p_i. delta = 0 returns chi p_i. Negative
/// entries of the solution are set to 0 and recorded in clip_defect.
FilterState zakai_step(const FilterState& state, const Eigen::VectorXd& chi, const ZakaiOperator& op, double delta);

/// Same with a prepared factorization of I - delta R (u-variables).
FilterState zakai_step(const FilterState& state, const Eigen::VectorXd& chi, const ZakaiOperator& op,
                       const ImplicitEuler& factorized);

/// Density scaled to unit trapezoidal mass, and its mean. Throws
/// FilterDegeneracyError when the mass is not positive.
std::pair<DensityState, double> normalize(const DensityState& state, const Grid1D& grid);

struct FilterSnapshot {
  double t = 0.0;
  Eigen::VectorXd p_unnormalized;
  Eigen::VectorXd p_normalized;
};

struct FilterRun {
  std::vector<double> times;            ///< partition t_0 .. t_n
  std::vector<double> means;            ///< conditional mean at each t_i
  std::vector<double> unnormalized_mass;
  std::vector<double> normalized_mass;  ///< trapezoidal mass after normalization
  std::vector<FilterSnapshot> snapshots;
  double clip_defect = 0.0;
};

struct FilterOptions {
  std::size_t snapshot_stride = 0;  ///< 0: only the first and last windows
  bool use_observations = true;     ///< false: chi = 1 (prior evolution)
};

/// Windows [t_i, t_{i+1}] of the partition: chi from the record, then one
/// implicit Zakai step. The factorization is reused while delta_i repeats.
FilterRun run_filter(const SignalObservationModel& model, const Grid1D& grid, const DensityState& init,
                     const std::vector<double>& partition, const ObservationRecord& record,
                     const FilterOptions& options = {});

/// Uniform partition 0, delta, ..., T (the last step absorbs rounding).
std::vector<double> uniform_partition(double T, double delta);

/// `t,z` rows with a header line.
void write_record_csv(const std::string& path, const ObservationRecord& record);
ObservationRecord read_record_csv(const std::string& path);

}  // namespace nlfpe
