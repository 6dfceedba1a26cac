#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "nlfpe/grid.hpp"
#include "nlfpe/noise_model.hpp"

namespace nlfpe {

using Rng = std::mt19937_64;

/// Independent stream for one path, derived from (seed, index) only.
Rng substream(std::uint64_t seed, std::uint64_t index);

/// Uniform variate in the open interval (0, 1).
double open_unit_uniform(Rng& rng);

/// One standard alpha-stable variate (Chambers-Mallows-Stuck). The
/// parameterization has characteristic function exp(-|u|^alpha) at beta = 0,
/// so alpha = 2 gives N(0, 2). alpha in (0, 2], beta in [-1, 1].
double sample_stable(double alpha, double beta, Rng& rng);

/// Increment of the drift flow over dt from x: one Euler step, or adaptive
/// Euler sub-steps of length threshold / |f'| when |f'(x)| dt > threshold.
double drift_flow_increment(const StableNoiseModel& model, double x, double dt, double threshold);

enum class PathStatus : std::uint8_t { alive, killed, escaped };

struct PathEnsemble {
  std::vector<std::vector<double>> paths;  ///< only filled when requested; NaN after kill/escape
  std::vector<double> terminal;            ///< last position (NaN for escaped paths)
  std::vector<PathStatus> status;
  double dt = 0.0;
  double t_final = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;

  std::size_t count(PathStatus s) const;
};

struct SimulationOptions {
  bool keep_paths = false;
  /// Kill a path the first time its Euler state leaves this open interval.
  std::optional<std::pair<double, double>> kill_outside;
  /// The drift update is split into adaptive sub-steps of length
  /// stiff_threshold / |f'(x)| when |f'(X_n)| dt exceeds this threshold.
  double stiff_threshold = 0.5;
  unsigned threads = 0;  ///< 0: hardware concurrency
};

/// Euler-Maruyama for dX = f dt + g dB + sigma(X-) dL:
///   X_{n+1} = X_n + f(X_n) dt + g(X_n) sqrt(dt) xi_n + sigma(X_n) dt^(1/alpha) L_n.
/// Runs floor(t_final / dt) steps; path i uses substream(seed, i), so results
/// do not depend on the thread count.
PathEnsemble simulate_paths(const StableNoiseModel& model, double x0, double dt, double t_final,
                            std::size_t n_paths, std::uint64_t seed, const SimulationOptions& options = {});

/// Same, one path per entry of x0.
PathEnsemble simulate_paths(const StableNoiseModel& model, std::span<const double> x0, double dt,
                            double t_final, std::uint64_t seed, const SimulationOptions& options = {});

/// Histogram of terminal positions with bins [x_j - h/2, x_j + h/2).
/// absorbing = true: only alive paths count and the bin masses h * p_j sum to
/// the surviving fraction; positions in the last half cell before +-1 go to the
/// nearest interior bin. absorbing = false: masses of in-range finite points
/// sum to 1.
DensityState empirical_density(const PathEnsemble& ensemble, const Grid1D& grid, bool absorbing);

/// Draws n samples of the normalized density sqrt(k/pi) exp(-k x^2).
std::vector<double> sample_gaussian_initial(std::size_t n, double k, std::uint64_t seed);

}  // namespace nlfpe
