#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nlfpe/grid.hpp"
#include "nlfpe/noise_model.hpp"
#include "nlfpe/scheme_symmetric.hpp"
#include "nlfpe/zakai_filter.hpp"

namespace nlfpe {

enum class ExperimentKind { fpe_symmetric, fpe_asymmetric, convergence, max_principle, mc_compare, filter };

/// Invalid configuration, including a refused explicit step above dt_max.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// One experiment. Defaults depend on the kind; see config_from_json.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::fpe_symmetric;

  // model
  std::string preset;  ///< example1, example2, example53 (alias filter_example) or empty
  std::optional<std::string> f, g, sigma, f_d1, sigma_d1, sigma_d2;
  double g_value = 0.0;  ///< constant g for presets, or a numeric "g"
  double alpha = 1.5;
  double beta = 0.0;
  SigmaMonotonicity monotonicity = SigmaMonotonicity::unspecified;

  // numerics
  BoundaryKind boundary = BoundaryKind::absorbing;
  double h = 1.0 / 64.0;
  double L_tilde = 4.0;
  double dt = 1e-3;
  double t0 = 0.0;
  double t_final = 0.2;
  Stepper stepper = Stepper::implicit_euler;
  std::optional<double> sigma_bound;  ///< M~ for the stability check
  double k_init = 40.0;               ///< initial density sqrt(k/pi) exp(-k x^2)
  std::vector<double> snapshots;

  // convergence
  int levels = 4;

  // max_principle
  std::size_t trials = 100;
  std::size_t steps = 200;
  double dt_fraction = 0.9;

  // mc_compare
  std::size_t paths = 100000;
  double mc_dt = 1e-4;

  // filter
  double T = 5.0;
  double delta = 5e-4;
  std::size_t snapshot_stride = 1000;

  std::uint64_t seed = 7;
  unsigned threads = 0;
  std::string output_dir = ".";
  nlohmann::json sweep = nlohmann::json::array();  ///< override objects, one run each
};

/// Reads a config object. "kind" is required; every other key is optional.
/// Unknown keys and ill-typed values raise ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j);

/// Parameter echo of a resolved config (sweep excluded).
nlohmann::json config_to_json(const ExperimentConfig& c);

ExperimentKind parse_kind(const std::string& name);
std::string kind_name(ExperimentKind kind);

/// Model from a preset and/or expression strings. Expressions override the
/// preset's components; missing derivatives fall back to finite differences.
StableNoiseModel model_from_config(const ExperimentConfig& c);
SignalObservationModel filter_model_from_config(const ExperimentConfig& c);

Grid1D grid_from_config(const ExperimentConfig& c);

/// M~ = sigma_bound if set, else max |sigma| over the grid nodes inside the domain.
double sigma_bound_estimate(const StableNoiseModel& model, const Grid1D& grid,
                            std::optional<double> declared = std::nullopt);

// Reusable studies.

struct ConvergenceLevel {
  double h = 0.0;
  double dt = 0.0;
  double error = 0.0;  ///< max over |x| <= L~/2 against the finest level
};

struct ConvergenceResult {
  std::vector<ConvergenceLevel> levels;  ///< all but the reference level
  double slope = 0.0;                    ///< least-squares slope of log error vs log h
  bool strictly_decreasing = false;
};

/// Natural grids h_l = h0 / 2^l, dt_l = dt0 / 4^l, l = 0 .. levels - 1, the
/// last level being the reference. Backward Euler from the narrow Gaussian.
ConvergenceResult convergence_study(const StableNoiseModel& model, double L_tilde, double h0, double dt0,
                                    int levels, double t0, double t1, double k_init);

struct MaxPrincipleAudit {
  double dt = 0.0;
  double dt_max = 0.0;
  std::size_t trials = 0;
  std::size_t steps = 0;
  double observed_min = 0.0;     ///< over all trials and steps
  double max_excess = 0.0;       ///< max over trials of max(U_n) - max(U_0)
  std::size_t violations = 0;    ///< node values outside [-slack, max(U_0) + slack]
  bool ok() const { return violations == 0; }
};

/// f = g = 0 with the model's sigma; explicit Euler at dt = dt_fraction * dt_max
/// from i.i.d. uniform [0, 1] u-states drawn from substream(seed, trial).
MaxPrincipleAudit max_principle_audit(const StableNoiseModel& model, const Grid1D& grid, double M_tilde,
                                      double dt_fraction, std::size_t trials, std::size_t steps,
                                      std::uint64_t seed, double slack = 1e-12);

struct McComparison {
  Grid1D grid = Grid1D::absorbing(1);
  Eigen::VectorXd p_pde;
  Eigen::VectorXd p_mc;
  double l1 = 0.0;  ///< h sum |p_pde - p_mc| over the unknown nodes
  double pde_mass = 0.0;
  double surviving_fraction = 0.0;
};

/// Killed Euler-Maruyama paths against the backward-Euler density on (-1, 1),
/// both started from the narrow Gaussian at t0.
McComparison mc_compare(const StableNoiseModel& model, int J, double t0, double t1, double pde_dt, double mc_dt,
                        std::size_t paths, double k_init, std::uint64_t seed, unsigned threads = 0);

struct TrackingResult {
  TwinExperiment twin;
  FilterRun filter;
  double filter_error = 0.0;  ///< time average of |mean - X| over t >= t_from
  double prior_error = 0.0;
};

/// Mean of |means[i] - signal at times[i]| over times[i] >= t_from. The signal
/// is sampled on the same uniform grid as the partition.
double tracking_error(const FilterRun& run, const TwinExperiment& twin, double t_from);

/// Twin experiment with X_0 = 0 on the partition of step delta, the filter
/// with observations, and the prior run (computed when not supplied).
TrackingResult tracking_experiment(const SignalObservationModel& model, const Grid1D& grid, double T,
                                   double delta, std::uint64_t seed, double k_init, double t_from,
                                   const FilterRun* prior = nullptr, std::size_t snapshot_stride = 0);

// Orchestration.

struct RunOutcome {
  std::vector<std::filesystem::path> files;  ///< data files, manifest excluded
  nlohmann::json summary;
};

/// Runs one experiment and writes its CSV files into dir.
RunOutcome run_experiment(const ExperimentConfig& c, const std::filesystem::path& dir);

/// Runs the config (each sweep entry in run_<i>/ on its own thread) and writes
/// manifest.json listing every file. Returns the manifest.
nlohmann::json execute(const nlohmann::json& config);

}  // namespace nlfpe
