#include "nlfpe/stable_process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "nlfpe/errors.hpp"

namespace nlfpe {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

Rng substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x5eedu};
  return Rng(seq);
}

double open_unit_uniform(Rng& rng) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double sample_stable(double alpha, double beta, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0) || !(beta >= -1.0 && beta <= 1.0)) {
    throw DomainError("sample_stable: need alpha in (0, 2] and beta in [-1, 1]");
  }
  const double v = kPi * (open_unit_uniform(rng) - 0.5);
  const double w = -std::log(open_unit_uniform(rng));
  if (alpha == 1.0) {
    const double b = 0.5 * kPi + beta * v;
    return (2.0 / kPi) * (b * std::tan(v) - beta * std::log(0.5 * kPi * w * std::cos(v) / b));
  }
  const double t = beta * std::tan(0.5 * kPi * alpha);
  const double shift = std::atan(t) / alpha;
  const double scale = std::pow(1.0 + t * t, 0.5 / alpha);
  const double a = alpha * (v + shift);
  return scale * std::sin(a) / std::pow(std::cos(v), 1.0 / alpha) *
         std::pow(std::cos(v - a) / w, (1.0 - alpha) / alpha);
}

double drift_flow_increment(const StableNoiseModel& model, double x, double dt, double threshold) {
  const double stiff = std::abs(model.drift_d1(x)) * dt;
  if (!(stiff > threshold)) return model.drift(x) * dt;
  double y = x;
  double remaining = dt;
  for (int guard = 0; remaining > 0.0 && guard < 1000000; ++guard) {
    const double slope = std::abs(model.drift_d1(y));
    const double step = slope > 0.0 ? std::min(remaining, threshold / slope) : remaining;
    y += model.drift(y) * step;
    remaining -= step;
    if (!std::isfinite(y)) break;
  }
  return y - x;
}

std::size_t PathEnsemble::count(PathStatus s) const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), s));
}

namespace {

void run_path(const StableNoiseModel& model, double x0, double dt, std::size_t steps,
              std::uint64_t seed, std::size_t index, const SimulationOptions& opt, PathEnsemble& out) {
  Rng rng = substream(seed, index);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sqrt_dt = std::sqrt(dt);
  const double stable_scale = std::pow(dt, 1.0 / model.alpha);
  const bool has_gauss = static_cast<bool>(model.g);
  const bool has_stable = static_cast<bool>(model.sigma);

  std::vector<double>* path = opt.keep_paths ? &out.paths[index] : nullptr;
  if (path) {
    path->assign(steps + 1, kNaN);
    (*path)[0] = x0;
  }
  double x = x0;
  PathStatus status = PathStatus::alive;
  if (opt.kill_outside && !(x > opt.kill_outside->first && x < opt.kill_outside->second)) {
    status = PathStatus::killed;
  }
  for (std::size_t n = 0; n < steps && status == PathStatus::alive; ++n) {
    double next = x + drift_flow_increment(model, x, dt, opt.stiff_threshold);
    if (has_gauss) next += model.g(x) * sqrt_dt * normal(rng);
    if (has_stable) next += model.sigma(x) * stable_scale * sample_stable(model.alpha, model.beta, rng);
    if (!std::isfinite(next)) {
      status = PathStatus::escaped;
      x = kNaN;
      break;
    }
    x = next;
    if (path) (*path)[n + 1] = x;
    if (opt.kill_outside && !(x > opt.kill_outside->first && x < opt.kill_outside->second)) {
      status = PathStatus::killed;
    }
  }
  out.terminal[index] = x;
  out.status[index] = status;
}

}  // namespace

PathEnsemble simulate_paths(const StableNoiseModel& model, std::span<const double> x0, double dt,
                            double t_final, std::uint64_t seed, const SimulationOptions& options) {
  if (!(dt > 0.0)) throw DomainError("simulate_paths: dt must be positive");
  if (x0.empty()) throw DomainError("simulate_paths: need at least one path");
  if (!(t_final >= 0.0)) throw DomainError("simulate_paths: t_final must be non-negative");
  if (model.sigma && !(model.alpha > 0.0 && model.alpha <= 2.0)) {
    throw DomainError("simulate_paths: alpha must lie in (0, 2]");
  }

  PathEnsemble out;
  out.dt = dt;
  out.t_final = t_final;
  out.steps = static_cast<std::size_t>(std::floor(t_final / dt + 1e-9));
  out.seed = seed;
  out.terminal.assign(x0.size(), kNaN);
  out.status.assign(x0.size(), PathStatus::alive);
  if (options.keep_paths) out.paths.resize(x0.size());

  unsigned threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, x0.size()));
  const auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) run_path(model, x0[i], dt, out.steps, seed, i, options, out);
  };
  if (threads <= 1) {
    work(0, x0.size());
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (x0.size() + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(x0.size(), begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }
  return out;
}

PathEnsemble simulate_paths(const StableNoiseModel& model, double x0, double dt, double t_final,
                            std::size_t n_paths, std::uint64_t seed, const SimulationOptions& options) {
  if (n_paths == 0) throw DomainError("simulate_paths: need at least one path");
  const std::vector<double> starts(n_paths, x0);
  return simulate_paths(model, std::span<const double>(starts), dt, t_final, seed, options);
}

DensityState empirical_density(const PathEnsemble& ensemble, const Grid1D& grid, bool absorbing) {
  if (ensemble.terminal.empty()) throw DomainError("empirical_density: empty ensemble");
  const double h = grid.h();
  DensityState out;
  out.values.setZero(static_cast<Eigen::Index>(grid.size()));
  out.representation = Representation::p;
  out.time = ensemble.t_final;

  const int lo = absorbing ? grid.first_unknown() : grid.j_min();
  const int hi = absorbing ? grid.last_unknown() : grid.j_max();
  std::size_t counted = 0;
  for (std::size_t i = 0; i < ensemble.terminal.size(); ++i) {
    if (absorbing && ensemble.status[i] != PathStatus::alive) continue;
    const double x = ensemble.terminal[i];
    if (!std::isfinite(x)) continue;
    int j = static_cast<int>(std::lround(x / h));
    if (absorbing) j = std::clamp(j, lo, hi);
    if (j < lo || j > hi) continue;
    out.values[static_cast<Eigen::Index>(grid.index(j))] += 1.0;
    ++counted;
  }
  const double denom = absorbing ? static_cast<double>(ensemble.terminal.size()) : static_cast<double>(counted);
  if (denom > 0.0) out.values /= denom * h;
  return out;
}

std::vector<double> sample_gaussian_initial(std::size_t n, double k, std::uint64_t seed) {
  Rng rng = substream(seed, ~std::uint64_t{0});
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 / k));
  std::vector<double> out(n);
  for (auto& v : out) v = normal(rng);
  return out;
}

}  // namespace nlfpe
