#include "doctest.h"

#include <cmath>
#include <numbers>

#include "nlfpe/errors.hpp"
#include "nlfpe/scheme_symmetric.hpp"
#include "nlfpe/special_functions.hpp"
#include "nlfpe/stable_process.hpp"

using namespace nlfpe;

namespace {

StableNoiseModel pure_jump(double alpha, ScalarFn sigma, ScalarFn d1, ScalarFn d2) {
  StableNoiseModel m;
  m.sigma = std::move(sigma);
  m.sigma_d1 = std::move(d1);
  m.sigma_d2 = std::move(d2);
  m.alpha = alpha;
  return m;
}

StableNoiseModel unit_sigma(double alpha) {
  return pure_jump(alpha, [](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; });
}

StableNoiseModel periodic_sigma(double alpha) {
  return pure_jump(
      alpha, [](double x) { return 2.0 + std::sin(x); }, [](double x) { return std::cos(x); },
      [](double x) { return -std::sin(x); });
}

// Right-hand side of the scheme evaluated term by term for one state vector,
// written without the matrix or the weight helper.
Eigen::VectorXd direct_rhs(const StableNoiseModel& m, const Grid1D& grid, const Eigen::VectorXd& full_u) {
  const auto cf = build_coefficients(m, grid);
  const double h = grid.h();
  const int J = grid.J();
  const double c = symmetric_levy_constant(m.alpha);
  const auto U = [&](int j) -> double {
    if (j < grid.j_min() || j > grid.j_max()) return 0.0;
    if (grid.kind() == BoundaryKind::absorbing && std::abs(j) >= J) return 0.0;
    if (grid.kind() == BoundaryKind::natural && std::abs(j) > J) return 0.0;
    return full_u[static_cast<Eigen::Index>(grid.index(j))];
  };
  Eigen::VectorXd out(static_cast<Eigen::Index>(grid.unknown_count()));
  for (int j = grid.first_unknown(); j <= grid.last_unknown(); ++j) {
    const auto i = static_cast<Eigen::Index>(grid.index(j));
    double r = cf.C_h[i] * (U(j - 1) - 2.0 * U(j) + U(j + 1)) / (h * h);
    const double M = cf.M[i];
    r += M * (M < 0.0 ? (U(j) - U(j - 1)) / h : (U(j + 1) - U(j)) / h);
    r += (grid.kind() == BoundaryKind::absorbing ? cf.N_tilde[i] : cf.N[i]) * U(j);
    double sum = 0.0;
    for (int k = -J - j; k <= J - j; ++k) {
      if (k == 0) continue;
      const double w = (k == -J - j || k == J - j) ? 0.5 : 1.0;
      sum += w * (U(j + k) - U(j)) / std::pow(std::abs(k * h), 1.0 + m.alpha);
    }
    r += c * h * cf.sigma_abs_alpha[i] * sum;
    out[i - static_cast<Eigen::Index>(grid.unknown_offset())] = r;
  }
  return out;
}

DensityState random_state(const Grid1D& grid, std::uint64_t seed, Representation rep) {
  Rng rng = substream(seed, 0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto s = sample_density(grid, [&](double) { return u01(rng); });
  s.representation = rep;
  return s;
}

}  // namespace

TEST_SUITE("scheme_symmetric") {

TEST_CASE("stability bound reference values") {
  CHECK(std::abs(stability_bound(1.5, 0.01, 3.0).dt_max - 1.028456603056011283692120856786293361822e-4) <
        1e-12 * 1.0285e-4);
  CHECK(std::abs(stability_bound(1.0, 0.01, 1.0).dt_max - 0.01 * std::numbers::pi / 5.0) < 1e-15);
  for (double a : {0.5, 1.0, 1.5}) {
    const double ratio = stability_bound(a, 0.02, 6.0).dt_max / stability_bound(a, 0.02, 3.0).dt_max;
    CHECK(std::abs(ratio - std::pow(2.0, -a)) < 1e-14);
  }
  CHECK_THROWS_AS(stability_bound(2.0, 0.1, 1.0), DomainError);
  CHECK_THROWS_AS(stability_bound(1.0, 0.0, 1.0), DomainError);
}

TEST_CASE("nonlocal weights halve both ends and skip k = 0") {
  const auto grid = Grid1D::absorbing(4);
  const auto w = nonlocal_weights(grid, 1);
  REQUIRE(w.size() == 9);
  CHECK(w.front() == 0.5);
  CHECK(w.back() == 0.5);
  CHECK(w[5] == 0.0);  // k = 0 sits at -k_lo = 5
  CHECK(w[1] == 1.0);
}

TEST_CASE("assembly matches a direct evaluation of the scheme") {
  for (const auto& grid : {Grid1D::absorbing(8), Grid1D::natural(2.0, 0.125)}) {
    auto m = example1_model(1.5, 0.0);
    m.g = [](double x) { return 0.4 + 0.1 * std::sin(x); };
    m.g_d1 = [](double x) { return 0.1 * std::cos(x); };
    m.g_d2 = [](double x) { return -0.1 * std::sin(x); };
    const auto R = assemble(m, grid);
    for (std::size_t col = 0; col < grid.unknown_count(); ++col) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.unknown_count()));
      e[static_cast<Eigen::Index>(col)] = 1.0;
      const Eigen::VectorXd full = extend_from_unknowns(grid, e);
      const Eigen::VectorXd direct = direct_rhs(m, grid, full);
      CHECK((R.matrix.col(static_cast<Eigen::Index>(col)) - direct).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }
}

TEST_CASE("M-matrix sign pattern without drift and Gaussian noise") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    for (const auto& grid : {Grid1D::absorbing(16), Grid1D::natural(2.0, 1.0 / 16)}) {
      const auto R = assemble(periodic_sigma(alpha), grid).matrix;
      for (Eigen::Index r = 0; r < R.rows(); ++r) {
        for (Eigen::Index c = 0; c < R.cols(); ++c) {
          if (r == c) {
            CHECK(R(r, c) <= 0.0);
          } else {
            CHECK(R(r, c) >= 0.0);
          }
        }
        CHECK(R.row(r).sum() <= 1e-12 * std::abs(R(r, r)));
      }
    }
  }
}

TEST_CASE("constant data on a natural grid only feels the far field") {
  const auto grid = Grid1D::natural(4.0, 0.125);
  const auto R = assemble(unit_sigma(0.8), grid).matrix;
  const Eigen::VectorXd r = R * Eigen::VectorXd::Ones(R.rows());
  const double tail = symmetric_levy_constant(0.8) * (2.0 / 0.8) * std::pow(4.0, -0.8);
  for (int j = -16; j <= 16; ++j) {
    CHECK(std::abs(r[static_cast<Eigen::Index>(j - grid.first_unknown())]) <= tail);
  }
}

TEST_CASE("upwinding follows the sign of M") {
  StableNoiseModel m = unit_sigma(1.0);
  m.f = [](double x) { return x; };  // M = -x
  m.f_d1 = [](double) { return 1.0; };
  const auto grid = Grid1D::absorbing(4);
  const auto R = assemble(m, grid).matrix;
  const auto Rz = assemble(unit_sigma(1.0), grid).matrix;
  const Eigen::MatrixXd D = R - Rz;
  // j = 2: M < 0, backward difference touches j - 1; j = -2: M > 0, forward
  const auto at = [&](int r, int c) { return D(r - grid.first_unknown(), c - grid.first_unknown()); };
  CHECK(at(2, 1) > 0.0);
  CHECK(at(2, 3) == 0.0);
  CHECK(at(-2, -1) > 0.0);
  CHECK(at(-2, -3) == 0.0);
  // j = 0: M = 0 takes the forward branch with a zero coefficient
  CHECK(at(0, 1) == 0.0);
  CHECK(at(0, -1) == 0.0);
}

TEST_CASE("explicit and implicit steps with R = 0 are the identity") {
  const auto grid = Grid1D::absorbing(8);
  SemiDiscreteOperator R;
  R.grid = grid;
  R.matrix = Eigen::MatrixXd::Zero(15, 15);
  const auto U = random_state(grid, 3, Representation::u);
  CHECK((step_explicit(U, R, 0.1).values - U.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK((step_implicit(U, R, 0.1).values - U.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("non-finite output raises an integration error with the step index") {
  const auto grid = Grid1D::absorbing(4);
  auto R = assemble(unit_sigma(1.0), grid);
  R.matrix(2, 2) = std::numeric_limits<double>::quiet_NaN();
  const auto U = random_state(grid, 3, Representation::u);
  try {
    step_explicit(U, R, 0.01, 17);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.step() == 17);
  }
}

TEST_CASE("singular implicit system is reported") {
  const Eigen::MatrixXd R = Eigen::MatrixXd::Identity(5, 5) * 10.0;
  CHECK_THROWS_AS(ImplicitEuler(R, 0.1), SingularSystemError);
}

TEST_CASE("explicit step halving shows second-order one-step differences") {
  const auto grid = Grid1D::absorbing(16);
  const auto R = assemble(example1_model(1.5, 0.0), grid);
  auto U = sample_density(grid, [](double x) { return std::exp(-10 * x * x); });
  U.representation = Representation::u;
  std::vector<double> diffs;
  for (double dt = 1e-3; dt > 1e-3 / 17; dt /= 2) {
    const auto one = step_explicit(U, R, dt);
    const auto two = step_explicit(step_explicit(U, R, dt / 2), R, dt / 2);
    diffs.push_back((one.values - two.values).cwiseAbs().maxCoeff());
  }
  for (std::size_t i = 1; i < diffs.size(); ++i) CHECK(std::abs(std::log2(diffs[i - 1] / diffs[i]) - 2.0) < 0.05);
}

TEST_CASE("implicit and explicit steps agree to second order") {
  const auto grid = Grid1D::absorbing(16);
  const auto R = assemble(example1_model(0.5, 0.3), grid);
  auto U = sample_density(grid, [](double x) { return std::exp(-10 * x * x); });
  U.representation = Representation::u;
  double prev = 0.0;
  for (double dt : {1e-4, 5e-5, 2.5e-5}) {
    const double d = (step_explicit(U, R, dt).values - step_implicit(U, R, dt).values).cwiseAbs().maxCoeff();
    if (prev > 0.0) CHECK(std::abs(std::log2(prev / d) - 2.0) < 0.1);
    prev = d;
  }
}

TEST_CASE("explicit stepping below the bound keeps random states in range") {
  for (double alpha : {0.5, 1.0, 1.5}) {
    const auto grid = Grid1D::absorbing(32);
    const auto R = assemble(periodic_sigma(alpha), grid);
    const double dt = 0.9 * stability_bound(alpha, grid.h(), 3.0).dt_max;
    for (std::uint64_t s = 0; s < 10; ++s) {
      auto U = random_state(grid, s, Representation::u);
      const double top = U.values.maxCoeff();
      std::vector<DensityState> series{U};
      for (int n = 0; n < 50; ++n) series.push_back(U = step_explicit(U, R, dt, static_cast<std::size_t>(n)));
      CHECK(check_max_principle(series, grid, {0.0, top}).ok());
    }
  }
}

TEST_CASE("implicit stepping far above the bound stays bounded and nonnegative") {
  const auto grid = Grid1D::absorbing(32);
  const auto R = assemble(periodic_sigma(1.5), grid);
  const double dt = 10.0 * stability_bound(1.5, grid.h(), 3.0).dt_max;
  auto U = random_state(grid, 1, Representation::u);
  const double top = U.values.maxCoeff();
  std::vector<DensityState> series{U};
  for (int n = 0; n < 50; ++n) series.push_back(U = step_implicit(U, R, dt));
  CHECK(check_max_principle(series, grid, {0.0, top}).ok());
}

TEST_CASE("fault injection: a negated row is caught at its node") {
  const auto grid = Grid1D::absorbing(16);
  auto R = assemble(periodic_sigma(1.0), grid);
  const int node = 5;
  const auto row = static_cast<Eigen::Index>(node - grid.first_unknown());
  R.matrix.row(row) *= -1.0;
  const double dt = 0.9 * stability_bound(1.0, grid.h(), 3.0).dt_max;
  auto U = random_state(grid, 4, Representation::u);
  const double top = U.values.maxCoeff();
  std::vector<DensityState> series{U};
  for (int n = 0; n < 20; ++n) series.push_back(U = step_explicit(U, R, dt));
  const auto rep = check_max_principle(series, grid, {0.0, top});
  REQUIRE(!rep.ok());
  CHECK(rep.violations.front().node == node);
}

TEST_CASE("symmetric data stay symmetric") {
  const auto grid = Grid1D::absorbing(32);
  const auto init = sample_density(grid, [](double x) { return gaussian_initial_density(x); });
  for (auto stepper : {Stepper::explicit_euler, Stepper::implicit_euler}) {
    const auto out = solve(unit_sigma(1.2), grid, init, 0.01, 0.2, 1e-4, stepper);
    const auto& p = out.back().values;
    double asym = 0.0;
    for (int j = 0; j <= grid.j_max(); ++j) {
      asym = std::max(asym, std::abs(p[static_cast<Eigen::Index>(grid.index(j))] -
                                     p[static_cast<Eigen::Index>(grid.index(-j))]));
    }
    CHECK(asym <= 1e-12);
  }
}

TEST_CASE("absorbed mass is nonincreasing") {
  const auto grid = Grid1D::absorbing(32);
  const auto m = example1_model(1.5, 0.0);
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng = substream(s, 1);
    std::uniform_real_distribution<double> c(-0.6, 0.6);
    std::uniform_real_distribution<double> k(5.0, 60.0);
    const double c1 = c(rng), c2 = c(rng), k1 = k(rng), k2 = k(rng);
    const auto init = sample_density(grid, [&](double x) {
      return std::exp(-k1 * (x - c1) * (x - c1)) + 0.5 * std::exp(-k2 * (x - c2) * (x - c2));
    });
    std::vector<double> times;
    for (int i = 1; i < 19; ++i) times.push_back(0.01 * i);
    const auto out = solve(m, grid, init, 0.0, 0.19, 1e-3, Stepper::implicit_euler, times);
    for (std::size_t i = 1; i < out.size(); ++i) {
      CHECK(trapezoid_mass(grid, out[i].values) <= trapezoid_mass(grid, out[i - 1].values) + 1e-12);
    }
  }
}

TEST_CASE("solve records the requested snapshots") {
  const auto grid = Grid1D::absorbing(8);
  const auto init = sample_density(grid, [](double x) { return gaussian_initial_density(x); });
  const auto out = solve(example1_model(1.5, 0.0), grid, init, 0.01, 0.2, 0.01, Stepper::implicit_euler, {0.1, 0.1});
  REQUIRE(out.size() == 3);
  CHECK(out.front().time == 0.01);
  CHECK(std::abs(out[1].time - 0.1) < 1e-12);
  CHECK(out.back().time == 0.2);
  CHECK(out.back().representation == Representation::p);
  CHECK_THROWS_AS(solve(example1_model(1.5, 0.0), grid, init, 0.01, 0.2, 0.01, Stepper::implicit_euler, {0.5}),
                  DomainError);
}

}
