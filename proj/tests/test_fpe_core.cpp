#include "doctest.h"

#include <cmath>
#include <numbers>

#include "nlfpe/errors.hpp"
#include "nlfpe/fpe_core.hpp"
#include "nlfpe/stable_process.hpp"

using namespace nlfpe;

namespace {

TestFunction bump(double center, double width) {
  const double a = 1.0 / (2.0 * width * width);
  TestFunction t;
  t.value = [=](double x) { return std::exp(-a * (x - center) * (x - center)); };
  t.d1 = [=](double x) { return -2.0 * a * (x - center) * std::exp(-a * (x - center) * (x - center)); };
  t.d2 = [=](double x) {
    const double y = x - center;
    return (4.0 * a * a * y * y - 2.0 * a) * std::exp(-a * y * y);
  };
  return t;
}

template <class F>
double integrate(const F& fn, double lo, double hi, int n) {
  const double dx = (hi - lo) / n;
  double s = 0.0;
  for (int i = 0; i <= n; ++i) s += (i == 0 || i == n ? 0.5 : 1.0) * fn(lo + i * dx);
  return s * dx;
}

StableNoiseModel constant_sigma(double alpha, double value) {
  StableNoiseModel m;
  m.sigma = [value](double) { return value; };
  m.sigma_d1 = [](double) { return 0.0; };
  m.sigma_d2 = [](double) { return 0.0; };
  m.alpha = alpha;
  return m;
}

double relative_defect(double lhs, double rhs) { return std::abs(lhs - rhs) / (std::abs(lhs) + 1.0); }

}  // namespace

TEST_SUITE("fpe_core") {

TEST_CASE("transform with sigma = 1 is the identity") {
  const auto grid = Grid1D::absorbing(8);
  const auto m = constant_sigma(1.3, 1.0);
  const auto p = sample_density(grid, [](double x) { return 1.0 + x * x; });
  const auto u = transform(p, grid, m, Representation::u);
  CHECK(u.representation == Representation::u);
  CHECK((u.values - p.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("transform with sigma = 2, alpha = 1") {
  const auto grid = Grid1D::natural(1.0, 0.25);
  const auto m = constant_sigma(1.0, 2.0);
  const auto p = sample_density(grid, [](double) { return 1.0; });
  const auto u = transform(p, grid, m, Representation::u);
  for (Eigen::Index i = 0; i < u.values.size(); ++i) CHECK(u.values[i] == 2.0);
}

TEST_CASE("transform round trip") {
  const auto grid = Grid1D::absorbing(32);
  const auto m = example1_model(1.5, 0.0);
  Rng rng = substream(8, 0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const auto p = sample_density(grid, [&](double) { return u01(rng); });
  const auto back = transform(transform(p, grid, m, Representation::u), grid, m, Representation::p);
  CHECK((back.values - p.values).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("transform rejects a vanishing sigma") {
  const auto grid = Grid1D::natural(1.0, 0.5);
  StableNoiseModel m;
  m.sigma = [](double x) { return x; };
  m.alpha = 1.0;
  const auto p = sample_density(grid, [](double) { return 1.0; });
  CHECK_THROWS_AS(transform(p, grid, m, Representation::u), DomainError);
}

TEST_CASE("coefficients for constant sigma and linear drift") {
  auto m = constant_sigma(0.7, 1.7);
  m.f = [](double x) { return -0.2 * x; };
  m.f_d1 = [](double) { return -0.2; };
  const auto grid = Grid1D::absorbing(8);
  const auto cf = build_coefficients(m, grid);
  for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
    const auto i = static_cast<Eigen::Index>(grid.index(j));
    CHECK(std::abs(cf.M[i] - 0.2 * grid.x(j)) < 1e-14);
    CHECK(std::abs(cf.N[i] - 0.2) < 1e-14);
  }
}

TEST_CASE("coefficients for constant g and sigma at alpha = 1") {
  auto m = constant_sigma(1.0, 1.0);
  m.g = [](double) { return 0.5; };
  m.g_d1 = [](double) { return 0.0; };
  m.g_d2 = [](double) { return 0.0; };
  const auto grid = Grid1D::absorbing(10);
  const auto cf = build_coefficients(m, grid);
  const double h = grid.h();
  for (Eigen::Index i = 0; i < cf.M.size(); ++i) {
    CHECK(std::abs(cf.M[i]) < 1e-15);
    CHECK(std::abs(cf.N[i]) < 1e-15);
    CHECK(std::abs(cf.C_h[i] - (0.125 + h / (2.0 * std::numbers::pi))) < 1e-14);
  }
}

TEST_CASE("analytic and finite-difference coefficients agree") {
  const auto analytic = example1_model(0.5, 0.0);
  StableNoiseModel fd;
  fd.f = analytic.f;
  fd.sigma = analytic.sigma;
  fd.alpha = 0.5;
  const auto grid = Grid1D::absorbing(16);
  const auto a = build_coefficients(analytic, grid);
  const auto b = build_coefficients(fd, grid);
  for (int j = grid.first_unknown(); j <= grid.last_unknown(); ++j) {
    const auto i = static_cast<Eigen::Index>(grid.index(j));
    CHECK(std::abs(a.M[i] - b.M[i]) < 1e-6);
    CHECK(std::abs(a.N[i] - b.N[i]) < 1e-6);
    CHECK(std::abs(a.N_tilde[i] - b.N_tilde[i]) < 1e-6);
  }
}

TEST_CASE("analytic and finite-difference coefficients agree with Gaussian noise") {
  auto analytic = example1_model(1.5, 0.0);
  analytic.g = [](double x) { return 0.5 + 0.1 * std::cos(x); };
  analytic.g_d1 = [](double x) { return -0.1 * std::sin(x); };
  analytic.g_d2 = [](double x) { return -0.1 * std::cos(x); };
  StableNoiseModel fd;
  fd.f = analytic.f;
  fd.g = analytic.g;
  fd.sigma = analytic.sigma;
  fd.alpha = 1.5;
  const auto grid = Grid1D::absorbing(16);
  const auto a = build_coefficients(analytic, grid);
  const auto b = build_coefficients(fd, grid);
  CHECK((a.M - b.M).cwiseAbs().maxCoeff() < 1e-6);
  CHECK((a.N - b.N).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("zeta correction keeps C_h above g^2 / 2") {
  for (double alpha : {0.3, 0.5, 1.0, 1.5, 1.9}) {
    auto m = example1_model(alpha, 0.5);
    const auto grid = Grid1D::absorbing(20);
    const auto cf = build_coefficients(m, grid);
    for (Eigen::Index i = 0; i < cf.C_h.size(); ++i) CHECK(cf.C_h[i] >= 0.125);
  }
}

TEST_CASE("N_tilde is defined only at interior absorbing nodes") {
  const auto grid = Grid1D::absorbing(4);
  const auto cf = build_coefficients(example1_model(1.0, 0.0), grid);
  for (int j = grid.j_min(); j <= grid.j_max(); ++j) {
    const bool defined = std::isfinite(cf.N_tilde[static_cast<Eigen::Index>(grid.index(j))]);
    CHECK(defined == grid.is_unknown(j));
  }
  const auto nat = build_coefficients(example1_model(1.0, 0.0), Grid1D::natural(2.0, 0.5));
  CHECK(!std::isfinite(nat.N_tilde[0]));
}

TEST_CASE("generator kills constants") {
  TestFunction one{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  QuadratureConfig q;
  q.z_max = 1e8;
  for (double beta : {0.0, 0.5}) {
    auto m = example2_model(1.5, beta, 0.5);
    CHECK(std::abs(apply_generator(one, 0.2, m, q)) < 1e-10);
  }
}

TEST_CASE("odd test function has zero principal value at the origin") {
  TestFunction lin{[](double x) { return x; }, [](double) { return 1.0; }, [](double) { return 0.0; }};
  const auto m = constant_sigma(1.2, 1.0);
  QuadratureConfig q;
  q.support_lo = -12.0;
  q.support_hi = 12.0;
  CHECK(std::abs(apply_generator(lin, 0.0, m, q)) < 1e-14);
}

TEST_CASE("generator quadrature is converged") {
  const auto phi = bump(0.1, 0.4);
  const auto m = example1_model(0.5, 0.0);
  QuadratureConfig fine;
  fine.cells *= 10;
  const double a = apply_generator(phi, 0.3, m, {});
  const double b = apply_generator(phi, 0.3, m, fine);
  CHECK(std::abs(a - b) < 1e-5);
}

TEST_CASE("window smaller than the support is rejected") {
  const auto phi = bump(0.0, 0.3);
  const auto m = example1_model(0.5, 0.0);
  QuadratureConfig q;
  q.z_max = 2.0;
  CHECK_THROWS_AS(apply_generator(phi, 0.0, m, q), PreconditionError);
}

TEST_CASE("constant sigma: symmetric adjoint equals the generator on even data") {
  const auto v = bump(0.0, 0.5);
  const auto m = constant_sigma(1.3, 1.0);
  CHECK(std::abs(apply_adjoint_sym(v, 0.0, m, {}) - apply_generator(v, 0.0, m, {})) < 1e-10);
}

TEST_CASE("constant v, constant sigma, no drift: adjoint vanishes") {
  TestFunction one{[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
  auto m = constant_sigma(0.8, 2.0);
  QuadratureConfig q;
  q.support_lo = -1e9;
  q.support_hi = 1e9;
  q.z_max = 1e10;
  m.beta = 0.0;
  const double sym = apply_adjoint_sym(one, 0.0, m, q);
  CHECK(std::abs(sym) < 1e-6);
  m.beta = 0.5;
  m.monotonicity = SigmaMonotonicity::positive_increasing;
  CHECK(std::abs(apply_adjoint_asym(one, 0.0, m, q)) < 1e-6);
}

TEST_CASE("asymmetric adjoint at beta = 0 matches the symmetric one") {
  const auto v = bump(0.2, 0.5);
  auto m = example2_model(0.5, 0.0, 0.5);
  for (double x : {-0.5, 0.0, 0.7}) {
    CHECK(std::abs(apply_adjoint_asym(v, x, m, {}) - apply_adjoint_sym(v, x, m, {})) < 1e-6);
  }
}

TEST_CASE("asymmetric adjoint requires a declared and respected sign") {
  const auto v = bump(0.0, 0.5);
  auto m = example1_model(0.5, 0.0);
  m.beta = 0.5;
  CHECK_THROWS_AS(apply_adjoint_asym(v, 0.0, m, {}), PreconditionError);
  StableNoiseModel s;
  s.sigma = [](double x) { return std::atan(x) + 0.5; };
  s.alpha = 0.5;
  s.beta = 0.5;
  s.monotonicity = SigmaMonotonicity::positive_increasing;
  CHECK_THROWS_AS(apply_adjoint_asym(v, 0.0, s, {}), PreconditionError);
}

TEST_CASE("adjointness of the symmetric operator") {
  const auto phi = bump(0.3, 0.45);
  const auto v = bump(-0.2, 0.5);
  for (double alpha : {0.5, 1.0, 1.5}) {
    auto m = example1_model(alpha, 0.5);
    const double lhs = integrate([&](double x) { return apply_generator(phi, x, m, {}) * v.value(x); }, -4, 4, 400);
    const double rhs = integrate([&](double x) { return phi.value(x) * apply_adjoint_sym(v, x, m, {}); }, -4, 4, 400);
    CAPTURE(alpha);
    CHECK(relative_defect(lhs, rhs) <= 1e-4);
  }
}

TEST_CASE("adjointness of the skewed operator") {
  const auto phi = bump(0.3, 0.45);
  const auto v = bump(-0.2, 0.5);
  for (double alpha : {0.5, 1.0, 1.5}) {
    for (double beta : {-0.5, 0.5}) {
      for (bool negative : {false, true}) {
        auto m = example2_model(alpha, beta, 0.5);
        if (negative) {
          m.sigma = [](double x) { return -std::numbers::pi - std::atan(x); };
          m.sigma_d1 = [](double x) { return -1.0 / (1.0 + x * x); };
          m.sigma_d2 = [](double x) { return 2.0 * x / ((1.0 + x * x) * (1.0 + x * x)); };
          m.monotonicity = SigmaMonotonicity::negative_decreasing;
        }
        const double lhs =
            integrate([&](double x) { return apply_generator(phi, x, m, {}) * v.value(x); }, -4, 4, 400);
        const double rhs =
            integrate([&](double x) { return phi.value(x) * apply_adjoint_asym(v, x, m, {}); }, -4, 4, 400);
        CAPTURE(alpha);
        CAPTURE(beta);
        CAPTURE(negative);
        CHECK(relative_defect(lhs, rhs) <= 1e-4);
      }
    }
  }
}

}
