#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "nlfpe/errors.hpp"
#include "nlfpe/special_functions.hpp"

using namespace nlfpe;

TEST_SUITE("special_functions") {

TEST_CASE("gamma known values") {
  CHECK(gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(gamma_fn(0.5) - std::sqrt(std::numbers::pi)) < 1e-12 * std::sqrt(std::numbers::pi));
  const double ref = 0.9064024770554770779826712889669180007488;
  CHECK(std::abs(gamma_fn(1.25) - ref) < 1e-12 * ref);
  CHECK(std::abs(gamma_fn(5.0) - 24.0) < 1e-12 * 24.0);
}

TEST_CASE("gamma recurrence") {
  for (double x = 0.1; x <= 10.0; x += 0.037) {
    const double lhs = gamma_fn(x + 1.0);
    CHECK(std::abs(lhs - x * gamma_fn(x)) <= 1e-10 * lhs);
  }
}

TEST_CASE("gamma rejects non-positive and non-finite arguments") {
  CHECK_THROWS_AS(gamma_fn(0.0), DomainError);
  CHECK_THROWS_AS(gamma_fn(-1.5), DomainError);
  CHECK_THROWS_AS(gamma_fn(std::nan("")), DomainError);
  CHECK_THROWS_AS(gamma_fn(INFINITY), DomainError);
}

TEST_CASE("zeta known and reference values") {
  CHECK(std::abs(riemann_zeta(0.0) + 0.5) < 1e-12);
  CHECK(std::abs(riemann_zeta(-1.0) + 1.0 / 12.0) < 1e-12);
  CHECK(std::abs(riemann_zeta(-0.5) - (-0.2078862249773545660173067253970493022263)) < 1e-10);
  CHECK(std::abs(riemann_zeta(0.5) - (-1.460354508809586812889499152515298012467)) < 1e-10);
  CHECK(std::abs(riemann_zeta(-2.5) - 0.008516928777850330542358567028344486936276) < 1e-10);
  CHECK(std::abs(riemann_zeta(0.3) - (-0.9045592572539839682268451720067273840098)) < 1e-10);
  CHECK(std::abs(riemann_zeta(-1.7) - (-0.0125052079034722789816856644152601163737)) < 1e-10);
  CHECK(std::abs(riemann_zeta(-2.0)) < 1e-12);
}

TEST_CASE("zeta is continuous across zero") {
  const double left = riemann_zeta(-1e-6);
  const double right = riemann_zeta(1e-6);
  CHECK(std::abs(left + 0.5) < 1e-6);
  CHECK(std::abs(right + 0.5) < 1e-6);
  CHECK(std::abs(left - right) < 1e-5);
}

TEST_CASE("zeta domain") {
  CHECK_THROWS_AS(riemann_zeta(1.0), DomainError);
  CHECK_THROWS_AS(riemann_zeta(-3.0), DomainError);
  CHECK_THROWS_AS(riemann_zeta(1.5), DomainError);
}

TEST_CASE("stable constants at alpha = 1") {
  const auto k = stable_constants(1.0, 0.0);
  CHECK(std::abs(k.c_sym - 1.0 / std::numbers::pi) < 1e-14);
  CHECK(k.c_alpha == 2.0 / std::numbers::pi);
  CHECK(std::abs(k.c_p - 1.0 / std::numbers::pi) < 1e-15);
}

TEST_CASE("stable constants at alpha = 0.5") {
  const auto k = stable_constants(0.5, 0.0);
  CHECK(std::abs(k.c_sym - 1.0 / (2.0 * std::sqrt(2.0 * std::numbers::pi))) < 1e-13);
  const auto s = stable_constants(0.5, 0.5);
  const double c_alpha = 0.3989422804014326779399460599343818684759;
  CHECK(std::abs(s.c_alpha - c_alpha) < 1e-13);
  CHECK(std::abs(s.c_p - 0.75 * c_alpha) < 1e-13);
  CHECK(std::abs(s.c_n - 0.25 * c_alpha) < 1e-13);
  CHECK(std::abs(s.c_p + s.c_n - s.c_alpha) < 1e-15);
}

TEST_CASE("c(1, 1.5) reference") {
  CHECK(std::abs(symmetric_levy_constant(1.5) - 0.2992067103010745084549595449507864013569) < 1e-13);
}

TEST_CASE("the two normalizations agree at beta = 0") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(1e-3, 2.0 - 1e-3);
  for (int i = 0; i < 200; ++i) {
    double a = u(rng);
    if (std::abs(a - 1.0) < 1e-9) a += 1e-3;
    const auto k = stable_constants(a, 0.0);
    CHECK(std::abs(k.c_sym - 0.5 * k.c_alpha) <= 1e-10);
    CHECK(k.c_sym > 0.0);
    CHECK(k.c_alpha > 0.0);
  }
}

TEST_CASE("C_alpha is smooth through alpha = 1") {
  const double at = stable_constants(1.0).c_alpha;
  CHECK(std::abs(stable_constants(1.0 - 1e-9).c_alpha - at) < 1e-8);
  CHECK(std::abs(stable_constants(1.0 + 1e-9).c_alpha - at) < 1e-8);
}

TEST_CASE("stable constants domain") {
  CHECK_THROWS_AS(stable_constants(0.0), DomainError);
  CHECK_THROWS_AS(stable_constants(2.0), DomainError);
  CHECK_THROWS_AS(stable_constants(1.5, 1.0), DomainError);
  CHECK_THROWS_AS(stable_constants(1.5, -1.2), DomainError);
}

TEST_CASE("Bernoulli constant") { CHECK(kBernoulliB2 == 1.0 / 6.0); }

}
