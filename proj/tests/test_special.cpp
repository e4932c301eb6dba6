#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "frac_talenti/kernels.hpp"
#include "frac_talenti/special.hpp"

using namespace frac_talenti;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("log_gamma values", "[special]") {
  CHECK_THAT(log_gamma(1.0), WithinAbs(0.0, 1e-15));
  CHECK_THAT(log_gamma(0.5), WithinRel(0.5723649429247001, 1e-13));
  CHECK_THAT(log_gamma(4.0), WithinRel(std::log(6.0), 1e-13));
  CHECK_THROWS_AS(log_gamma(0.0), domain_error);
  CHECK_THROWS_AS(log_gamma(-2.5), domain_error);
}

TEST_CASE("log_gamma recurrence on [0.5, 20]", "[special]") {
  for (int i = 0; i <= 100; ++i) {
    const double x = 0.5 + 19.5 * i / 100.0;
    const double gap = log_gamma(x + 1.0) - log_gamma(x) - std::log(x);
    REQUIRE(std::abs(gap) <= 1e-12);
  }
}

TEST_CASE("kappa constants", "[special]") {
  CHECK_THAT(kappa(1, 0.5), WithinRel(0.15915494309189535, 1e-13));  // 1/(2 pi)
  CHECK_THAT(kappa(3, 0.5), WithinRel(0.025330295910584444, 1e-13)); // 1/(4 pi^2)
  CHECK_THAT(kappa(1, 1.0), WithinRel(0.25, 1e-13));
  CHECK_THROWS_AS(kappa(1, 0.0), domain_error);
  CHECK_THROWS_AS(kappa(0, 0.5), domain_error);
}

TEST_CASE("kappa at s = 1 against direct Gamma evaluation", "[special]") {
  for (int N : {1, 2, 3}) {
    const double direct =
        std::exp(log_gamma(0.5 * N)) / (4.0 * std::pow(pi, 0.5 * N));
    CHECK_THAT(kappa(N, 1.0), WithinRel(direct, 1e-13));
  }
}

TEST_CASE("c_constant values", "[special]") {
  CHECK_THAT(c_constant(1, 0.5), WithinRel(1.0 / pi, 1e-13));
  // Direct Gamma evaluation of s 4^s Gamma(N/2+s) / (pi^{N/2} Gamma(1-s));
  // for (2, 0.5) this is 1/(2 pi).
  CHECK_THAT(c_constant(2, 0.5), WithinRel(0.15915494309189535, 1e-13));
  CHECK_THAT(c_constant(1, 0.25), WithinRel(0.19947114020071634, 1e-13));
  CHECK_THROWS_AS(c_constant(1, 1.0), domain_error);
  CHECK_THROWS_AS(c_constant(2, 2.0), domain_error);
  CHECK_THROWS_AS(c_constant(1, -0.5), domain_error);
}

TEST_CASE("sphere measures", "[special]") {
  CHECK_THAT(sphere_measure(1), WithinRel(2.0, 1e-14));
  CHECK_THAT(sphere_measure(2), WithinRel(2.0 * pi, 1e-14));
  CHECK_THAT(sphere_measure(3), WithinRel(4.0 * pi, 1e-14));
  CHECK_THROWS_AS(sphere_measure(0), domain_error);
}

TEST_CASE("green tail integral examples", "[special]") {
  CHECK_THAT(green_tail_integral(3, 0.5, std::nullopt), WithinRel(2.0, 1e-12));
  CHECK_THAT(green_tail_integral(2, 1.0, 1.0), WithinRel(std::log(2.0), 1e-12));
  CHECK(green_tail_integral(3, 0.5, 0.0) == 0.0);
  CHECK(green_tail_integral(1, 0.75, 0.0) == 0.0);
}

TEST_CASE("green tail integral spot values", "[special]") {
  // frozen from endpoint-desingularized quadrature / incomplete-beta references
  CHECK_THAT(green_tail_integral(1, 0.75, 7.3), WithinRel(3.3300156288118214, 1e-10));
  CHECK_THAT(green_tail_integral(3, 0.25, 0.37), WithinRel(2.8421592720464179, 1e-10));
  CHECK_THAT(green_tail_integral(3, 0.75, 123456.0), WithinRel(1.6942237267933124, 1e-10));
  CHECK_THAT(green_tail_integral(1, 0.5, 3.0), WithinRel(2.6339157938496334, 1e-10));
  CHECK_THAT(green_tail_integral(2, 0.5, 9.25), WithinRel(2.5062662676252721, 1e-10));
}

TEST_CASE("green tail divergence and domain errors", "[special]") {
  CHECK_THROWS_AS(green_tail_integral(1, 0.5, std::nullopt), divergence_error);
  CHECK_THROWS_AS(green_tail_integral(1, 0.75, std::nullopt), divergence_error);
  CHECK_THROWS_AS(green_tail_integral(2, 1.0, std::nullopt), divergence_error);
  CHECK_THROWS_AS(green_tail_integral(3, 0.5, -1.0), domain_error);
  CHECK_THROWS_AS(green_tail_integral(3, 0.0, 1.0), domain_error);
}

TEST_CASE("green tail is strictly increasing in r0", "[special]") {
  for (auto [N, s] : {std::pair{1, 0.25}, {1, 0.75}, {2, 0.5}, {3, 0.5}, {3, 1.5}}) {
    double prev = 0.0;
    for (double r0 : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 50.0, 1e4}) {
      const double v = green_tail_integral(N, s, r0);
      REQUIRE(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("green tail at large r0 approaches the full integral", "[special]") {
  // independent route: finite-r0 quadrature vs the Beta identity
  const double full = green_tail_integral(3, 0.5, std::nullopt);
  CHECK_THAT(green_tail_integral(3, 0.5, 1e8), WithinAbs(full, 1e-3));
  CHECK_THAT(green_tail_integral(3, 0.5, 1e12), WithinAbs(full, 1e-5));
}

TEST_CASE("ball volume", "[special]") {
  CHECK_THAT(ball_volume(1, 1.0), WithinRel(2.0, 1e-14));
  CHECK_THAT(ball_volume(2, 1.0), WithinRel(pi, 1e-14));
  CHECK_THAT(ball_volume(3, 0.5), WithinRel(4.0 / 3.0 * pi * 0.125, 1e-14));
}

TEST_CASE("problem params validation and log branch", "[special]") {
  ProblemParams p{1, 0.5, Normalization::GreenLimit};
  CHECK(p.log_branch());
  CHECK(ProblemParams{2, 1.0}.log_branch());
  CHECK_FALSE(ProblemParams{3, 0.5}.log_branch());
  CHECK_FALSE(ProblemParams{1, 0.5 + 1e-9}.log_branch());
  CHECK_THROWS_AS((ProblemParams{0, 0.5}.validate()), domain_error);
  CHECK_THROWS_AS((ProblemParams{1, -1.0}.validate()), domain_error);
}
