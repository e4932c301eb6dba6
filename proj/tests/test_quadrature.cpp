#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "frac_talenti/kernels.hpp"
#include "frac_talenti/quadrature.hpp"

using namespace frac_talenti;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
constexpr double pi = std::numbers::pi;

double rule_sum(const QuadratureRule& r) {
  double s = 0.0;
  for (double w : r.weights) s += w;
  return s;
}
}  // namespace

TEST_CASE("gauss-legendre basics", "[quadrature]") {
  const auto r1 = gauss_legendre(1);
  REQUIRE(r1.nodes.size() == 1);
  CHECK_THAT(r1.nodes[0], WithinAbs(0.0, 1e-15));
  CHECK_THAT(r1.weights[0], WithinRel(2.0, 1e-14));

  const auto r2 = gauss_legendre(2);
  CHECK_THAT(r2.nodes[0], WithinAbs(-0.5773502691896257, 1e-14));
  CHECK_THAT(r2.nodes[1], WithinAbs(+0.5773502691896257, 1e-14));
  CHECK_THAT(r2.weights[0], WithinRel(1.0, 1e-13));
  CHECK_THAT(r2.weights[1], WithinRel(1.0, 1e-13));

  // degree-5 exactness with n = 3: int_{-1}^{1} x^4 dx = 2/5
  const auto r3 = gauss_legendre(3);
  double acc = 0.0;
  for (std::size_t i = 0; i < r3.nodes.size(); ++i)
    acc += r3.weights[i] * std::pow(r3.nodes[i], 4);
  CHECK_THAT(acc, WithinRel(0.4, 1e-13));

  CHECK_THROWS_AS(gauss_legendre(0), domain_error);
  CHECK_THROWS_AS(gauss_legendre(513), domain_error);
}

TEST_CASE("gauss-legendre polynomial exactness at larger n", "[quadrature]") {
  for (int n : {8, 33, 128, 512}) {
    const auto r = gauss_legendre(n);
    // int x^{2m} = 2/(2m+1) for the largest exact even power
    const int m = n - 1;
    double acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      acc += r.weights[i] * std::pow(r.nodes[i], 2 * m);
    CHECK_THAT(acc, WithinRel(2.0 / (2 * m + 1), 5e-13));
  }
}

TEST_CASE("gauss-jacobi weight sums", "[quadrature]") {
  CHECK_THAT(rule_sum(gauss_jacobi(8, -0.5, -0.5)), WithinRel(pi, 1e-12));
  CHECK_THAT(rule_sum(gauss_jacobi(8, 0.0, 0.0)), WithinRel(2.0, 1e-12));
  CHECK_THAT(rule_sum(gauss_jacobi(8, -0.5, 0.0)), WithinRel(2.0 * std::sqrt(2.0), 1e-12));
  CHECK_THROWS_AS(gauss_jacobi(8, -1.0, 0.0), domain_error);
  CHECK_THROWS_AS(gauss_jacobi(8, 0.0, -1.5), domain_error);
  CHECK_THROWS_AS(gauss_jacobi(0, 0.0, 0.0), domain_error);
}

TEST_CASE("gauss-jacobi weight sums against adaptive integration", "[quadrature]") {
  for (auto [a, b] : {std::pair{-0.5, -0.25}, {0.75, -0.5}, {-0.4, 1.5}}) {
    const double ref = adaptive_1d(
        [a = a, b = b](double x) { return std::pow(1.0 - x, a) * std::pow(1.0 + x, b); }, -1.0,
        1.0, 1e-11, {-1.0, 1.0});
    CHECK_THAT(rule_sum(gauss_jacobi(16, a, b)), WithinRel(ref, 1e-10));
  }
}

TEST_CASE("gauss-jacobi polynomial exactness", "[quadrature]") {
  // int (1-x)^{-1/2} x^k dx, k <= 2n-1, against adaptive reference
  const auto r = gauss_jacobi(6, -0.5, 0.0);
  for (int k : {0, 3, 7, 11}) {
    double acc = 0.0;
    for (std::size_t i = 0; i < r.nodes.size(); ++i)
      acc += r.weights[i] * std::pow(r.nodes[i], k);
    const double ref = adaptive_1d(
        [k](double x) { return std::pow(1.0 - x, -0.5) * std::pow(x, k); }, -1.0, 1.0, 1e-12,
        {1.0});
    CHECK_THAT(acc, WithinRel(ref, 1e-11));
  }
}

TEST_CASE("adaptive_1d examples", "[quadrature]") {
  CHECK_THAT(adaptive_1d([](double x) { return x * x; }, 0.0, 1.0, 1e-10, {}),
             WithinRel(1.0 / 3.0, 1e-10));
  CHECK_THAT(adaptive_1d([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0,
                         1e-10, {0.3}),
             WithinRel(2.7687651680784833, 1e-9));
  CHECK_THAT(adaptive_1d([](double x) { return std::log(1.0 / x); }, 0.0, 1.0, 1e-10, {}),
             WithinRel(1.0, 1e-9));
}

TEST_CASE("adaptive_1d error handling", "[quadrature]") {
  CHECK_THROWS_AS(adaptive_1d([](double x) { return x; }, 1.0, 0.0, 1e-8, {}), domain_error);
  CHECK_THROWS_AS(
      adaptive_1d([](double x) { return 1.0 / std::sqrt(std::abs(x - 0.3)); }, 0.0, 1.0, 1e-13,
                  {0.3}, 100),
      convergence_error);
}

TEST_CASE("sphere rules", "[quadrature]") {
  const auto s1 = sphere_rule(1, 1);
  REQUIRE(s1.nodes.size() == 2);
  CHECK_THAT(s1.weight_sum(), WithinRel(2.0, 1e-14));

  const auto s2 = sphere_rule(2, 64);
  CHECK_THAT(s2.weight_sum(), WithinRel(2.0 * pi, 1e-13));

  const auto s3 = sphere_rule(3, 24);
  CHECK_THAT(s3.weight_sum(), WithinRel(4.0 * pi, 1e-12));
  double zz = 0.0;
  for (std::size_t i = 0; i < s3.nodes.size(); ++i)
    zz += s3.weights[i] * s3.nodes[i][2] * s3.nodes[i][2];
  CHECK_THAT(zz, WithinRel(4.0 * pi / 3.0, 1e-12));

  CHECK_THROWS_AS(sphere_rule(4, 8), domain_error);
  CHECK_THROWS_AS(sphere_rule(2, 0), domain_error);
}

TEST_CASE("sphere rule invariants: positive weights, unit nodes, measure", "[quadrature]") {
  for (auto [N, order] : {std::pair{1, 1}, {2, 17}, {3, 9}}) {
    const auto r = sphere_rule(N, order);
    for (double w : r.weights) REQUIRE(w > 0.0);
    for (const auto& p : r.nodes) REQUIRE(std::abs(p.norm() - 1.0) <= 1e-14);
    REQUIRE_THAT(r.weight_sum(), WithinRel(sphere_measure(N), 1e-12));
  }
}

TEST_CASE("ball integrate examples", "[quadrature]") {
  const ProblemParams p2{2, 0.5};
  CHECK_THAT(ball_integrate(p2, [](const Point&) { return 1.0; }, 1e-9),
             WithinRel(pi, 1e-8));

  const ProblemParams p1{1, 0.5};
  CHECK_THAT(ball_integrate(
                 p1, [](const Point& y) { return std::pow(1.0 - y.norm_sq(), -0.5); }, 1e-8),
             WithinRel(pi, 2e-7));

  const ProblemParams p3{3, 0.5};
  CHECK_THAT(ball_integrate(
                 p3, [](const Point& y) { return std::pow(1.0 - y.norm_sq(), -0.5); }, 1e-8),
             WithinRel(pi * pi, 2e-7));
}

TEST_CASE("ball integrate radial cross-check", "[quadrature]") {
  for (int N : {1, 2, 3}) {
    const ProblemParams p{N, 0.5};
    const double tol = 1e-9;
    const double via_ball =
        ball_integrate(p, [](const Point& y) { return std::exp(-y.norm_sq()); }, tol);
    const double radial = adaptive_1d(
        [N](double r) {
          return detail::radial_jacobian(N, r) * std::exp(-r * r);
        },
        0.0, 1.0, 1e-12, {});
    CHECK_THAT(via_ball, WithinAbs(sphere_measure(N) * radial, 2.0 * tol));
  }
}

TEST_CASE("ball integrate with interior singularity", "[quadrature]") {
  // int_{B_1} |x-y|^{2s-N} dy has a closed radial form around x when the
  // shifted domain is a ball; use x = 0 so the answer is omega/(2s) exactly.
  for (auto [N, s] : {std::pair{3, 0.25}, {3, 0.75}, {2, 0.5}, {1, 0.25}}) {
    const ProblemParams p{N, s};
    const Point x = Point::zero(N);
    const double val = ball_integrate(
        p, [&, s = s](const Point& y) { return std::pow(dist(x, y), 2.0 * s - N); }, 1e-9, x);
    CHECK_THAT(val, WithinRel(sphere_measure(N) / (2.0 * s), 1e-7));
  }
  // off-center: int_{B_1} |x-y|^{2s-N} dy with x = 0.4 e_1, N = 1, s = 0.25:
  // closed antiderivative 2 sqrt: int |t-x|^{-1/2} dt = 2(sqrt(1-x)+sqrt(1+x))
  const ProblemParams p1{1, 0.25};
  const Point x1(0.4);
  const double v1 = ball_integrate(
      p1, [&](const Point& y) { return std::pow(dist(x1, y), -0.5); }, 1e-9, x1);
  CHECK_THAT(v1, WithinRel(2.0 * (std::sqrt(0.6) + std::sqrt(1.4)), 1e-7));
}

TEST_CASE("gauss-jacobi reproduces the green tail on smooth tails", "[quadrature]") {
  // int_0^{r0} t^{s-1} (1+t)^{-N/2} dt via gauss_jacobi(n, s-1, 0) mapped by
  // t = r0 (1-x)/2, against green_tail_integral.
  for (auto [N, s, r0] : {std::tuple{3, 0.5, 0.8}, {1, 0.75, 1.0}, {2, 0.5, 2.5}}) {
    const auto rule = gauss_jacobi(24, s - 1.0, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = 0.5 * r0 * (1.0 - rule.nodes[i]);
      acc += rule.weights[i] * std::pow(1.0 + t, -0.5 * N);
    }
    acc *= std::pow(0.5 * r0, s);
    CHECK_THAT(acc, WithinRel(green_tail_integral(N, s, r0), 1e-9));
  }
}
