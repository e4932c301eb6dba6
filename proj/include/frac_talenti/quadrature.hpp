#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <queue>
#include <span>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "frac_talenti/common.hpp"
#include "frac_talenti/special.hpp"

namespace frac_talenti {

enum class QuadratureDomain { interval, sphere, ball };

// 1-D rule on [-1,1] (or a mapped interval).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  QuadratureDomain domain = QuadratureDomain::interval;
};

// Rule on the unit sphere S^{N-1}.
struct SphereRule {
  int dim = 0;  // ambient N
  std::vector<Point> nodes;
  std::vector<double> weights;
  QuadratureDomain domain = QuadratureDomain::sphere;

  double weight_sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

namespace detail {

// Golub-Welsch: nodes/weights of the n-point Gauss rule for the weight
// (1-x)^alpha (1+x)^beta from the symmetric tridiagonal Jacobi matrix.
inline QuadratureRule jacobi_rule_uncached(int n, double alpha, double beta) {
  const double ab = alpha + beta;
  Eigen::VectorXd diag(n), sub(std::max(n - 1, 0));
  diag[0] = (beta - alpha) / (ab + 2.0);
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    const double denom = (2.0 * kk + ab) * (2.0 * kk + ab + 2.0);
    diag[k] = (beta * beta - alpha * alpha) / denom;
  }
  for (int k = 1; k < n; ++k) {
    const double kk = static_cast<double>(k);
    double b2;
    if (k == 1) {
      b2 = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
    } else {
      b2 = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) /
           ((2.0 * kk + ab) * (2.0 * kk + ab) * (2.0 * kk + ab + 1.0) * (2.0 * kk + ab - 1.0));
    }
    sub[k - 1] = std::sqrt(b2);
  }

  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const double mu0 = std::pow(2.0, ab + 1.0) * beta_function(alpha + 1.0, beta + 1.0);
  if (n == 1) {
    rule.nodes[0] = diag[0];
    rule.weights[0] = mu0;
    return rule;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);

  // Jacobi polynomial value and derivative by the three-term recurrence;
  // d/dx P_n^{(a,b)} = (n+a+b+1)/2 * P_{n-1}^{(a+1,b+1)}.
  auto jacobi_poly = [](int deg, double a, double b, double x) {
    if (deg == 0) return 1.0;
    double pm = 1.0;
    double pc = 0.5 * (a - b) + 0.5 * (a + b + 2.0) * x;
    for (int k = 2; k <= deg; ++k) {
      const double kk = k, s2 = 2.0 * kk + a + b;
      const double a1 = 2.0 * kk * (kk + a + b) * (s2 - 2.0);
      const double a2 = (s2 - 1.0) * (a * a - b * b);
      const double a3 = (s2 - 2.0) * (s2 - 1.0) * s2;
      const double a4 = 2.0 * (kk + a - 1.0) * (kk + b - 1.0) * s2;
      const double pn = ((a2 + a3 * x) * pc - a4 * pm) / a1;
      pm = pc;
      pc = pn;
    }
    return pc;
  };

  // Newton polish of the eigenvalue nodes; keeps large-n rules exact to
  // machine precision where raw tridiagonal eigenvalues drift ~1e-12.
  const double lnC = (ab + 1.0) * std::log(2.0) + log_gamma(n + alpha + 1.0) +
                     log_gamma(n + beta + 1.0) - log_gamma(n + 1.0) -
                     log_gamma(n + ab + 1.0);
  for (int i = 0; i < n; ++i) {
    double x = es.eigenvalues()[i];
    double dp = 0.0;
    for (int it = 0; it < 8; ++it) {
      const double p = jacobi_poly(n, alpha, beta, x);
      dp = 0.5 * (n + ab + 1.0) * jacobi_poly(n - 1, alpha + 1.0, beta + 1.0, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    dp = 0.5 * (n + ab + 1.0) * jacobi_poly(n - 1, alpha + 1.0, beta + 1.0, x);
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = std::exp(lnC) / ((1.0 - x * x) * dp * dp);
    (void)mu0;
  }
  return rule;
}

inline const QuadratureRule& jacobi_rule_cached(int n, double alpha, double beta) {
  using Key = std::tuple<int, double, double>;
  thread_local std::map<Key, QuadratureRule> cache;
  auto [it, inserted] = cache.try_emplace(Key{n, alpha, beta});
  if (inserted) it->second = jacobi_rule_uncached(n, alpha, beta);
  return it->second;
}

}  // namespace detail

// n-point Gauss-Legendre rule on [-1,1], exact for polynomials of degree
// <= 2n-1.
inline QuadratureRule gauss_legendre(int n) {
  if (n < 1 || n > 512) throw domain_error("gauss_legendre: n must be in [1, 512]");
  return detail::jacobi_rule_cached(n, 0.0, 0.0);
}

// n-point Gauss-Jacobi rule for int_{-1}^{1} g(x) (1-x)^alpha (1+x)^beta dx.
inline QuadratureRule gauss_jacobi(int n, double alpha, double beta) {
  if (n < 1) throw domain_error("gauss_jacobi: n must be >= 1");
  if (!(alpha > -1.0) || !(beta > -1.0))
    throw domain_error("gauss_jacobi: exponents must be > -1");
  return detail::jacobi_rule_cached(n, alpha, beta);
}

namespace detail {

// Kronrod-15 / Gauss-7 pair (QUADPACK dqk15 nodes and weights).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kGK15WeightsG[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelEstimate {
  double integral = 0.0;
  double error = 0.0;
};

template <class F>
PanelEstimate gk15(F& g, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double fv[15];
  const double fc = g(center);
  double resk = kGK15WeightsK[7] * fc;
  double resg = kGK15WeightsG[3] * fc;
  double resabs = std::abs(resk);
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kGK15Nodes[j];
    const double f1 = g(center - dx);
    const double f2 = g(center + dx);
    fv[j] = f1;
    fv[14 - j] = f2;
    resk += kGK15WeightsK[j] * (f1 + f2);
    if (j % 2 == 1) resg += kGK15WeightsG[j / 2] * (f1 + f2);
    resabs += kGK15WeightsK[j] * (std::abs(f1) + std::abs(f2));
  }
  const double mean = 0.5 * resk;
  double resasc = kGK15WeightsK[7] * std::abs(fc - mean);
  for (int j = 0; j < 7; ++j)
    resasc += kGK15WeightsK[j] * (std::abs(fv[j] - mean) + std::abs(fv[14 - j] - mean));
  resasc *= std::abs(half);
  resabs *= std::abs(half);

  PanelEstimate est;
  est.integral = resk * half;
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  (void)resabs;
  est.error = err;
  return est;
}

}  // namespace detail

// Heap-driven refinement over a set of seed intervals; the workhorse for
// integrands that are smooth away from the interval edges.
template <class F>
detail::PanelEstimate heap_adaptive(F& g, std::span<const double> edges, double tol,
                                    std::size_t& evals, std::size_t max_evals) {
  struct Panel {
    double error, a, b, integral;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  std::priority_queue<Panel> heap;
  double total = 0.0, total_err = 0.0;
  auto push_panel = [&](double lo, double hi) {
    auto est = detail::gk15(g, lo, hi);
    evals += 15;
    total += est.integral;
    total_err += est.error;
    heap.push(Panel{est.error, lo, hi, est.integral});
  };
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) push_panel(edges[i], edges[i + 1]);

  while (total_err > tol * std::max(1.0, std::abs(total))) {
    if (evals + 30 > max_evals)
      throw convergence_error("adaptive_1d: evaluation budget exhausted");
    Panel worst = heap.top();
    heap.pop();
    // Node positions stop being distinguishable from the edges around this
    // width; accept the panel rather than evaluate at a possible singularity.
    const double min_width = 64.0 * std::numeric_limits<double>::epsilon() *
                             (std::abs(worst.a) + std::abs(worst.b) + 1.0);
    if (worst.b - worst.a < min_width) {
      if (heap.empty()) break;
      Panel next = heap.top();
      if (next.error <= worst.error) break;
      heap.push(worst);
      continue;
    }
    total -= worst.integral;
    total_err -= worst.error;
    const double mid = 0.5 * (worst.a + worst.b);
    push_panel(worst.a, mid);
    push_panel(mid, worst.b);
  }
  return {total, total_err};
}

namespace detail {

// Limit of the partial sums S_0..S_m by Wynn's epsilon algorithm (the last
// even-column diagonal entry).
inline double wynn_epsilon(const std::vector<double>& sums) {
  std::vector<double> prev(sums.size() + 1, 0.0);
  std::vector<double> cur(sums);
  double best = cur.back();
  for (std::size_t k = 1; k < sums.size(); ++k) {
    std::vector<double> next(sums.size() - k);
    for (std::size_t n = 0; n + k < sums.size(); ++n) {
      const double denom = cur[n + 1] - cur[n];
      next[n] = std::abs(denom) < 1e-300 ? 1e300 : prev[n + 1] + 1.0 / denom;
    }
    if (k % 2 == 0 && std::abs(next.back()) < 1e299) best = next.back();
    prev = std::move(cur);
    cur = std::move(next);
  }
  return best;
}

// Integral over the interval between `sp` (a declared singular point) and
// `far`: dyadic panels shrinking toward sp, each integrated adaptively, with
// the panel-sum limit accelerated by the epsilon algorithm. This reaches
// tolerances that plain bisection cannot, because floating-point nodes
// collide with sp at width ~64 eps |sp|.
template <class F>
PanelEstimate singular_chain(F& g, double sp, double far, double tol, std::size_t& evals,
                             std::size_t max_evals) {
  const double d = far - sp;  // signed
  const double inner_tol = 0.01 * tol;
  // depth at which gk15 nodes would collide with sp
  const double ulp = std::numeric_limits<double>::epsilon() * (std::abs(sp) + 1e-3);
  const int j_cap = std::max(
      8, std::min(48, static_cast<int>(std::floor(std::log2(0.004 * std::abs(d) / ulp)))));

  std::vector<double> sums;
  double sum = 0.0, inner_err = 0.0;
  double prev_best = std::numeric_limits<double>::quiet_NaN();
  for (int j = 0; j <= j_cap; ++j) {
    const double hi = sp + d * std::ldexp(1.0, -j);
    const double lo = sp + d * std::ldexp(1.0, -(j + 1));
    const double edges[2] = {std::min(lo, hi), std::max(lo, hi)};
    const auto piece = heap_adaptive(g, std::span<const double>(edges, 2),
                                     inner_tol * std::max(1.0, std::abs(sum)), evals, max_evals);
    sum += piece.integral;
    inner_err += piece.error;
    sums.push_back(sum);
    const std::size_t m = sums.size();
    if (m >= 2 && sums[m - 1] == sums[m - 2])
      return {sum, inner_err + std::abs(sum - sums[m - 2])};
    if (m >= 4) {
      const double best = wynn_epsilon(sums);
      const double scale = std::max(1.0, std::abs(best));
      if (std::abs(best - prev_best) <= 0.25 * tol * scale)
        return {best, inner_err + std::abs(best - prev_best)};
      prev_best = best;
    }
  }
  // Did not stabilize before the collision depth; report the extrapolated
  // value with an honest error bar so the caller's tolerance check decides.
  const double best = sums.size() >= 4 ? wynn_epsilon(sums) : sums.back();
  return {best, inner_err + std::abs(best - prev_best) + std::abs(best - sums.back())};
}

}  // namespace detail

// Adaptive integration on [a,b]. Listed singular points (interior points or
// the endpoints themselves) never get evaluated: they become interval edges,
// and the integral is refined dyadically toward each of them with
// epsilon-extrapolation of the panel sums; everywhere else a globally
// adaptive Gauss-Kronrod scheme runs. Stops when the estimated error
// satisfies err <= tol * max(1, |I|); throws convergence_error when the
// evaluation budget is exhausted first.
template <class F>
double adaptive_1d(F&& g, double a, double b, double tol,
                   std::span<const double> singular_points = {},
                   std::size_t max_evals = 1000000) {
  if (!(a < b)) throw domain_error("adaptive_1d: need a < b");
  if (!(tol > 0.0)) throw domain_error("adaptive_1d: tol must be > 0");

  std::vector<double> special(singular_points.begin(), singular_points.end());
  std::sort(special.begin(), special.end());
  special.erase(std::unique(special.begin(), special.end()), special.end());
  std::erase_if(special, [&](double sp) { return sp < a || sp > b; });

  std::vector<double> edges;
  edges.push_back(a);
  for (double sp : special)
    if (sp > a && sp < b) edges.push_back(sp);
  edges.push_back(b);

  auto is_special = [&](double x) {
    return std::binary_search(special.begin(), special.end(), x);
  };

  std::size_t evals = 0;
  double total = 0.0, total_err = 0.0;
  std::vector<double> plain_edges;
  const double seg_tol = tol / static_cast<double>(edges.size());
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double lo = edges[i], hi = edges[i + 1];
    const bool ls = is_special(lo), rs = is_special(hi);
    if (!ls && !rs) {
      plain_edges.push_back(lo);
      plain_edges.push_back(hi);
      continue;
    }
    detail::PanelEstimate est;
    if (ls && rs) {
      const double mid = 0.5 * (lo + hi);
      const auto left = detail::singular_chain(g, lo, mid, 0.5 * seg_tol, evals, max_evals);
      const auto right = detail::singular_chain(g, hi, mid, 0.5 * seg_tol, evals, max_evals);
      est = {left.integral + right.integral, left.error + right.error};
    } else if (ls) {
      est = detail::singular_chain(g, lo, hi, seg_tol, evals, max_evals);
    } else {
      est = detail::singular_chain(g, hi, lo, seg_tol, evals, max_evals);
    }
    total += est.integral;
    total_err += est.error;
  }
  if (!plain_edges.empty()) {
    // merge adjacent shared edges back into a seed list
    std::sort(plain_edges.begin(), plain_edges.end());
    plain_edges.erase(std::unique(plain_edges.begin(), plain_edges.end()), plain_edges.end());
    const auto est = heap_adaptive(g, std::span<const double>(plain_edges), tol, evals, max_evals);
    total += est.integral;
    total_err += est.error;
  }
  if (!(total_err <= 4.0 * tol * std::max(1.0, std::abs(total))) && !std::isnan(total_err))
    throw convergence_error("adaptive_1d: requested tolerance not reached");
  return total;
}

template <class F>
double adaptive_1d(F&& g, double a, double b, double tol,
                   std::initializer_list<double> singular_points,
                   std::size_t max_evals = 1000000) {
  return adaptive_1d(std::forward<F>(g), a, b, tol,
                     std::span<const double>(singular_points.begin(), singular_points.size()),
                     max_evals);
}

// Quadrature rule on S^{N-1}. N=1: the two points {-1,+1} with weight 1 each.
// N=2: `order` equispaced angles, weight 2*pi/order. N=3: Gauss-Legendre in
// cos(polar angle) times 2*order equispaced azimuths.
inline SphereRule sphere_rule(int N, int order) {
  if (N < 1 || N > 3) throw domain_error("sphere_rule: only N in {1,2,3} is supported");
  if (order < 1) throw domain_error("sphere_rule: order must be >= 1");
  SphereRule rule;
  rule.dim = N;
  if (N == 1) {
    rule.nodes = {Point(1.0), Point(-1.0)};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  if (N == 2) {
    const double w = 2.0 * std::numbers::pi / order;
    rule.nodes.reserve(static_cast<std::size_t>(order));
    for (int j = 0; j < order; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / order;
      rule.nodes.emplace_back(std::cos(phi), std::sin(phi));
      rule.weights.push_back(w);
    }
    return rule;
  }
  const QuadratureRule gl = gauss_legendre(order);
  const int m = 2 * order;
  const double wphi = 2.0 * std::numbers::pi / m;
  rule.nodes.reserve(static_cast<std::size_t>(order * m));
  for (int i = 0; i < order; ++i) {
    const double mu = gl.nodes[static_cast<std::size_t>(i)];
    const double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    for (int j = 0; j < m; ++j) {
      const double phi = wphi * (j + 0.5);
      rule.nodes.emplace_back(smu * std::cos(phi), smu * std::sin(phi), mu);
      rule.weights.push_back(gl.weights[static_cast<std::size_t>(i)] * wphi);
    }
  }
  return rule;
}

namespace detail {

// r^{N-1} for N in {1,2,3}.
inline double radial_jacobian(int N, double r) {
  return N == 1 ? 1.0 : (N == 2 ? r : r * r);
}

// Orthonormal frame {u, v} completing the unit vector d (N = 3).
inline void make_frame(const Point& d, Point& u, Point& v) {
  const double ax = std::abs(d[0]), ay = std::abs(d[1]), az = std::abs(d[2]);
  Point e = (ax <= ay && ax <= az) ? Point(1.0, 0.0, 0.0)
            : (ay <= az)           ? Point(0.0, 1.0, 0.0)
                                   : Point(0.0, 0.0, 1.0);
  // u = normalize(d x e)
  Point c(d[1] * e[2] - d[2] * e[1], d[2] * e[0] - d[0] * e[2], d[0] * e[1] - d[1] * e[0]);
  const double n = c.norm();
  u = (1.0 / n) * c;
  v = Point(d[1] * u[2] - d[2] * u[1], d[2] * u[0] - d[0] * u[2], d[0] * u[1] - d[1] * u[0]);
}

// Trapezoid sum over the periodic azimuth with doubling until the requested
// tolerance; spectral for smooth integrands and exact after one doubling for
// axisymmetric ones.
template <class G>
double periodic_trapezoid(G&& g, double tol, int m0 = 8, int mmax = 4096) {
  const double two_pi = 2.0 * std::numbers::pi;
  int m = m0;
  auto sum_at = [&](int mm) {
    double s = 0.0;
    for (int j = 0; j < mm; ++j) s += g(two_pi * (j + 0.5) / mm);
    return s * (two_pi / mm);
  };
  double prev = sum_at(m);
  while (m < mmax) {
    m *= 2;
    const double cur = sum_at(m);
    if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
    prev = cur;
  }
  return prev;
}

// Integral of g over the sphere {w : dot(w, pole) <= mu_cut}; mu_cut >= 1
// means the whole sphere. The pole should point at any sharp feature of g so
// that the polar direction carries the variation.
template <class G>
double sphere_integral_polar(int N, const Point& pole, double mu_cut, G&& g, double tol) {
  if (N == 1) throw domain_error("sphere_integral_polar: N = 1 is handled by callers");
  const double upper = std::min(mu_cut, 1.0);
  if (upper <= -1.0) return 0.0;
  if (N == 2) {
    // w(phi) = rotation of pole by phi; integrate phi in [phi_c, 2pi - phi_c].
    const double phi_c = std::acos(std::clamp(upper, -1.0, 1.0));
    auto integrand = [&](double phi) {
      const double c = std::cos(phi), s = std::sin(phi);
      return g(Point(c * pole[0] - s * pole[1], s * pole[0] + c * pole[1]));
    };
    const double lo = phi_c, hi = 2.0 * std::numbers::pi - phi_c;
    if (!(lo < hi)) return 0.0;
    return adaptive_1d(integrand, lo, hi, tol, {});
  }
  Point u, v;
  make_frame(pole, u, v);
  auto ring = [&](double mu) {
    const double smu = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    return periodic_trapezoid(
        [&](double phi) {
          Point w = mu * pole + std::cos(phi) * (smu * u) + std::sin(phi) * (smu * v);
          return g(w);
        },
        0.1 * tol);
  };
  return adaptive_1d(ring, -1.0, upper, tol, {});
}

// Integral of g over the whole sphere S^{N-1}, assuming g smooth.
template <class G>
double sphere_integral_smooth(int N, G&& g, double tol) {
  if (N == 1) return g(Point(1.0)) + g(Point(-1.0));
  if (N == 2)
    return periodic_trapezoid([&](double phi) { return g(Point(std::cos(phi), std::sin(phi))); },
                              tol);
  return sphere_integral_polar(N, Point(0.0, 0.0, 1.0), 1.0, std::forward<G>(g), tol);
}

}  // namespace detail

// Integral of g over the unit ball B_1 in R^N by a radial x spherical product
// rule. An interior singular point x splits the radial integration at the
// shells |x| +- h and excises the patch B_h(x), which is integrated in local
// polar coordinates around x where the Jacobian tames the singularity.
// radial_breaks lists radii where the integrand is discontinuous (e.g. step
// profiles).
template <class F>
double ball_integrate(const ProblemParams& params, F&& g, double tol,
                      const std::optional<Point>& interior_singularity = std::nullopt,
                      std::span<const double> radial_breaks = {}) {
  params.validate();
  const int N = params.dim;
  if (N > 3) throw domain_error("ball_integrate: only N in {1,2,3} is supported");
  if (!(tol > 0.0)) throw domain_error("ball_integrate: tol must be > 0");
  const double ang_tol = 0.1 * tol;

  std::vector<double> breaks(radial_breaks.begin(), radial_breaks.end());
  breaks.push_back(1.0);  // boundary decay is generically non-smooth

  if (!interior_singularity) {
    auto shell = [&](double r) {
      const double rpow = detail::radial_jacobian(N, r);
      return rpow * detail::sphere_integral_smooth(
                        N, [&](const Point& w) { return g(r * w); }, ang_tol);
    };
    return adaptive_1d(shell, 0.0, 1.0, tol, std::span<const double>(breaks));
  }

  const Point x = *interior_singularity;
  if (x.dim() != N) throw domain_error("ball_integrate: singularity dimension mismatch");
  const double rx = x.norm();
  if (!(rx < 1.0)) throw domain_error("ball_integrate: singular point must be interior");
  const double h = std::min(0.1, 0.5 * (1.0 - rx));

  // Patch B_h(x) in local polar coordinates; the radial factor rho^{N-1}
  // absorbs the worst of the kernel singularity at rho = 0.
  const Point pole = (rx > 1e-12) ? (1.0 / rx) * x : Point::on_axis(N, 1.0);
  auto patch_shell = [&](double rho) {
    const double rpow = detail::radial_jacobian(N, rho);
    if (N == 1) return rpow * (g(Point(x[0] + rho)) + g(Point(x[0] - rho)));
    return rpow * detail::sphere_integral_smooth(
                      N, [&](const Point& w) { return g(x + rho * w); }, ang_tol);
  };
  const double patch = adaptive_1d(patch_shell, 0.0, h, 0.5 * tol, {0.0});

  // Remainder B_1 \ B_h(x): radial sweep with the visible angular region.
  if (rx > 1e-12) {
    breaks.push_back(std::max(rx - h, 0.0));
    breaks.push_back(std::min(rx + h, 1.0));
  } else {
    breaks.push_back(h);
  }
  auto outer_shell = [&](double r) {
    const double rpow = detail::radial_jacobian(N, r);
    if (r <= 1e-300) return 0.0;
    if (rx <= 1e-12) {
      if (r <= h) return 0.0;
      if (N == 1) return rpow * (g(Point(r)) + g(Point(-r)));
      return rpow * detail::sphere_integral_smooth(
                        N, [&](const Point& w) { return g(r * w); }, ang_tol);
    }
    // |r w - x| > h  <=>  dot(w, pole) < mu_cut(r)
    const double mu_cut = (r * r + rx * rx - h * h) / (2.0 * r * rx);
    if (N == 1) {
      double s = 0.0;
      for (double sgn : {1.0, -1.0}) {
        if (std::abs(sgn * r - x[0]) > h) s += g(Point(sgn * r));
      }
      return rpow * s;
    }
    return rpow * detail::sphere_integral_polar(
                      N, pole, mu_cut, [&](const Point& w) { return g(r * w); }, ang_tol);
  };
  const double outer = adaptive_1d(outer_shell, 0.0, 1.0, 0.5 * tol, std::span<const double>(breaks));
  return patch + outer;
}

}  // namespace frac_talenti
