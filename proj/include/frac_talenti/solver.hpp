#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "frac_talenti/common.hpp"
#include "frac_talenti/kernels.hpp"
#include "frac_talenti/quadrature.hpp"
#include "frac_talenti/sources.hpp"
#include "frac_talenti/special.hpp"

namespace frac_talenti {

// gamma_{N,s} = Gamma(N/2) / (4^s Gamma(N/2+s) Gamma(1+s)); the torsion
// solution of (-Delta)^s u = 1 on B_1 is gamma_{N,s} (1-|x|^2)^s.
inline double torsion_gamma(int N, double s) {
  if (N < 1 || !(s > 0.0)) throw domain_error("torsion_gamma: need N >= 1 and s > 0");
  const double halfN = 0.5 * static_cast<double>(N);
  return std::exp(log_gamma(halfN) - s * std::log(4.0) - log_gamma(halfN + s) -
                  log_gamma(1.0 + s));
}

// Closed-form solution for f = 1: the independent oracle against which the
// Green quadrature is validated. Its boundary fractional derivative u/delta^s
// equals 2^s gamma_{N,s}.
inline double torsion_oracle(const ProblemParams& params, const Point& x) {
  params.validate();
  if (x.dim() != params.dim) throw domain_error("torsion_oracle: dimension mismatch");
  const double q = 1.0 - x.norm_sq();
  if (q < -1e-13) throw domain_error("torsion_oracle: point outside the closed ball");
  return torsion_gamma(params.dim, params.order) * std::pow(std::max(q, 0.0), params.order);
}

struct SolutionHandle {
  ProblemParams params;
  SourceFunction source;

  SolutionHandle(ProblemParams p, SourceFunction f) : params(p), source(std::move(f)) {
    params.validate();
    if (source.dim() != params.dim) throw domain_error("SolutionHandle: dimension mismatch");
  }

  // write-once caches
  mutable std::mutex cache_mutex;
  mutable std::shared_ptr<const BoundaryTrace> trace_cache;
  mutable std::vector<double> profile_grid;
  mutable std::shared_ptr<const std::vector<double>> profile_cache;
};

// u(x) = int_B G_s(x,y) f(y) dy by ball quadrature with the kernel
// singularity excised at x. Profile breakpoints are passed down as radial
// discontinuity markers.
inline double solve_at(const SolutionHandle& h, const Point& x, double tol) {
  if (x.dim() != h.params.dim) throw domain_error("solve_at: dimension mismatch");
  const double rx2 = x.norm_sq();
  if (rx2 > 1.0 + 1e-13) throw domain_error("solve_at: point outside the closed ball");
  if (rx2 >= 1.0 - 1e-14) return 0.0;
  if (lp_norm(h.source, 1.0) == 0.0) return 0.0;

  std::vector<double> breaks;
  if (h.source.is_radial()) {
    const auto& bp = h.source.profile().breakpoints();
    breaks.assign(bp.begin(), bp.end());
    breaks.pop_back();  // r = 1 is added by ball_integrate
  } else {
    const BumpSource& b = h.source.bump();
    const double c = b.center.norm();
    breaks.push_back(std::max(c - b.radius, 0.0));
    breaks.push_back(std::min(c + b.radius, 1.0));
  }
  auto integrand = [&](const Point& y) {
    const double fy = eval_source(h.source, y);
    return fy == 0.0 ? 0.0 : green(h.params, x, y) * fy;
  };
  return ball_integrate(h.params, integrand, tol, x, std::span<const double>(breaks));
}

namespace detail {

// Numerical angular factor W(r) = int_{S^{N-1}} |theta - r w|^{-N} dsigma(w)
// for a fixed boundary direction theta; the Poisson identity says
// W(r) = omega / (1-r^2), but the trace route below keeps it numerical so the
// consistency against the folded radial formula is a genuine cross-check.
inline double martin_angular_factor(int N, double r, double tol) {
  switch (N) {
    case 1:
      return 1.0 / (1.0 - r) + 1.0 / (1.0 + r);
    case 2:
      return 2.0 * adaptive_1d(
                       [&](double phi) { return 1.0 / (1.0 + r * r - 2.0 * r * std::cos(phi)); },
                       0.0, std::numbers::pi, tol, {0.0});
    default:
      return 2.0 * std::numbers::pi *
             adaptive_1d(
                 [&](double mu) {
                   const double d2 = 1.0 + r * r - 2.0 * r * mu;
                   return 1.0 / (d2 * std::sqrt(d2));
                 },
                 -1.0, 1.0, tol, {1.0});
  }
}

// Boundary trace value for a radial source: the Martin-kernel ball integral
// reduced to the radius, with the (1-r)^{s-1} endpoint weight folded into a
// Gauss-Jacobi rule on the outermost piece.
inline double radial_trace_value(const ProblemParams& params, const RadialProfile& f,
                                 double tol) {
  const int N = params.dim;
  const double s = params.order;
  const double ang_tol = std::min(1e-11, 0.01 * tol);
  auto smooth_part = [&](double r) {
    // (1-r^2)^s W(r) = (1-r)^{s-1} * [(1+r)^{s-1} (1-r^2) W(r)]
    const double w = martin_angular_factor(N, r, ang_tol);
    return radial_jacobian(N, r) * std::pow(1.0 + r, s - 1.0) * (1.0 - r * r) * w;
  };
  double acc = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    const double v = f.values()[i];
    if (v == 0.0) continue;
    const double a = f.lower_radius(i), b = f.upper_radius(i);
    if (b >= 1.0 - 1e-14) {
      const QuadratureRule& gj = jacobi_rule_cached(48, s - 1.0, 0.0);
      const double half = 0.5 * (1.0 - a);
      double piece = 0.0;
      for (std::size_t j = 0; j < gj.nodes.size(); ++j) {
        const double r = a + half * (1.0 + gj.nodes[j]);
        piece += gj.weights[j] * smooth_part(r);
      }
      acc += v * std::pow(half, s) * piece;
    } else {
      acc += v * adaptive_1d(
                     [&](double r) {
                       return std::pow(1.0 - r, s - 1.0) * smooth_part(r);
                     },
                     a, b, tol, {});
    }
  }
  const double nu = normalization_factor(params);
  return nu * 2.0 * kappa(N, s) / s * acc;
}

// Boundary trace value at one node for a bump source: a smooth local-polar
// integral over B_rho(xi). gl_order / sphere_order control the product rule.
inline double bump_trace_value(const ProblemParams& params, const BumpSource& b,
                               const Point& theta, int gl_order, const SphereRule& local) {
  const int N = params.dim;
  const double s = params.order;
  const QuadratureRule& gl = jacobi_rule_cached(gl_order, 0.0, 0.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
    const double r = 0.5 * b.radius * (1.0 + gl.nodes[i]);
    double ring = 0.0;
    for (std::size_t j = 0; j < local.nodes.size(); ++j) {
      const Point y = b.center + r * local.nodes[j];
      const double num = std::pow(1.0 - y.norm_sq(), s);
      const double den = std::pow(dist_sq(y, theta), 0.5 * N);
      ring += local.weights[j] * num / den;
    }
    acc += gl.weights[i] * radial_jacobian(N, r) * ring;
  }
  acc *= 0.5 * b.radius;  // radial map jacobian
  const double nu = normalization_factor(params);
  return nu * 2.0 * kappa(N, s) / s * b.height * acc;
}

}  // namespace detail

// Default sphere rule used for boundary traces when the caller has no
// preference.
inline SphereRule default_trace_rule(int N) {
  switch (N) {
    case 1: return sphere_rule(1, 1);
    case 2: return sphere_rule(2, 128);
    default: return sphere_rule(3, 24);
  }
}

// Fractional boundary trace u_f/delta^s sampled at the rule nodes, computed
// from the Martin representation (never by extrapolating interior values).
// With DeltaLimit normalization this is the fractional normal derivative for
// delta = 1 - |x|.
inline BoundaryTrace boundary_trace(const SolutionHandle& h, const SphereRule& rule, double tol) {
  if (rule.dim != h.params.dim) throw domain_error("boundary_trace: rule dimension mismatch");
  {
    std::lock_guard<std::mutex> lock(h.cache_mutex);
    if (h.trace_cache && h.trace_cache->rule->nodes.size() == rule.nodes.size())
      return *h.trace_cache;
  }

  BoundaryTrace trace;
  trace.rule = std::make_shared<SphereRule>(rule);
  trace.values.resize(rule.nodes.size());

  const bool zero_source = lp_norm(h.source, 1.0) == 0.0;
  if (zero_source) {
    std::fill(trace.values.begin(), trace.values.end(), 0.0);
  } else if (h.source.is_radial()) {
    const double v = detail::radial_trace_value(h.params, h.source.profile(), tol);
    std::fill(trace.values.begin(), trace.values.end(), v);
  } else {
    const BumpSource& b = h.source.bump();
    // escalate the local product rule once until two levels agree at a probe node
    int gl_order = 12, sp_order = 8;
    SphereRule local = sphere_rule(h.params.dim, sp_order);
    const Point& probe = rule.nodes.front();
    for (int round = 0; round < 3; ++round) {
      const double coarse = detail::bump_trace_value(h.params, b, probe, gl_order, local);
      SphereRule finer = sphere_rule(h.params.dim, 2 * sp_order);
      const double fine = detail::bump_trace_value(h.params, b, probe, 2 * gl_order, finer);
      if (std::abs(fine - coarse) <= 0.1 * tol * std::max(1.0, std::abs(fine))) break;
      gl_order *= 2;
      sp_order *= 2;
      local = std::move(finer);
    }
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      trace.values[i] = detail::bump_trace_value(h.params, b, rule.nodes[i], gl_order, local);
  }

  if (!zero_source && trace.min_value() <= 0.0)
    throw convergence_error(
        "boundary_trace: nonpositive trace for a nontrivial source (quadrature failure; "
        "the trace is analytically bounded below by a positive constant)");

  std::lock_guard<std::mutex> lock(h.cache_mutex);
  h.trace_cache = std::make_shared<BoundaryTrace>(trace);
  return trace;
}

// u_f/delta^s for radial f, from the folded radial formula
// nu (2 kappa/s) int_B f(y) (1-|y|^2)^{s-1} dy with Gauss-Jacobi exactness in
// the endpoint weight.
inline double radial_boundary_value(const ProblemParams& params, const RadialProfile& f) {
  params.validate();
  if (f.dim() != params.dim) throw domain_error("radial_boundary_value: dimension mismatch");
  const int N = params.dim;
  const double s = params.order;
  double acc = 0.0;
  for (std::size_t i = 0; i < f.pieces(); ++i) {
    const double v = f.values()[i];
    if (v == 0.0) continue;
    const double a = f.lower_radius(i), b = f.upper_radius(i);
    double piece;
    if (b >= 1.0 - 1e-14) {
      // fold (1-r)^{s-1}; the remaining factor r^{N-1}(1+r)^{s-1} is analytic
      const QuadratureRule& gj = detail::jacobi_rule_cached(48, s - 1.0, 0.0);
      const double half = 0.5 * (1.0 - a);
      double sum = 0.0;
      for (std::size_t j = 0; j < gj.nodes.size(); ++j) {
        const double r = a + half * (1.0 + gj.nodes[j]);
        sum += gj.weights[j] * detail::radial_jacobian(N, r) * std::pow(1.0 + r, s - 1.0);
      }
      piece = std::pow(half, s) * sum;
    } else {
      piece = adaptive_1d(
          [&](double r) {
            return detail::radial_jacobian(N, r) * std::pow(1.0 - r * r, s - 1.0);
          },
          a, b, 1e-12, {});
    }
    acc += v * piece;
  }
  const double nu = normalization_factor(params);
  return nu * 2.0 * kappa(N, s) / s * sphere_measure(N) * acc;
}

// Boundary value of (u_f)* through the s-harmonic mean of the trace:
//   ((1/omega) int_S psi(theta)^{-1/s} dsigma)^{-s}.
// No interior rearrangement is involved.
inline double symmetrized_boundary_value(const SolutionHandle& h, const SphereRule& rule,
                                         double tol) {
  const BoundaryTrace psi = boundary_trace(h, rule, tol);
  if (psi.min_value() <= 0.0)
    throw convergence_error("symmetrized_boundary_value: trace must be strictly positive");
  const double s = h.params.order;
  double acc = 0.0;
  const double omega = psi.rule->weight_sum();
  for (std::size_t i = 0; i < psi.values.size(); ++i)
    acc += psi.rule->weights[i] * std::pow(psi.values[i], -1.0 / s);
  return std::pow(acc / omega, -s);
}

// Chebyshev-type radial grid clustered at r = 1 (default profile grid).
inline std::vector<double> chebyshev_radii(int m) {
  if (m < 2) throw domain_error("chebyshev_radii: need at least 2 radii");
  std::vector<double> r(static_cast<std::size_t>(m));
  for (int i = 1; i <= m; ++i)
    r[static_cast<std::size_t>(i - 1)] = std::sin(0.5 * std::numbers::pi * i / m);
  r.back() = 1.0;
  return r;
}

// u_f(r_i e_1) on a radial grid; cached on the handle.
inline std::vector<double> radial_solution_profile(const SolutionHandle& h,
                                                   std::span<const double> grid, double tol) {
  if (!h.source.is_radial())
    throw domain_error("radial_solution_profile: source must be radial");
  {
    std::lock_guard<std::mutex> lock(h.cache_mutex);
    if (h.profile_cache && h.profile_grid.size() == grid.size() &&
        std::equal(grid.begin(), grid.end(), h.profile_grid.begin()))
      return *h.profile_cache;
  }
  std::vector<double> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i)
    values[i] = solve_at(h, Point::on_axis(h.params.dim, grid[i]), tol);
  std::lock_guard<std::mutex> lock(h.cache_mutex);
  h.profile_grid.assign(grid.begin(), grid.end());
  h.profile_cache = std::make_shared<std::vector<double>>(values);
  return values;
}

}  // namespace frac_talenti
