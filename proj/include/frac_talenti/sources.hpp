#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <span>
#include <variant>
#include <vector>

#include "frac_talenti/common.hpp"
#include "frac_talenti/quadrature.hpp"
#include "frac_talenti/special.hpp"

namespace frac_talenti {

// Radial step function on the unit ball: value values[i] on the open annulus
// (breakpoints[i-1], breakpoints[i]), with breakpoints[0] > 0 and the last
// breakpoint equal to 1. Evaluation is right-continuous in the radius.
class RadialProfile {
 public:
  RadialProfile(int dim, std::vector<double> breakpoints, std::vector<double> values)
      : dim_(dim), breaks_(std::move(breakpoints)), values_(std::move(values)) {
    if (dim_ < 1) throw domain_error("RadialProfile: dimension must be >= 1");
    if (breaks_.empty() || breaks_.size() != values_.size())
      throw domain_error("RadialProfile: need one value per breakpoint");
    double prev = 0.0;
    for (double r : breaks_) {
      if (!(r > prev)) throw domain_error("RadialProfile: breakpoints must be strictly increasing from 0");
      prev = r;
    }
    if (std::abs(breaks_.back() - 1.0) > 1e-12)
      throw domain_error("RadialProfile: last breakpoint must be 1");
    breaks_.back() = 1.0;
    for (double v : values_)
      if (!(v >= 0.0) || !std::isfinite(v))
        throw domain_error("RadialProfile: values must be finite and nonnegative");
  }

  int dim() const { return dim_; }
  std::size_t pieces() const { return values_.size(); }
  const std::vector<double>& breakpoints() const { return breaks_; }
  const std::vector<double>& values() const { return values_; }

  double lower_radius(std::size_t i) const { return i == 0 ? 0.0 : breaks_[i - 1]; }
  double upper_radius(std::size_t i) const { return breaks_[i]; }

  double piece_volume(std::size_t i) const {
    const double a = lower_radius(i), b = upper_radius(i);
    return sphere_measure(dim_) / dim_ *
           (std::pow(b, static_cast<double>(dim_)) - std::pow(a, static_cast<double>(dim_)));
  }

  // Right-continuous evaluation; 0 for r >= 1.
  double value_at(double r) const {
    if (r < 0.0) r = -r;
    if (r >= 1.0) return 0.0;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), r);
    const auto idx = static_cast<std::size_t>(it - breaks_.begin());
    return idx < values_.size() ? values_[idx] : 0.0;
  }

  double sup() const { return values_.empty() ? 0.0 : *std::max_element(values_.begin(), values_.end()); }

  bool symmetric_decreasing() const {
    for (std::size_t i = 1; i < values_.size(); ++i)
      if (values_[i] > values_[i - 1]) return false;
    return true;
  }

  // Merge adjacent pieces with equal values; canonical form for comparisons.
  RadialProfile merged() const {
    std::vector<double> nb, nv;
    for (std::size_t i = 0; i < values_.size(); ++i) {
      if (!nv.empty() && nv.back() == values_[i]) {
        nb.back() = breaks_[i];
      } else {
        nb.push_back(breaks_[i]);
        nv.push_back(values_[i]);
      }
    }
    return RadialProfile(dim_, std::move(nb), std::move(nv));
  }

 private:
  int dim_;
  std::vector<double> breaks_;
  std::vector<double> values_;
};

// Constant bump c * 1_{B_rho(xi)}. The standing hypothesis of the nonradial
// comparison results is 0 < rho < min(|xi|, 1-|xi|); the sharpness family is
// centered at the origin and is built through its own factory below.
struct BumpSource {
  Point center;
  double radius = 0.0;
  double height = 0.0;

  static BumpSource make(const Point& xi, double rho, double height) {
    const double r = xi.norm();
    if (!(r > 0.0) || !(r < 1.0))
      throw domain_error("BumpSource: center must lie in B_1 \\ {0}");
    if (!(rho > 0.0) || !(rho < std::min(r, 1.0 - r)))
      throw domain_error("BumpSource: need 0 < rho < min(|xi|, 1-|xi|)");
    if (!(height > 0.0)) throw domain_error("BumpSource: height must be > 0");
    return BumpSource{xi, rho, height};
  }

  // f_eps = |B_eps|^{-1} 1_{B_eps(0)}, so that the L1 norm is exactly 1.
  static BumpSource sharpness_family(int dim, double eps) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw domain_error("BumpSource: eps must be in (0,1)");
    return BumpSource{Point::zero(dim), eps, 1.0 / ball_volume(dim, eps)};
  }

  int dim() const { return center.dim(); }
};

class SourceFunction {
 public:
  SourceFunction(RadialProfile profile) : impl_(std::move(profile)) {}
  SourceFunction(BumpSource bump) : impl_(std::move(bump)) {}

  bool is_radial() const { return std::holds_alternative<RadialProfile>(impl_); }
  const RadialProfile& profile() const { return std::get<RadialProfile>(impl_); }
  const BumpSource& bump() const { return std::get<BumpSource>(impl_); }

  int dim() const {
    return is_radial() ? profile().dim() : bump().dim();
  }
  double sup() const { return is_radial() ? profile().sup() : bump().height; }

 private:
  std::variant<RadialProfile, BumpSource> impl_;
};

inline double eval_source(const SourceFunction& f, const Point& x) {
  if (x.dim() != f.dim()) throw domain_error("eval_source: dimension mismatch");
  if (x.norm_sq() > 1.0 + 1e-13) throw domain_error("eval_source: point outside the closed ball");
  if (f.is_radial()) return f.profile().value_at(x.norm());
  const BumpSource& b = f.bump();
  return dist_sq(x, b.center) < b.radius * b.radius ? b.height : 0.0;
}

// mu_f(t) = |{f > t}|, exact from the piecewise structure.
inline double distribution_mu(const SourceFunction& f, double t) {
  if (t < 0.0) throw domain_error("distribution_mu: t must be >= 0");
  if (f.is_radial()) {
    const RadialProfile& p = f.profile();
    double m = 0.0;
    for (std::size_t i = 0; i < p.pieces(); ++i)
      if (p.values()[i] > t) m += p.piece_volume(i);
    return m;
  }
  const BumpSource& b = f.bump();
  return t < b.height ? ball_volume(b.dim(), b.radius) : 0.0;
}

inline double lp_norm(const SourceFunction& f, double p) {
  if (!(p >= 1.0)) throw domain_error("lp_norm: p must be >= 1");
  if (f.is_radial()) {
    const RadialProfile& pr = f.profile();
    double acc = 0.0;
    for (std::size_t i = 0; i < pr.pieces(); ++i)
      acc += std::pow(pr.values()[i], p) * pr.piece_volume(i);
    return std::pow(acc, 1.0 / p);
  }
  const BumpSource& b = f.bump();
  return b.height * std::pow(ball_volume(b.dim(), b.radius), 1.0 / p);
}

// Schwarz symmetrization: the symmetric-decreasing, right-continuous radial
// profile equimeasurable with f. Exact: sort the pieces by value and assign
// radii that reproduce the cumulative super-level volumes.
inline RadialProfile schwarz(const SourceFunction& f) {
  const int N = f.dim();
  struct Piece {
    double value, volume;
  };
  std::vector<Piece> pieces;
  if (f.is_radial()) {
    const RadialProfile& p = f.profile();
    pieces.reserve(p.pieces());
    for (std::size_t i = 0; i < p.pieces(); ++i)
      pieces.push_back({p.values()[i], p.piece_volume(i)});
  } else {
    const BumpSource& b = f.bump();
    pieces.push_back({b.height, ball_volume(N, b.radius)});
    pieces.push_back({0.0, ball_volume(N, 1.0) - ball_volume(N, b.radius)});
  }
  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const Piece& a, const Piece& b) { return a.value > b.value; });

  const double unit = sphere_measure(N) / N;
  std::vector<double> breaks, values;
  double cum = 0.0;
  for (const Piece& pc : pieces) {
    cum += pc.volume;
    const double r = std::pow(cum / unit, 1.0 / N);
    if (!values.empty() && values.back() == pc.value) {
      breaks.back() = r;
    } else {
      breaks.push_back(r);
      values.push_back(pc.value);
    }
  }
  breaks.back() = 1.0;
  return RadialProfile(N, std::move(breaks), std::move(values));
}

// Pointwise min with tau; commutes exactly with schwarz.
inline SourceFunction truncate(const SourceFunction& f, double tau) {
  if (!(tau > 0.0)) throw domain_error("truncate: tau must be > 0");
  if (f.is_radial()) {
    const RadialProfile& p = f.profile();
    std::vector<double> v = p.values();
    for (double& x : v) x = std::min(x, tau);
    return SourceFunction(RadialProfile(p.dim(), p.breakpoints(), std::move(v)));
  }
  BumpSource b = f.bump();
  b.height = std::min(b.height, tau);
  return SourceFunction(b);
}

// Measure of {f != f*}; exact on the piecewise representation. Zero iff f is
// already symmetric decreasing (up to the canonical merge).
inline double symmetric_difference_measure(const SourceFunction& f) {
  if (!f.is_radial()) {
    const BumpSource& b = f.bump();
    const double d = b.center.norm();
    if (d <= 1e-15) return 0.0;  // centered bump is already symmetric
    // |B_rho(xi) \ B_rho(0)| + |B_rho(0) \ B_rho(xi)| via the equal-radius lens
    const double rho = b.radius;
    double overlap = 0.0;
    if (d < 2.0 * rho) {
      switch (b.dim()) {
        case 1: overlap = 2.0 * rho - d; break;
        case 2:
          overlap = 2.0 * rho * rho * std::acos(0.5 * d / rho) -
                    0.5 * d * std::sqrt(4.0 * rho * rho - d * d);
          break;
        default:
          overlap = std::numbers::pi * (4.0 * rho + d) * (2.0 * rho - d) * (2.0 * rho - d) / 12.0;
      }
    }
    return 2.0 * (ball_volume(b.dim(), rho) - overlap);
  }
  const RadialProfile a = f.profile().merged();
  const RadialProfile s = schwarz(f).merged();
  std::vector<double> edges;
  edges.push_back(0.0);
  edges.insert(edges.end(), a.breakpoints().begin(), a.breakpoints().end());
  edges.insert(edges.end(), s.breakpoints().begin(), s.breakpoints().end());
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  const int N = a.dim();
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double mid = 0.5 * (edges[i] + edges[i + 1]);
    if (a.value_at(mid) != s.value_at(mid))
      m += sphere_measure(N) / N *
           (std::pow(edges[i + 1], static_cast<double>(N)) - std::pow(edges[i], static_cast<double>(N)));
  }
  return m;
}

// Decreasing rearrangement of a sampled radial grid function, read as a step
// function on the shells (r_{i-1}, r_i] with value u(r_i). Ties keep the
// original radius order; volumes are preserved shell by shell.
inline RadialProfile rearrange_radial_samples(std::span<const double> radii,
                                              std::span<const double> values, int N) {
  if (radii.size() != values.size() || radii.empty())
    throw domain_error("rearrange_radial_samples: need one value per radius");
  double prev = 0.0;
  for (double r : radii) {
    if (!(r > prev) || r > 1.0 + 1e-12)
      throw domain_error("rearrange_radial_samples: radii must be strictly increasing in (0,1]");
    prev = r;
  }
  for (double v : values)
    if (!(v >= 0.0)) throw domain_error("rearrange_radial_samples: values must be >= 0");

  struct Shell {
    double value, vol_n;  // vol_n = r_i^N - r_{i-1}^N (unnormalized volume)
  };
  std::vector<Shell> shells(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double lo = i == 0 ? 0.0 : radii[i - 1];
    shells[i] = {values[i], std::pow(radii[i], static_cast<double>(N)) -
                                std::pow(lo, static_cast<double>(N))};
  }
  std::stable_sort(shells.begin(), shells.end(),
                   [](const Shell& a, const Shell& b) { return a.value > b.value; });
  std::vector<double> breaks, vals;
  double cum = 0.0;
  for (const Shell& sh : shells) {
    cum += sh.vol_n;
    const double r = std::pow(cum, 1.0 / N);
    if (!vals.empty() && vals.back() == sh.value) {
      breaks.back() = r;
    } else {
      breaks.push_back(r);
      vals.push_back(sh.value);
    }
  }
  // pad with zero out to the unit sphere so the profile is defined on all of B_1
  if (breaks.back() < 1.0 - 1e-12) {
    if (vals.back() == 0.0) {
      breaks.back() = 1.0;
    } else {
      breaks.push_back(1.0);
      vals.push_back(0.0);
    }
  } else {
    breaks.back() = 1.0;
  }
  return RadialProfile(N, std::move(breaks), std::move(vals));
}

// Boundary trace psi = u/delta^s sampled on a sphere rule.
struct BoundaryTrace {
  std::shared_ptr<const SphereRule> rule;
  std::vector<double> values;

  double min_value() const { return *std::min_element(values.begin(), values.end()); }
  double max_value() const { return *std::max_element(values.begin(), values.end()); }

  double mean() const {
    double acc = 0.0, w = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      acc += rule->weights[i] * values[i];
      w += rule->weights[i];
    }
    return acc / w;
  }
};

// Value h*(r) of the rearrangement of the angular model
// h(x) = psi(x/|x|) (1-|x|)^s, solved from
//   r^N = (1/omega) int_S (1 - (h*/psi(theta))^{1/s})_+^N dsigma(theta)
// by bisection; the right side is strictly decreasing in h*.
inline double angular_model_rearranged(const BoundaryTrace& psi, double s, double r) {
  if (!(s > 0.0)) throw domain_error("angular_model_rearranged: s must be > 0");
  if (!(r > 0.0) || !(r < 1.0)) throw domain_error("angular_model_rearranged: r must be in (0,1)");
  if (psi.values.empty() || psi.min_value() <= 0.0)
    throw domain_error("angular_model_rearranged: trace must be strictly positive");
  const int N = psi.rule->dim;
  const double omega = psi.rule->weight_sum();
  const double inv_s = 1.0 / s;
  auto rhs = [&](double h) {
    double acc = 0.0;
    for (std::size_t i = 0; i < psi.values.size(); ++i) {
      const double t = 1.0 - std::pow(h / psi.values[i], inv_s);
      if (t > 0.0) acc += psi.rule->weights[i] * std::pow(t, static_cast<double>(N));
    }
    return acc / omega;
  };
  const double target = std::pow(r, static_cast<double>(N));
  double lo = 0.0;
  double hi = 2.0 * psi.max_value() * std::pow(1.0 - r, s);
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rhs(mid) > target ? lo : hi) = mid;
  }
  if (hi - lo > 1e-12)
    throw convergence_error("angular_model_rearranged: bisection bracket did not close");
  return 0.5 * (lo + hi);
}

}  // namespace frac_talenti
