#pragma once

#include <cmath>
#include <numbers>

#include "frac_talenti/common.hpp"

namespace frac_talenti {

// Two conventions for the Martin kernel normalization. GreenLimit is the
// limit of 2 G(y,z) / (1-|z|^2)^s, which is what the explicit ball formula
// produces. DeltaLimit is the limit of G(y,z) / delta^s(z) with
// delta(z) = 1 - |z|; the two differ by the factor 2^{s-1}. DeltaLimit is
// the convention under which boundary traces reproduce u / (1-|x|)^s and is
// pinned by the torsion solution; it is the artifact default.
enum class Normalization { GreenLimit, DeltaLimit };

inline const char* to_string(Normalization n) {
  return n == Normalization::GreenLimit ? "green" : "delta";
}

struct ProblemParams {
  int dim = 1;       // N
  double order = 0.5;  // s
  Normalization normalization = Normalization::DeltaLimit;

  // The N = 2s Green function takes a separate logarithmic form.
  bool log_branch() const { return std::abs(2.0 * order - dim) <= 1e-12; }

  void validate() const {
    if (dim < 1) throw domain_error("ProblemParams: N must be >= 1");
    if (!(order > 0.0)) throw domain_error("ProblemParams: s must be > 0");
  }
};

// ln Gamma(x) for x > 0, Lanczos approximation (g = 7, n = 9). Relative
// accuracy is ~1e-15 over the range used here.
inline double log_gamma(double x) {
  if (!(x > 0.0)) throw domain_error("log_gamma: argument must be positive");
  static constexpr double g = 7.0;
  static constexpr double coeff[9] = {
      0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
      771.32342877765313,       -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};
  if (x < 0.5) {
    // Reflection: ln Gamma(x) = ln(pi / sin(pi x)) - ln Gamma(1 - x).
    return std::log(std::numbers::pi / std::sin(std::numbers::pi * x)) - log_gamma(1.0 - x);
  }
  const double z = x - 1.0;
  double sum = coeff[0];
  for (int i = 1; i < 9; ++i) sum += coeff[i] / (z + static_cast<double>(i));
  const double t = z + g + 0.5;
  return 0.5 * std::log(2.0 * std::numbers::pi) + (z + 0.5) * std::log(t) - t + std::log(sum);
}

inline double beta_function(double a, double b) {
  return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

// kappa_{N,s} = Gamma(N/2) / (pi^{N/2} 4^s Gamma(s)^2).
inline double kappa(int N, double s) {
  if (N < 1) throw domain_error("kappa: N must be >= 1");
  if (!(s > 0.0)) throw domain_error("kappa: s must be > 0");
  const double halfN = 0.5 * static_cast<double>(N);
  return std::exp(log_gamma(halfN) - halfN * std::log(std::numbers::pi) -
                  s * std::log(4.0) - 2.0 * log_gamma(s));
}

// c_{N,s} = s 4^s Gamma(N/2 + s) / (pi^{N/2} Gamma(1-s)), the constant of the
// pointwise singular-integral operator. Reported for reference only; it has a
// pole at every positive integer s. Computed through the reflection formula
// Gamma(1-s) = pi / (sin(pi s) Gamma(s)) so that s > 1 is also covered.
inline double c_constant(int N, double s) {
  if (N < 1) throw domain_error("c_constant: N must be >= 1");
  if (!(s > 0.0)) throw domain_error("c_constant: s must be > 0");
  if (std::abs(s - std::round(s)) < 1e-12)
    throw domain_error("c_constant: undefined at integer s (Gamma(1-s) pole)");
  const double halfN = 0.5 * static_cast<double>(N);
  const double mag = std::exp(std::log(s) + s * std::log(4.0) + log_gamma(halfN + s) +
                              log_gamma(s) - (halfN + 1.0) * std::log(std::numbers::pi));
  return mag * std::sin(std::numbers::pi * s);
}

// omega_{N-1} = 2 pi^{N/2} / Gamma(N/2), the measure of S^{N-1}.
inline double sphere_measure(int N) {
  if (N < 1) throw domain_error("sphere_measure: N must be >= 1");
  const double halfN = 0.5 * static_cast<double>(N);
  return 2.0 * std::exp(halfN * std::log(std::numbers::pi) - log_gamma(halfN));
}

// |B_r(0)| in R^N.
inline double ball_volume(int N, double r) {
  return sphere_measure(N) / static_cast<double>(N) * std::pow(r, static_cast<double>(N));
}

}  // namespace frac_talenti
