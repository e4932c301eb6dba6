#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace frac_talenti {

// Error taxonomy. domain_error: invalid arguments or out-of-contract inputs.
// condition_error: a stated admissibility condition fails (CLI exit 2).
// divergence_error: the requested quantity has no finite value.
// convergence_error: an iteration or refinement budget ran out (CLI exit 3).
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct domain_error : numeric_error {
  using numeric_error::numeric_error;
};
struct condition_error : domain_error {
  using domain_error::domain_error;
};
struct divergence_error : numeric_error {
  using numeric_error::numeric_error;
};
struct convergence_error : numeric_error {
  using numeric_error::numeric_error;
};

// Point in R^N for N <= 3; carries its dimension.
class Point {
 public:
  Point() = default;
  explicit Point(double x) : dim_(1), c_{x, 0.0, 0.0} {}
  Point(double x, double y) : dim_(2), c_{x, y, 0.0} {}
  Point(double x, double y, double z) : dim_(3), c_{x, y, z} {}

  static Point zero(int dim) {
    Point p;
    p.dim_ = check_dim(dim);
    return p;
  }
  // Scalar radius placed on the first coordinate axis.
  static Point on_axis(int dim, double r) {
    Point p = zero(dim);
    p.c_[0] = r;
    return p;
  }

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  double norm_sq() const { return c_[0] * c_[0] + c_[1] * c_[1] + c_[2] * c_[2]; }
  double norm() const { return std::sqrt(norm_sq()); }

  friend Point operator+(Point a, const Point& b) {
    for (int i = 0; i < 3; ++i) a.c_[static_cast<std::size_t>(i)] += b.c_[static_cast<std::size_t>(i)];
    return a;
  }
  friend Point operator-(Point a, const Point& b) {
    for (int i = 0; i < 3; ++i) a.c_[static_cast<std::size_t>(i)] -= b.c_[static_cast<std::size_t>(i)];
    return a;
  }
  friend Point operator*(double t, Point a) {
    for (auto& v : a.c_) v *= t;
    return a;
  }

  friend double dot(const Point& a, const Point& b) {
    return a.c_[0] * b.c_[0] + a.c_[1] * b.c_[1] + a.c_[2] * b.c_[2];
  }
  friend double dist_sq(const Point& a, const Point& b) {
    const double d0 = a.c_[0] - b.c_[0];
    const double d1 = a.c_[1] - b.c_[1];
    const double d2 = a.c_[2] - b.c_[2];
    return d0 * d0 + d1 * d1 + d2 * d2;
  }
  friend double dist(const Point& a, const Point& b) { return std::sqrt(dist_sq(a, b)); }

 private:
  static int check_dim(int dim) {
    if (dim < 1 || dim > 3) throw domain_error("Point: dimension must be 1, 2 or 3");
    return dim;
  }

  int dim_ = 0;
  std::array<double, 3> c_{};
};

// Uniform double in [0,1) from a mt19937_64 stream. We do not use
// std::uniform_real_distribution because its output sequence is
// implementation-defined, which would break byte-identical reports.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double a, double b) {
  return a + (b - a) * uniform01(rng);
}

}  // namespace frac_talenti
