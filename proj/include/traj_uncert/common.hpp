#pragma once

// Shared value types, seed derivation, and small numeric helpers used by
// every module in the library.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>

namespace traj_uncert {

// Input data or arguments violate a documented contract; the CLI maps this
// (and IoError) to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Vec2 {
  double x{0.0};
  double y{0.0};

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
  friend bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
  bool is_finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Symmetric 2x2 matrix; the covariance type of every density in this library.
struct SymMat2 {
  double xx{0.0};
  double xy{0.0};
  double yy{0.0};

  static SymMat2 isotropic(double v) { return {v, 0.0, v}; }

  double det() const { return xx * yy - xy * xy; }
  double trace() const { return xx + yy; }

  friend bool operator==(const SymMat2& a, const SymMat2& b) {
    return a.xx == b.xx && a.xy == b.xy && a.yy == b.yy;
  }

  // Eigenvalues in ascending order (closed form for the symmetric 2x2 case).
  std::pair<double, double> eigenvalues() const {
    const double mean = 0.5 * (xx + yy);
    const double dev = std::hypot(0.5 * (xx - yy), xy);
    return {mean - dev, mean + dev};
  }

  bool positive_definite() const {
    const auto [lo, hi] = eigenvalues();
    return std::isfinite(hi) && lo > 0.0;
  }

  // Clamps both eigenvalues to at least min_eig, keeping the eigenbasis.
  SymMat2 floored(double min_eig) const {
    const auto [lo, hi] = eigenvalues();
    if (lo >= min_eig) {
      return *this;
    }
    if (std::abs(xy) < 1e-300) {
      return {std::max(xx, min_eig), 0.0, std::max(yy, min_eig)};
    }
    // Eigenvector for the larger eigenvalue: (xy, hi - xx), normalized.
    double ux = xy;
    double uy = hi - xx;
    const double n = std::hypot(ux, uy);
    ux /= n;
    uy /= n;
    const double l_hi = std::max(hi, min_eig);
    const double l_lo = std::max(lo, min_eig);
    // A = l_hi * u u^T + l_lo * w w^T with w = (-uy, ux).
    return {l_hi * ux * ux + l_lo * uy * uy,
            (l_hi - l_lo) * ux * uy,
            l_hi * uy * uy + l_lo * ux * ux};
  }

  struct Cholesky {
    double l11;
    double l21;
    double l22;
  };

  // Lower-triangular factor L with L L^T = *this; requires SPD.
  Cholesky cholesky() const {
    if (!(xx > 0.0)) {
      throw ValidationError("covariance is not positive definite");
    }
    const double l11 = std::sqrt(xx);
    const double l21 = xy / l11;
    const double rest = yy - l21 * l21;
    if (!(rest > 0.0)) {
      throw ValidationError("covariance is not positive definite");
    }
    return {l11, l21, std::sqrt(rest)};
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Stable 64-bit string hash (FNV-1a); std::hash is not pinned across
// implementations, and seed derivations must be reproducible.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

// Decorrelates streams derived from one base seed for different purposes.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t salt) {
  return splitmix64(base ^ splitmix64(salt));
}

inline double log_sum_exp(std::span<const double> values) {
  double mx = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    mx = std::max(mx, v);
  }
  if (!std::isfinite(mx)) {
    return mx;
  }
  double sum = 0.0;
  for (double v : values) {
    sum += std::exp(v - mx);
  }
  return mx + std::log(sum);
}

}  // namespace traj_uncert
