#pragma once

// Independent reference implementations used as test oracles. These must
// stay naive and separate from the library code paths they check.

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "traj_uncert/ensemble.hpp"
#include "traj_uncert/gmm.hpp"
#include "traj_uncert/scene.hpp"

namespace traj_uncert::oracle {

inline double ade(const Trajectory& a, const Trajectory& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    const double dx = a.points[i].x - b.points[i].x;
    const double dy = a.points[i].y - b.points[i].y;
    sum += std::sqrt(dx * dx + dy * dy);
  }
  return sum / static_cast<double>(a.points.size());
}

inline double brute_min_ade(const std::vector<Trajectory>& proposals,
                            const Trajectory& gt, int k) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    best = std::min(best, ade(proposals[static_cast<std::size_t>(i)], gt));
  }
  return best;
}

inline double brute_min_fde(const std::vector<Trajectory>& proposals,
                            const Trajectory& gt, int k) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    const Vec2 p = proposals[static_cast<std::size_t>(i)].points.back();
    const Vec2 g = gt.points.back();
    best = std::min(best, std::hypot(p.x - g.x, p.y - g.y));
  }
  return best;
}

inline double mixture_pdf(const GaussianMixture2D& g, double x, double y) {
  double p = 0.0;
  for (const GaussianComponent& c : g.components) {
    const double det = c.covariance.det();
    const double dx = x - c.mean.x;
    const double dy = y - c.mean.y;
    const double quad = (c.covariance.yy * dx * dx -
                         2.0 * c.covariance.xy * dx * dy +
                         c.covariance.xx * dy * dy) /
                        det;
    p += c.weight / (2.0 * std::numbers::pi * std::sqrt(det)) *
         std::exp(-0.5 * quad);
  }
  return p;
}

struct GridBox {
  double x_lo, x_hi, y_lo, y_hi;
};

// Bounding box covering +-sigmas standard deviations of every component.
inline GridBox mixture_box(const GaussianMixture2D& g, double sigmas) {
  GridBox box{1e300, -1e300, 1e300, -1e300};
  for (const GaussianComponent& c : g.components) {
    const double radius = sigmas * std::sqrt(c.covariance.eigenvalues().second);
    box.x_lo = std::min(box.x_lo, c.mean.x - radius);
    box.x_hi = std::max(box.x_hi, c.mean.x + radius);
    box.y_lo = std::min(box.y_lo, c.mean.y - radius);
    box.y_hi = std::max(box.y_hi, c.mean.y + radius);
  }
  return box;
}

// Midpoint-rule integral of -p log p over a grid covering +-sigmas of all
// components.
inline double grid_entropy(const GaussianMixture2D& g, double step,
                           double sigmas = 8.0) {
  const GridBox box = mixture_box(g, sigmas);
  double acc = 0.0;
  for (double x = box.x_lo + 0.5 * step; x < box.x_hi; x += step) {
    for (double y = box.y_lo + 0.5 * step; y < box.y_hi; y += step) {
      const double p = mixture_pdf(g, x, y);
      if (p > 0.0) {
        acc -= p * std::log(p);
      }
    }
  }
  return acc * step * step;
}

inline double grid_mass(const GaussianMixture2D& g, double step,
                        double sigmas = 8.0) {
  const GridBox box = mixture_box(g, sigmas);
  double acc = 0.0;
  for (double x = box.x_lo + 0.5 * step; x < box.x_hi; x += step) {
    for (double y = box.y_lo + 0.5 * step; y < box.y_hi; y += step) {
      acc += mixture_pdf(g, x, y);
    }
  }
  return acc * step * step;
}

// Exhaustive search over all size-k subsets of the pool; returns the best
// objective value (the quantity mbrm approximates greedily).
inline double exhaustive_mbrm_objective(const EnsemblePrediction& ensemble,
                                        const std::vector<Trajectory>& pool,
                                        int k) {
  std::vector<std::size_t> indices(static_cast<std::size_t>(k));
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = pool.size();
  const auto evaluate = [&]() {
    std::vector<Trajectory> subset;
    for (const std::size_t i : indices) {
      subset.push_back(pool[i]);
    }
    best = std::min(best, mbrm_objective(ensemble, subset));
  };
  // Iterative combination enumeration.
  for (std::size_t i = 0; i < indices.size(); ++i) {
    indices[i] = i;
  }
  for (;;) {
    evaluate();
    int pos = k - 1;
    while (pos >= 0 &&
           indices[static_cast<std::size_t>(pos)] ==
               n - static_cast<std::size_t>(k - pos)) {
      --pos;
    }
    if (pos < 0) {
      break;
    }
    ++indices[static_cast<std::size_t>(pos)];
    for (std::size_t i = static_cast<std::size_t>(pos) + 1;
         i < indices.size(); ++i) {
      indices[i] = indices[i - 1] + 1;
    }
  }
  return best;
}

// Raw-sums Pearson formula; intentionally a different route than the
// library's running-moments implementation.
inline double raw_sums_pearson(const std::vector<double>& xs,
                               const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    syy += ys[i] * ys[i];
    sxy += xs[i] * ys[i];
  }
  return (n * sxy - sx * sy) /
         std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

inline Trajectory random_trajectory(std::mt19937_64& rng, std::size_t length,
                                    double extent = 20.0) {
  std::uniform_real_distribution<double> uni(-extent, extent);
  Trajectory t;
  for (std::size_t i = 0; i < length; ++i) {
    t.points.push_back({uni(rng), uni(rng)});
  }
  return t;
}

inline ModeSet random_mode_set(std::mt19937_64& rng, const std::string& id,
                               std::size_t modes, std::size_t length) {
  std::uniform_real_distribution<double> uni(0.1, 1.0);
  ModeSet ms;
  ms.model_id = id;
  std::vector<double> w(modes);
  double sum = 0.0;
  for (double& v : w) {
    v = uni(rng);
    sum += v;
  }
  for (std::size_t m = 0; m < modes; ++m) {
    ms.modes.push_back({random_trajectory(rng, length), w[m] / sum});
  }
  return ms;
}

// Random SPD covariance with eigenvalues in [lo, hi].
inline SymMat2 random_spd(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> eig(lo, hi);
  std::uniform_real_distribution<double> ang(0.0, std::numbers::pi);
  const double l1 = eig(rng), l2 = eig(rng), a = ang(rng);
  const double c = std::cos(a), s = std::sin(a);
  return {l1 * c * c + l2 * s * s, (l1 - l2) * c * s, l1 * s * s + l2 * c * c};
}

}  // namespace traj_uncert::oracle
