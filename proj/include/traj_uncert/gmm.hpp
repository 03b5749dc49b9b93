#pragma once

// 2-D Gaussian mixtures over trajectory endpoints: EM fitting, exact
// log-density scoring via log-sum-exp, seeded sampling, and the analytic
// bivariate-Gaussian entropy used as a test oracle.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "traj_uncert/scene.hpp"

namespace traj_uncert {

inline constexpr double kLogTwoPi = 1.8378770664093453;

struct GaussianComponent {
  double weight{0.0};
  Vec2 mean;
  SymMat2 covariance;
};

struct GaussianMixture2D {
  std::vector<GaussianComponent> components;
};

inline void validate_mixture(const GaussianMixture2D& g,
                             double min_eigenvalue = 0.0) {
  if (g.components.empty()) {
    throw ValidationError("mixture: components must be nonempty");
  }
  double weight_sum = 0.0;
  for (const GaussianComponent& c : g.components) {
    if (!(c.weight >= 0.0)) {
      throw ValidationError("mixture: weights must be nonnegative");
    }
    weight_sum += c.weight;
    if (!c.mean.is_finite()) {
      throw ValidationError("mixture: means must be finite");
    }
    const auto [lo, hi] = c.covariance.eigenvalues();
    if (!(lo > 0.0) || !std::isfinite(hi)) {
      throw ValidationError("mixture: covariance must be positive definite");
    }
    if (lo + 1e-12 < min_eigenvalue) {
      throw ValidationError("mixture: covariance eigenvalue below floor");
    }
  }
  if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
    throw ValidationError("mixture: weights must sum to 1");
  }
}

// Precomputed scorer; log_density is the hot path of the MC estimators.
class MixtureDensity {
 public:
  explicit MixtureDensity(const GaussianMixture2D& g) {
    terms_.reserve(g.components.size());
    for (const GaussianComponent& c : g.components) {
      if (c.weight <= 0.0) {
        continue;  // zero-weight components contribute nothing
      }
      const double det = c.covariance.det();
      if (!(det > 0.0) || !(c.covariance.xx > 0.0)) {
        throw ValidationError("mixture: covariance must be positive definite");
      }
      Term t;
      t.mean = c.mean;
      t.log_scale = std::log(c.weight) - kLogTwoPi - 0.5 * std::log(det);
      t.inv_xx = c.covariance.yy / det;
      t.inv_xy = -c.covariance.xy / det;
      t.inv_yy = c.covariance.xx / det;
      terms_.push_back(t);
    }
    if (terms_.empty()) {
      throw ValidationError("mixture: no component has positive weight");
    }
  }

  // Streaming log-sum-exp; safe to call concurrently on a shared instance.
  double log_density(Vec2 p) const {
    double mx = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const Term& t : terms_) {
      const double dx = p.x - t.mean.x;
      const double dy = p.y - t.mean.y;
      const double quad =
          t.inv_xx * dx * dx + 2.0 * t.inv_xy * dx * dy + t.inv_yy * dy * dy;
      const double v = t.log_scale - 0.5 * quad;
      if (v == -std::numeric_limits<double>::infinity()) {
        continue;  // fully underflowed component: contributes nothing
      }
      if (v <= mx) {
        sum += std::exp(v - mx);
      } else {
        sum = sum * std::exp(mx - v) + 1.0;
        mx = v;
      }
    }
    return mx + std::log(sum);
  }

 private:
  struct Term {
    Vec2 mean;
    double log_scale;
    double inv_xx, inv_xy, inv_yy;
  };
  std::vector<Term> terms_;
};

inline double log_density(const GaussianMixture2D& g, Vec2 point) {
  return MixtureDensity(g).log_density(point);
}

// Seeded, reproducible mixture sampler: categorical over weights, then a
// Gaussian draw through the Cholesky factor of the chosen covariance.
class MixtureSampler {
 public:
  MixtureSampler(const GaussianMixture2D& g, std::uint64_t seed)
      : rng_(seed) {
    double acc = 0.0;
    for (const GaussianComponent& c : g.components) {
      acc += c.weight;
      cdf_.push_back(acc);
      chol_.push_back(c.covariance.cholesky());
      means_.push_back(c.mean);
    }
    cdf_.back() = std::numeric_limits<double>::infinity();
  }

  Vec2 draw() {
    const double u = uniform_(rng_);
    std::size_t idx = 0;
    while (cdf_[idx] <= u) {
      ++idx;
    }
    const double z0 = normal_(rng_);
    const double z1 = normal_(rng_);
    const SymMat2::Cholesky& l = chol_[idx];
    return {means_[idx].x + l.l11 * z0, means_[idx].y + l.l21 * z0 + l.l22 * z1};
  }

 private:
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::vector<double> cdf_;
  std::vector<SymMat2::Cholesky> chol_;
  std::vector<Vec2> means_;
};

inline std::vector<Vec2> sample(const GaussianMixture2D& g, std::size_t n,
                                std::uint64_t seed) {
  if (n < 1) {
    throw ValidationError("sample: n must be >= 1");
  }
  MixtureSampler sampler(g, seed);
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(sampler.draw());
  }
  return out;
}

// Differential entropy of a bivariate Gaussian: 1 + ln(2*pi) + ln(det)/2.
inline double gaussian_entropy(const SymMat2& covariance) {
  if (!covariance.positive_definite()) {
    throw ValidationError("gaussian_entropy: covariance must be positive definite");
  }
  return 1.0 + kLogTwoPi + 0.5 * std::log(covariance.det());
}

// Continuous form of a point-trajectory prediction: one isotropic component
// per mode, centered at the mode's endpoint.
inline GaussianMixture2D gmm_from_modes(const ModeSet& modes,
                                        double bandwidth) {
  validate_mode_set(modes);
  if (!(bandwidth > 0.0)) {
    throw ValidationError("gmm_from_modes: bandwidth must be positive");
  }
  GaussianMixture2D g;
  g.components.reserve(modes.modes.size());
  for (const Mode& mode : modes.modes) {
    g.components.push_back({mode.weight, mode.trajectory.endpoint(),
                            SymMat2::isotropic(bandwidth)});
  }
  return g;
}

struct FitConfig {
  int n_components{1};
  int max_iters{200};
  double tol{1e-6};        // relative log-likelihood change
  double cov_floor{1e-6};  // minimum covariance eigenvalue, m^2
  std::uint64_t seed{0};
};

namespace detail {

inline double component_log_density(const GaussianComponent& c, Vec2 p) {
  const double det = c.covariance.det();
  const double dx = p.x - c.mean.x;
  const double dy = p.y - c.mean.y;
  const double quad = (c.covariance.yy * dx * dx - 2.0 * c.covariance.xy * dx * dy +
                       c.covariance.xx * dy * dy) /
                      det;
  return -kLogTwoPi - 0.5 * std::log(det) - 0.5 * quad;
}

// k-means++-style seeding: first center drawn by point weight, subsequent
// centers by weight times squared distance to the nearest chosen center.
inline std::vector<Vec2> seed_centers(std::span<const Vec2> points,
                                      std::span<const double> weights, int k,
                                      std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const auto draw_index = [&](std::span<const double> mass) -> std::size_t {
    double total = 0.0;
    for (double m : mass) {
      total += m;
    }
    if (!(total > 0.0)) {
      return 0;  // degenerate (e.g. all points identical): lowest index
    }
    const double u = uniform(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < mass.size(); ++i) {
      acc += mass[i];
      if (acc >= u) {
        return i;
      }
    }
    return mass.size() - 1;
  };

  std::vector<Vec2> centers;
  std::vector<double> mass(weights.begin(), weights.end());
  centers.push_back(points[draw_index(mass)]);
  std::vector<double> d2(points.size());
  while (static_cast<int>(centers.size()) < k) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      double best = (points[i] - centers.front()).squared_norm();
      for (std::size_t c = 1; c < centers.size(); ++c) {
        best = std::min(best, (points[i] - centers[c]).squared_norm());
      }
      d2[i] = best;
      mass[i] = weights[i] * best;
    }
    centers.push_back(points[draw_index(mass)]);
  }
  return centers;
}

}  // namespace detail

// Weighted EM fit of a 2-D GMM. Deterministic given config.seed. The
// optional trace receives the weighted log-likelihood at the start of every
// iteration plus the final value; it is non-decreasing up to floating point.
inline GaussianMixture2D fit_gmm(std::span<const Vec2> points,
                                 std::span<const double> weights,
                                 const FitConfig& config,
                                 std::vector<double>* log_likelihood_trace = nullptr) {
  const std::size_t n = points.size();
  const int k = config.n_components;
  if (k < 1) {
    throw ValidationError("fit_gmm: n_components must be >= 1");
  }
  if (n < static_cast<std::size_t>(k)) {
    throw ValidationError("fit_gmm: too few points for " + std::to_string(k) +
                          " components");
  }
  if (!(config.tol > 0.0) || !(config.cov_floor > 0.0) || config.max_iters < 1) {
    throw ValidationError("fit_gmm: invalid config");
  }
  for (const Vec2& p : points) {
    if (!p.is_finite()) {
      throw ValidationError("fit_gmm: points must be finite");
    }
  }

  // Normalized point weights (uniform when none are given).
  std::vector<double> pw(n, 1.0 / static_cast<double>(n));
  if (!weights.empty()) {
    if (weights.size() != n) {
      throw ValidationError("fit_gmm: weights size must match points");
    }
    double sum = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) {
        throw ValidationError("fit_gmm: weights must be nonnegative");
      }
      sum += w;
    }
    if (std::abs(sum - 1.0) > kWeightSumTolerance) {
      throw ValidationError("fit_gmm: weights must sum to 1");
    }
    for (std::size_t i = 0; i < n; ++i) {
      pw[i] = weights[i] / sum;
    }
  }

  const auto weighted_moments = [&](std::span<const double> resp_col,
                                    double mass) -> GaussianComponent {
    GaussianComponent c;
    c.weight = mass;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mx += resp_col[i] * points[i].x;
      my += resp_col[i] * points[i].y;
    }
    c.mean = {mx / mass, my / mass};
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double dx = points[i].x - c.mean.x;
      const double dy = points[i].y - c.mean.y;
      sxx += resp_col[i] * dx * dx;
      sxy += resp_col[i] * dx * dy;
      syy += resp_col[i] * dy * dy;
    }
    c.covariance =
        SymMat2{sxx / mass, sxy / mass, syy / mass}.floored(config.cov_floor);
    return c;
  };

  // Initialization: k-means++ centers, hard assignment, empirical moments,
  // uniform mixture weights.
  std::mt19937_64 rng(config.seed);
  const std::vector<Vec2> centers = detail::seed_centers(points, pw, k, rng);
  std::vector<GaussianComponent> comps(static_cast<std::size_t>(k));
  {
    std::vector<double> col(n);
    for (int c = 0; c < k; ++c) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        double best_d = (points[i] - centers[0]).squared_norm();
        for (int j = 1; j < k; ++j) {
          const double d = (points[i] - centers[j]).squared_norm();
          if (d < best_d) {
            best_d = d;
            best = static_cast<std::size_t>(j);
          }
        }
        col[i] = (best == static_cast<std::size_t>(c)) ? pw[i] : 0.0;
        mass += col[i];
      }
      if (mass > 0.0) {
        comps[c] = weighted_moments(col, mass);
      } else {
        comps[c] = {0.0, centers[c], SymMat2::isotropic(config.cov_floor)};
      }
      comps[c].weight = 1.0 / static_cast<double>(k);
    }
  }

  std::vector<double> resp(n * static_cast<std::size_t>(k));
  std::vector<double> point_ll(n);
  const auto e_step = [&]() -> double {
    double ll = 0.0;
    std::vector<double> logs(static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        logs[c] = std::log(comps[c].weight) +
                  detail::component_log_density(comps[c], points[i]);
      }
      const double lse = log_sum_exp(logs);
      point_ll[i] = lse;
      for (int c = 0; c < k; ++c) {
        resp[i * k + c] = std::exp(logs[c] - lse);
      }
      ll += pw[i] * lse;
    }
    return ll;
  };

  double prev_ll = -std::numeric_limits<double>::infinity();
  std::vector<double> col(n);
  for (int iter = 0; iter <= config.max_iters; ++iter) {
    const double ll = e_step();
    if (log_likelihood_trace) {
      log_likelihood_trace->push_back(ll);
    }
    const bool converged =
        iter > 0 && std::abs(ll - prev_ll) <= config.tol * std::max(1.0, std::abs(prev_ll));
    if (converged || iter == config.max_iters) {
      break;
    }
    prev_ll = ll;

    // M step.
    for (int c = 0; c < k; ++c) {
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        col[i] = pw[i] * resp[i * k + c];
        mass += col[i];
      }
      if (mass < 1e-12) {
        // Collapsed component: re-seed at the point the mixture currently
        // explains worst, with the global data covariance.
        std::size_t worst = 0;
        for (std::size_t i = 1; i < n; ++i) {
          if (point_ll[i] < point_ll[worst]) {
            worst = i;
          }
        }
        std::vector<double> all(pw.begin(), pw.end());
        GaussianComponent fresh = weighted_moments(all, 1.0);
        comps[c] = {1.0 / static_cast<double>(k), points[worst],
                    fresh.covariance};
        continue;
      }
      comps[c] = weighted_moments(col, mass);
    }
    double total = 0.0;
    for (const GaussianComponent& c : comps) {
      total += c.weight;
    }
    for (GaussianComponent& c : comps) {
      c.weight /= total;
    }
  }

  GaussianMixture2D out{std::move(comps)};
  validate_mixture(out);
  return out;
}

inline GaussianMixture2D fit_gmm(std::span<const Vec2> points,
                                 const FitConfig& config,
                                 std::vector<double>* trace = nullptr) {
  return fit_gmm(points, std::span<const double>{}, config, trace);
}

}  // namespace traj_uncert
