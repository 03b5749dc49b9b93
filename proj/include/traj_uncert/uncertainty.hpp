#pragma once

// Monte-Carlo decomposition of predictive uncertainty over trajectory
// endpoints: total entropy of the ensemble-averaged mixture, aleatoric as
// the mean per-member entropy, epistemic as their difference (the mutual
// information between predictions and model choice). Natural log throughout.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "traj_uncert/ensemble.hpp"
#include "traj_uncert/gmm.hpp"

namespace traj_uncert {

struct UncertaintyTriple {
  double total{0.0};
  double aleatoric{0.0};
  double epistemic{0.0};
};

struct EstimatorConfig {
  long n_per_model{1000};  // N'; every estimate uses N = N' * M samples
  std::uint64_t seed{0};
  double bandwidth{1.0};  // m^2, forwarded to gmm_from_modes
  // Total-entropy stage reuses the first N' draws of each member's
  // aleatoric stream instead of drawing fresh samples.
  bool reuse_samples{false};
  // Member streams keyed by model_id hash instead of member index; makes
  // results bit-identical under member permutation.
  bool seed_by_model_id{false};
};

// Entropy of one member's predictive mixture: negative mean log-density of
// n draws from the mixture itself. Deterministic given seed.
inline double member_entropy(const GaussianMixture2D& g, std::size_t n,
                             std::uint64_t seed) {
  if (n < 1) {
    throw ValidationError("member_entropy: n must be >= 1");
  }
  const MixtureDensity density(g);
  MixtureSampler sampler(g, seed);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += density.log_density(sampler.draw());
  }
  return -acc / static_cast<double>(n);
}

namespace detail {

inline constexpr std::uint64_t kTotalStreamSalt = 0x746f74616cULL;

}  // namespace detail

// Core estimator over already-continuous member distributions. model_ids is
// only consulted when config.seed_by_model_id is set.
inline UncertaintyTriple decompose_mixtures(
    std::span<const GaussianMixture2D> members, const EstimatorConfig& config,
    std::span<const std::string> model_ids = {}) {
  const std::size_t m_count = members.size();
  if (m_count == 0) {
    throw ValidationError("decompose: members must be nonempty");
  }
  if (config.n_per_model < 1) {
    throw ValidationError("decompose: n_per_model must be >= 1");
  }
  if (config.seed_by_model_id && model_ids.size() != m_count) {
    throw ValidationError("decompose: seed_by_model_id requires model ids");
  }

  // Canonical processing order: file order normally, model_id order when
  // streams are keyed by model_id (otherwise permutations would change the
  // floating-point accumulation order).
  std::vector<std::size_t> order(m_count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (config.seed_by_model_id) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return model_ids[a] < model_ids[b];
    });
  }
  std::vector<std::uint64_t> sub_seed(m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    sub_seed[m] = config.seed ^ (config.seed_by_model_id
                                     ? fnv1a64(model_ids[m])
                                     : static_cast<std::uint64_t>(m));
  }

  const std::size_t n_prime = static_cast<std::size_t>(config.n_per_model);
  const std::size_t n_total = n_prime * m_count;

  double aleatoric = 0.0;
  for (std::size_t m : order) {
    aleatoric += member_entropy(members[m], n_total, sub_seed[m]);
  }
  aleatoric /= static_cast<double>(m_count);

  if (m_count == 1) {
    // Point-mass posterior: the predictive distribution is the single
    // member's, so total coincides with aleatoric and the mutual
    // information is identically zero.
    return {aleatoric, aleatoric, 0.0};
  }

  std::vector<MixtureDensity> densities;
  densities.reserve(m_count);
  for (const GaussianMixture2D& g : members) {
    densities.emplace_back(g);
  }

  // N' draws per member, concatenated into N samples from the uniform
  // model average; scored under (1/M) sum_m p_m via log-sum-exp.
  const double log_m = std::log(static_cast<double>(m_count));
  double acc = 0.0;
  std::vector<double> logs(m_count);
  for (std::size_t m : order) {
    const std::uint64_t stream =
        config.reuse_samples ? sub_seed[m]
                             : derive_seed(sub_seed[m], detail::kTotalStreamSalt);
    MixtureSampler sampler(members[m], stream);
    for (std::size_t i = 0; i < n_prime; ++i) {
      const Vec2 y = sampler.draw();
      for (std::size_t j = 0; j < m_count; ++j) {
        logs[j] = densities[order[j]].log_density(y);
      }
      acc += log_sum_exp(logs) - log_m;
    }
  }
  const double total = -acc / static_cast<double>(n_total);
  return {total, aleatoric, total - aleatoric};
}

inline UncertaintyTriple decompose(const EnsemblePrediction& ensemble,
                                   const EstimatorConfig& config) {
  validate_ensemble(ensemble);
  std::vector<GaussianMixture2D> mixtures;
  std::vector<std::string> ids;
  mixtures.reserve(ensemble.members.size());
  ids.reserve(ensemble.members.size());
  for (const ModeSet& member : ensemble.members) {
    mixtures.push_back(gmm_from_modes(member, config.bandwidth));
    ids.push_back(member.model_id);
  }
  return decompose_mixtures(mixtures, config, ids);
}

// Variance-of-log-likelihood baseline: population variance over members of
// the ground-truth endpoint's log-density under each member's mixture.
inline double rip_epistemic(const EnsemblePrediction& ensemble,
                            const Trajectory& future, double bandwidth) {
  validate_ensemble(ensemble);
  validate_trajectory(future, "rip_epistemic: future");
  const Vec2 endpoint = future.endpoint();
  std::vector<double> logs;
  logs.reserve(ensemble.members.size());
  for (const ModeSet& member : ensemble.members) {
    logs.push_back(log_density(gmm_from_modes(member, bandwidth), endpoint));
  }
  // Identical members produce bitwise-equal log-densities; report an exact
  // zero rather than rounding residue from the mean.
  const bool all_equal =
      std::all_of(logs.begin(), logs.end(),
                  [&](double v) { return v == logs.front(); });
  if (all_equal) {
    return 0.0;
  }
  const double n = static_cast<double>(logs.size());
  double mean = 0.0;
  for (double v : logs) {
    mean += v;
  }
  mean /= n;
  double var = 0.0;
  for (double v : logs) {
    var += (v - mean) * (v - mean);
  }
  return var / n;
}

}  // namespace traj_uncert
