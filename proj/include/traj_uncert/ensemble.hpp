#pragma once

// Discrete approximate posterior over model weights: M mode sets per scene,
// plus the two trajectory-extraction schemes (Topk for single models, MBRM
// greedy risk minimization for ensembles).

#include <algorithm>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "traj_uncert/metrics.hpp"
#include "traj_uncert/scene.hpp"

namespace traj_uncert {

struct EnsemblePrediction {
  std::string scene_id;
  std::vector<ModeSet> members;
};

inline void validate_ensemble(const EnsemblePrediction& ensemble,
                              std::optional<std::size_t> expected_horizon = {}) {
  if (ensemble.members.empty()) {
    throw ValidationError("ensemble '" + ensemble.scene_id +
                          "': members must be nonempty");
  }
  const std::size_t horizon = expected_horizon.value_or(
      ensemble.members.front().modes.front().trajectory.length());
  for (std::size_t i = 0; i < ensemble.members.size(); ++i) {
    validate_mode_set(ensemble.members[i], horizon);
    for (std::size_t j = 0; j < i; ++j) {
      if (ensemble.members[j].model_id == ensemble.members[i].model_id) {
        throw ValidationError("ensemble '" + ensemble.scene_id +
                              "': duplicate model_id '" +
                              ensemble.members[i].model_id + "'");
      }
    }
  }
}

// The k highest-weight modes, descending; ties broken by lower mode index.
inline std::vector<Trajectory> topk(const ModeSet& member, int k) {
  if (k < 1 || static_cast<std::size_t>(k) > member.modes.size()) {
    throw ValidationError("topk: k out of range [1, " +
                          std::to_string(member.modes.size()) + "]");
  }
  std::vector<std::size_t> order(member.modes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return member.modes[a].weight > member.modes[b].weight;
  });
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    out.push_back(member.modes[order[static_cast<std::size_t>(i)]].trajectory);
  }
  return out;
}

namespace detail {

struct WeightedProposal {
  const Trajectory* trajectory;
  double weight;  // w_n^m / M, weights normalized per member
};

inline std::vector<WeightedProposal> weighted_proposals(
    const EnsemblePrediction& ensemble) {
  std::vector<WeightedProposal> out;
  const double m = static_cast<double>(ensemble.members.size());
  for (const ModeSet& member : ensemble.members) {
    double sum = 0.0;
    for (const Mode& mode : member.modes) {
      sum += mode.weight;
    }
    for (const Mode& mode : member.modes) {
      out.push_back({&mode.trajectory, mode.weight / (sum * m)});
    }
  }
  return out;
}

}  // namespace detail

// Expected weighted displacement of every ensemble proposal to its nearest
// selected trajectory: sum_{m,n} (w_n^m / M) * min_{s in selected} ADE(y_n^m, s).
inline double mbrm_objective(const EnsemblePrediction& ensemble,
                             std::span<const Trajectory> selected) {
  if (selected.empty()) {
    throw ValidationError("mbrm_objective: selected set must be nonempty");
  }
  double total = 0.0;
  for (const detail::WeightedProposal& p : detail::weighted_proposals(ensemble)) {
    double best = std::numeric_limits<double>::infinity();
    for (const Trajectory& s : selected) {
      best = std::min(best, average_displacement(*p.trajectory, s));
    }
    total += p.weight * best;
  }
  return total;
}

// Greedy forward selection of k trajectories from the candidate pool
// (default: the union of all members' modes), with a deterministic exchange
// refinement after every addition (plain forward selection lands outside
// the 1.05x-of-optimum band on a few percent of small pools). Ties break
// toward lower pool indices. Building size j+1 from the refined size-j set
// keeps the objective non-increasing in k.
inline std::vector<Trajectory> mbrm(const EnsemblePrediction& ensemble, int k,
                                    const std::vector<Trajectory>* candidate_pool = nullptr) {
  validate_ensemble(ensemble);
  if (k < 1) {
    throw ValidationError("mbrm: k must be >= 1");
  }
  std::vector<Trajectory> pool;
  if (candidate_pool) {
    pool = *candidate_pool;
  } else {
    for (const ModeSet& member : ensemble.members) {
      for (const Mode& mode : member.modes) {
        pool.push_back(mode.trajectory);
      }
    }
  }
  const std::size_t pool_size = pool.size();
  if (pool_size < static_cast<std::size_t>(k)) {
    throw ValidationError("mbrm: candidate pool smaller than k");
  }

  const std::vector<detail::WeightedProposal> proposals =
      detail::weighted_proposals(ensemble);
  const std::size_t n = proposals.size();
  // Displacement matrix proposals x pool.
  std::vector<double> d(n * pool_size);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < pool_size; ++j) {
      d[i * pool_size + j] =
          average_displacement(*proposals[i].trajectory, pool[j]);
    }
  }

  struct Search {
    const std::vector<detail::WeightedProposal>& proposals;
    const std::vector<double>& d;
    std::size_t pool_size;
    std::vector<std::size_t> selected;
    std::vector<bool> taken;
    double current{std::numeric_limits<double>::infinity()};

    Search(const std::vector<detail::WeightedProposal>& p,
           const std::vector<double>& dist, std::size_t pool)
        : proposals(p), d(dist), pool_size(pool), taken(pool, false) {}

    double objective_with(std::size_t skip_pos, std::size_t candidate) const {
      double obj = 0.0;
      for (std::size_t i = 0; i < proposals.size(); ++i) {
        double best = d[i * pool_size + candidate];
        for (std::size_t s = 0; s < selected.size(); ++s) {
          if (s != skip_pos) {
            best = std::min(best, d[i * pool_size + selected[s]]);
          }
        }
        obj += proposals[i].weight * best;
      }
      return obj;
    }

    // Adds the candidate that most reduces the objective.
    void add_best() {
      double best_obj = std::numeric_limits<double>::infinity();
      std::size_t best_j = pool_size;
      for (std::size_t j = 0; j < pool_size; ++j) {
        if (taken[j]) {
          continue;
        }
        const double obj = objective_with(selected.size(), j);
        if (obj < best_obj) {
          best_obj = obj;
          best_j = j;
        }
      }
      take(best_j);
      current = best_obj;
    }

    void take(std::size_t j) {
      taken[j] = true;
      selected.push_back(j);
    }

    // Best-improvement single swaps until a local optimum is reached.
    void refine() {
      for (std::size_t sweep = 0; sweep < 16 * pool_size; ++sweep) {
        double swap_obj = current;
        std::size_t swap_pos = selected.size();
        std::size_t swap_j = pool_size;
        for (std::size_t pos = 0; pos < selected.size(); ++pos) {
          for (std::size_t j = 0; j < pool_size; ++j) {
            if (taken[j]) {
              continue;
            }
            const double obj = objective_with(pos, j);
            if (obj < swap_obj) {
              swap_obj = obj;
              swap_pos = pos;
              swap_j = j;
            }
          }
        }
        if (swap_pos == selected.size()) {
          break;
        }
        taken[selected[swap_pos]] = false;
        taken[swap_j] = true;
        selected[swap_pos] = swap_j;
        current = swap_obj;
      }
    }
  };

  // Start 1: greedy forward selection, refined after every addition (keeps
  // the objective non-increasing in k).
  Search forward(proposals, d, pool_size);
  for (int round = 0; round < k; ++round) {
    forward.add_best();
    forward.refine();
  }

  // Start 2: the k individually best candidates (top medoids), refined.
  // Escapes the occasional local optimum of the forward construction.
  Search medoid(proposals, d, pool_size);
  {
    std::vector<std::pair<double, std::size_t>> singles;
    for (std::size_t j = 0; j < pool_size; ++j) {
      singles.push_back({medoid.objective_with(0, j), j});
    }
    std::stable_sort(singles.begin(), singles.end());
    for (int round = 0; round < k; ++round) {
      medoid.take(singles[static_cast<std::size_t>(round)].second);
    }
    medoid.current =
        medoid.objective_with(medoid.selected.size(), medoid.selected.front());
    medoid.refine();
  }

  const std::vector<std::size_t>& chosen =
      medoid.current < forward.current ? medoid.selected : forward.selected;
  std::vector<Trajectory> out;
  out.reserve(chosen.size());
  for (const std::size_t j : chosen) {
    out.push_back(pool[j]);
  }
  return out;
}

}  // namespace traj_uncert
