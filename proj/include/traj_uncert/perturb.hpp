#pragma once

// Out-of-distribution scene manipulations: revert/scramble the target
// history, black out the oldest half of every agent's history, delete
// three quarters of the lanes, and ordered combinations of these.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "traj_uncert/scene.hpp"

namespace traj_uncert {

enum class PerturbOp { kRevertEgo, kScrambleEgo, kBlackout, kLaneDeletion };

// Dataset labels, matching the figure/table legends these feed.
inline std::string_view perturb_label(PerturbOp op) {
  switch (op) {
    case PerturbOp::kRevertEgo:
      return "RevertEGO";
    case PerturbOp::kScrambleEgo:
      return "ScrambleEGO";
    case PerturbOp::kBlackout:
      return "Blackout";
    case PerturbOp::kLaneDeletion:
      return "LaneDeletion";
  }
  throw ValidationError("unknown perturbation op");
}

inline PerturbOp parse_perturb_op(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  lower.erase(std::remove(lower.begin(), lower.end(), '_'), lower.end());
  if (lower == "revertego") return PerturbOp::kRevertEgo;
  if (lower == "scrambleego") return PerturbOp::kScrambleEgo;
  if (lower == "blackout") return PerturbOp::kBlackout;
  if (lower == "lanedeletion") return PerturbOp::kLaneDeletion;
  throw ValidationError("unknown perturbation op '" + std::string(name) + "'");
}

struct PerturbationSpec {
  std::vector<PerturbOp> ops;
  std::uint64_t seed{0};
};

inline void validate_perturbation_spec(const PerturbationSpec& spec) {
  if (spec.ops.empty()) {
    throw ValidationError("perturbation spec: ops must be nonempty");
  }
  for (std::size_t i = 0; i < spec.ops.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (spec.ops[i] == spec.ops[j]) {
        throw ValidationError("perturbation spec: duplicate op '" +
                              std::string(perturb_label(spec.ops[i])) + "'");
      }
    }
  }
}

inline std::string joined_label(std::span<const PerturbOp> ops) {
  std::string tag;
  for (const PerturbOp op : ops) {
    if (!tag.empty()) {
      tag += '+';
    }
    tag += perturb_label(op);
  }
  return tag;
}

namespace detail {

inline AgentHistory& mutable_target(Scene& scene) {
  for (AgentHistory& agent : scene.agents) {
    if (agent.is_target) {
      return agent;
    }
  }
  throw ValidationError("scene '" + scene.scene_id + "': no target agent");
}

}  // namespace detail

// Reverses the target's positions in place; timestamps keep their order.
inline Scene revert_ego(Scene scene) {
  AgentHistory& target = detail::mutable_target(scene);
  const std::size_t n = target.states.size();
  for (std::size_t i = 0; i < n / 2; ++i) {
    std::swap(target.states[i].position, target.states[n - 1 - i].position);
  }
  scene.dataset_tag = perturb_label(PerturbOp::kRevertEgo);
  return scene;
}

// Fisher-Yates shuffle of the target's positions; timestamps keep order.
inline Scene scramble_ego(Scene scene, std::uint64_t seed) {
  AgentHistory& target = detail::mutable_target(scene);
  std::mt19937_64 rng(seed);
  for (std::size_t i = target.states.size(); i > 1; --i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    std::swap(target.states[i - 1].position, target.states[pick(rng)].position);
  }
  scene.dataset_tag = perturb_label(PerturbOp::kScrambleEgo);
  return scene;
}

// Zeroes the earliest ceil(T/2) positions of every agent.
inline Scene blackout(Scene scene) {
  for (AgentHistory& agent : scene.agents) {
    const std::size_t zeroed = (agent.states.size() + 1) / 2;
    for (std::size_t i = 0; i < zeroed; ++i) {
      agent.states[i].position = {0.0, 0.0};
    }
  }
  scene.dataset_tag = perturb_label(PerturbOp::kBlackout);
  return scene;
}

// Retains a uniformly random ceil(L/4) of the lanes (never below one),
// preserving their original order.
inline Scene lane_deletion(Scene scene, std::uint64_t seed) {
  const std::size_t n = scene.lanes.size();
  if (n > 0) {
    const std::size_t keep = (n + 3) / 4;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(idx[i - 1], idx[pick(rng)]);
    }
    idx.resize(keep);
    std::sort(idx.begin(), idx.end());
    std::vector<LanePolyline> kept;
    kept.reserve(keep);
    for (const std::size_t i : idx) {
      kept.push_back(std::move(scene.lanes[i]));
    }
    scene.lanes = std::move(kept);
  }
  scene.dataset_tag = perturb_label(PerturbOp::kLaneDeletion);
  return scene;
}

// Applies ops in listed order to every scene; per-scene randomness derives
// from spec.seed and the scene id, so results are order- and
// scheduling-independent. dataset_tag becomes e.g. "Blackout+LaneDeletion".
inline std::vector<Scene> apply(const PerturbationSpec& spec,
                                std::span<const Scene> scenes) {
  validate_perturbation_spec(spec);
  const std::string tag = joined_label(spec.ops);
  std::vector<Scene> out;
  out.reserve(scenes.size());
  for (const Scene& original : scenes) {
    Scene scene = original;
    const std::uint64_t scene_seed = spec.seed ^ fnv1a64(scene.scene_id);
    for (std::size_t op_index = 0; op_index < spec.ops.size(); ++op_index) {
      const std::uint64_t op_seed = derive_seed(scene_seed, op_index);
      switch (spec.ops[op_index]) {
        case PerturbOp::kRevertEgo:
          scene = revert_ego(std::move(scene));
          break;
        case PerturbOp::kScrambleEgo:
          scene = scramble_ego(std::move(scene), op_seed);
          break;
        case PerturbOp::kBlackout:
          scene = blackout(std::move(scene));
          break;
        case PerturbOp::kLaneDeletion:
          scene = lane_deletion(std::move(scene), op_seed);
          break;
      }
    }
    scene.dataset_tag = tag;
    out.push_back(std::move(scene));
  }
  return out;
}

}  // namespace traj_uncert
