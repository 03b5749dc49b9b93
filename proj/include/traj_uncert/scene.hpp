#pragma once

// Scene/prediction data model: the substrate every other module consumes.
// Coordinates are agent-centric meters in the target agent's frame at the
// last observed timestep; timestamps are seconds.

#include <optional>
#include <string>
#include <vector>

#include "traj_uncert/common.hpp"

namespace traj_uncert {

inline constexpr double kWeightSumTolerance = 1e-9;

struct Trajectory {
  std::vector<Vec2> points;

  std::size_t length() const { return points.size(); }
  const Vec2& endpoint() const { return points.back(); }

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct AgentState {
  Vec2 position;
  double timestamp{0.0};

  friend bool operator==(const AgentState&, const AgentState&) = default;
};

struct AgentHistory {
  std::string agent_id;
  std::vector<AgentState> states;
  bool is_target{false};

  friend bool operator==(const AgentHistory&, const AgentHistory&) = default;
};

struct LanePolyline {
  std::string lane_id;
  std::vector<Vec2> points;

  friend bool operator==(const LanePolyline&, const LanePolyline&) = default;
};

struct Scene {
  std::string scene_id;
  std::string dataset_tag;
  std::vector<AgentHistory> agents;
  std::vector<LanePolyline> lanes;
  Trajectory ground_truth;

  friend bool operator==(const Scene&, const Scene&) = default;
};

// One model's prediction for one scene: K weighted trajectories.
struct Mode {
  Trajectory trajectory;
  double weight{0.0};

  friend bool operator==(const Mode&, const Mode&) = default;
};

struct ModeSet {
  std::string model_id;
  std::vector<Mode> modes;

  friend bool operator==(const ModeSet&, const ModeSet&) = default;
};

inline void validate_trajectory(const Trajectory& t, const std::string& what) {
  if (t.points.empty()) {
    throw ValidationError(what + ": trajectory must have length >= 1");
  }
  for (const Vec2& p : t.points) {
    if (!p.is_finite()) {
      throw ValidationError(what + ": trajectory coordinates must be finite");
    }
  }
}

// Checks every invariant decidable from the scene alone. The prediction
// horizon is a run configuration value, so the ground-truth length is only
// checked when the caller supplies one.
inline void validate_scene(const Scene& scene,
                           std::optional<std::size_t> expected_horizon = {}) {
  const std::string where = "scene '" + scene.scene_id + "'";
  if (scene.agents.empty()) {
    throw ValidationError(where + ": agents must be nonempty");
  }
  int targets = 0;
  for (const AgentHistory& agent : scene.agents) {
    const std::string aw = where + ", agent '" + agent.agent_id + "'";
    if (agent.states.empty()) {
      throw ValidationError(aw + ": states must be nonempty");
    }
    for (std::size_t i = 0; i < agent.states.size(); ++i) {
      const AgentState& s = agent.states[i];
      if (!s.position.is_finite() || !std::isfinite(s.timestamp)) {
        throw ValidationError(aw + ": states must be finite");
      }
      if (i > 0 && !(s.timestamp > agent.states[i - 1].timestamp)) {
        throw ValidationError(aw + ": timestamps must be strictly increasing");
      }
    }
    if (agent.is_target) {
      ++targets;
    }
    // Agents share a common timestamp grid.
    const AgentHistory& first = scene.agents.front();
    if (agent.states.size() != first.states.size()) {
      throw ValidationError(aw + ": timestamps grid differs in length from '" +
                            first.agent_id + "'");
    }
    for (std::size_t i = 0; i < agent.states.size(); ++i) {
      if (agent.states[i].timestamp != first.states[i].timestamp) {
        throw ValidationError(aw + ": timestamps grid differs from '" +
                              first.agent_id + "'");
      }
    }
  }
  if (targets != 1) {
    throw ValidationError(where + ": exactly one agent must have is_target");
  }
  for (const LanePolyline& lane : scene.lanes) {
    if (lane.points.size() < 2) {
      throw ValidationError(where + ", lane '" + lane.lane_id +
                            "': points must have length >= 2");
    }
    for (const Vec2& p : lane.points) {
      if (!p.is_finite()) {
        throw ValidationError(where + ", lane '" + lane.lane_id +
                              "': points must be finite");
      }
    }
  }
  validate_trajectory(scene.ground_truth, where + ": ground_truth");
  if (expected_horizon && scene.ground_truth.length() != *expected_horizon) {
    throw ValidationError(where + ": ground_truth length " +
                          std::to_string(scene.ground_truth.length()) +
                          " does not match configured horizon " +
                          std::to_string(*expected_horizon));
  }
}

inline void validate_mode_set(const ModeSet& ms,
                              std::optional<std::size_t> expected_horizon = {}) {
  const std::string where = "mode set '" + ms.model_id + "'";
  if (ms.modes.empty()) {
    throw ValidationError(where + ": modes must be nonempty");
  }
  double weight_sum = 0.0;
  const std::size_t horizon =
      expected_horizon.value_or(ms.modes.front().trajectory.length());
  for (const Mode& mode : ms.modes) {
    if (!(mode.weight >= 0.0)) {
      throw ValidationError(where + ": weights must be nonnegative");
    }
    weight_sum += mode.weight;
    validate_trajectory(mode.trajectory, where);
    if (mode.trajectory.length() != horizon) {
      throw ValidationError(where + ": all trajectories must share length " +
                            std::to_string(horizon));
    }
  }
  if (std::abs(weight_sum - 1.0) > kWeightSumTolerance) {
    throw ValidationError(where + ": weights must sum to 1");
  }
}

inline const AgentHistory& target_agent(const Scene& scene) {
  for (const AgentHistory& agent : scene.agents) {
    if (agent.is_target) {
      return agent;
    }
  }
  throw ValidationError("scene '" + scene.scene_id + "': no target agent");
}

}  // namespace traj_uncert
