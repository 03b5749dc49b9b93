#pragma once

// Synthetic desk-scale benchmark: scene generation (straight roads, curves,
// T-junctions with 50/50 left/right ground truths) and context-aware
// synthetic predictors, so the full pipeline runs without neural networks.
//
// A predictor builds lane-following continuations (kinematic extrapolation
// when no lane is usable), allocates its modes across candidate paths by a
// noisy preference over the observed heading trend, and perturbs endpoints
// with noise whose scale grows with scene corruption. Scenes telegraph the
// upcoming turn more or less clearly (per-scene ambiguity), which is what
// makes uncertainty and prediction error co-vary.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "traj_uncert/scene.hpp"

namespace traj_uncert {

enum class SceneKind { kStraight, kTJunction, kCurve };

inline std::string_view scene_kind_name(SceneKind kind) {
  switch (kind) {
    case SceneKind::kStraight:
      return "straight";
    case SceneKind::kTJunction:
      return "t_junction";
    case SceneKind::kCurve:
      return "curve";
  }
  throw ValidationError("unknown scene kind");
}

inline SceneKind parse_scene_kind(std::string_view name) {
  if (name == "straight") return SceneKind::kStraight;
  if (name == "t_junction") return SceneKind::kTJunction;
  if (name == "curve") return SceneKind::kCurve;
  throw ValidationError("unknown scene kind '" + std::string(name) + "'");
}

struct SceneTemplate {
  SceneKind kind{SceneKind::kTJunction};
  int n_agents{3};
  int n_lanes{4};
  double noise_sigma{0.05};  // meters of jitter on history/ground truth
  int history_steps{5};      // T_in
  int horizon_steps{12};     // T_out
  double step_seconds{0.5};
};

struct SyntheticPredictor {
  std::string model_id;
  double skill_sigma{1.0};          // endpoint noise scale, meters
  double context_sensitivity{1.0};  // in [0,1]
  int mode_count{10};
  std::uint64_t seed{0};
};

namespace synth_detail {

inline constexpr double kTurnRadius = 10.0;      // t-junction quarter arcs
inline constexpr double kOuterTurnRadius = 13.5; // second crossing lane pair
inline constexpr double kCurveRadius = 30.0;
inline constexpr double kMaxHeadingHint = 0.35;  // rad already turned when decided
inline constexpr double kLaneSampleStep = 2.0;   // m between lane points
inline constexpr double kLaneCaptureRadius = 4.0;
inline constexpr double kReferenceLaneCount = 4.0;
inline constexpr double kAlignGain = 2.0;
inline constexpr double kTurnGain = 4.0;
inline constexpr double kStartGain = 0.5;
inline constexpr double kPrefNoiseBase = 0.8;
inline constexpr double kMaxSpeed = 30.0;
// Log-scale spread of the member-specific weights over per-step history
// displacements: near-zero effect on consistent histories, large
// disagreement on garbled ones.
inline constexpr double kHistoryReadingSpread = 0.35;
// Peak fraction of speed lost to hesitation in fully ambiguous scenes.
inline constexpr double kMaxHesitation = 0.45;

inline Vec2 heading_vec(double angle) { return {std::cos(angle), std::sin(angle)}; }

inline double wrap_angle(double a) {
  while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
  while (a < -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

// Quarter-circle turn centerline: approach along y = offset, arc of the
// given radius toward sign*y, then a straight exit. Points every
// kLaneSampleStep meters of arc length.
inline LanePolyline turn_lane(const std::string& id, double radius, int sign,
                              double reach) {
  LanePolyline lane{id, {}};
  for (double x = -reach; x < 0.0; x += kLaneSampleStep) {
    lane.points.push_back({x, 0.0});
  }
  const double quarter = 0.5 * std::numbers::pi * radius;
  for (double s = 0.0; s < quarter; s += kLaneSampleStep) {
    const double phi = s / radius;
    lane.points.push_back({radius * std::sin(phi),
                           sign * radius * (1.0 - std::cos(phi))});
  }
  for (double s = 0.0; s <= reach; s += kLaneSampleStep) {
    lane.points.push_back({radius, sign * (radius + s)});
  }
  return lane;
}

inline LanePolyline straight_lane(const std::string& id, double lateral,
                                  double reach) {
  LanePolyline lane{id, {}};
  for (double x = -reach; x <= 2.0 * reach; x += kLaneSampleStep) {
    lane.points.push_back({x, lateral});
  }
  return lane;
}

inline LanePolyline curve_lane(const std::string& id, double radius, int sign,
                               double reach) {
  LanePolyline lane{id, {}};
  for (double x = -reach; x < 0.0; x += kLaneSampleStep) {
    lane.points.push_back({x, 0.0});
  }
  for (double s = 0.0; s <= 2.5 * reach; s += kLaneSampleStep) {
    const double phi = s / radius;
    lane.points.push_back({radius * std::sin(phi),
                           sign * radius * (1.0 - std::cos(phi))});
  }
  return lane;
}

inline std::vector<LanePolyline> build_lanes(SceneKind kind, int n_lanes,
                                             double reach) {
  std::vector<LanePolyline> ordered;
  int next = 0;
  const auto id = [&next] { return "lane_" + std::to_string(next++); };
  switch (kind) {
    case SceneKind::kTJunction:
      // The crossing road only: turning is the sole option at the junction.
      ordered.push_back(turn_lane(id(), kTurnRadius, +1, reach));
      ordered.push_back(turn_lane(id(), kTurnRadius, -1, reach));
      ordered.push_back(turn_lane(id(), kOuterTurnRadius, +1, reach));
      ordered.push_back(turn_lane(id(), kOuterTurnRadius, -1, reach));
      break;
    case SceneKind::kStraight:
      ordered.push_back(straight_lane(id(), 0.0, reach));
      ordered.push_back(straight_lane(id(), 3.5, reach));
      ordered.push_back(straight_lane(id(), -3.5, reach));
      ordered.push_back(straight_lane(id(), 7.0, reach));
      break;
    case SceneKind::kCurve:
      ordered.push_back(curve_lane(id(), kCurveRadius, +1, reach));
      ordered.push_back(curve_lane(id(), kCurveRadius, -1, reach));
      ordered.push_back(straight_lane(id(), 0.0, reach));
      ordered.push_back(straight_lane(id(), 3.5, reach));
      break;
  }
  while (static_cast<int>(ordered.size()) < n_lanes) {
    const double lateral = 3.5 * static_cast<double>(ordered.size() - 1);
    ordered.push_back(straight_lane(id(), lateral, reach));
  }
  ordered.resize(static_cast<std::size_t>(n_lanes));
  return ordered;
}

struct PathGeometry {
  std::vector<Vec2> points;       // polyline vertices
  std::vector<double> cum_length; // cumulative arc length per vertex

  static PathGeometry from_points(const std::vector<Vec2>& pts) {
    PathGeometry g;
    g.points = pts;
    g.cum_length.resize(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i) {
      g.cum_length[i] = g.cum_length[i - 1] + distance(pts[i - 1], pts[i]);
    }
    return g;
  }

  // Nearest point on the polyline: (distance, arc length at projection).
  std::pair<double, double> project(Vec2 p) const {
    double best_d = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) {
      const Vec2 a = points[i - 1];
      const Vec2 b = points[i];
      const Vec2 ab = b - a;
      const double len2 = ab.squared_norm();
      double t = len2 > 0.0 ? ((p - a).x * ab.x + (p - a).y * ab.y) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const Vec2 q = a + t * ab;
      const double d = distance(p, q);
      if (d < best_d) {
        best_d = d;
        best_s = cum_length[i - 1] + t * std::sqrt(len2);
      }
    }
    return {best_d, best_s};
  }

  // Position at arc length s; extrapolates along the last segment direction.
  Vec2 at(double s) const {
    if (s <= 0.0) {
      return points.front();
    }
    const double total = cum_length.back();
    if (s >= total) {
      const Vec2 a = points[points.size() - 2];
      const Vec2 b = points.back();
      const double seg = distance(a, b);
      const Vec2 dir = seg > 0.0 ? (1.0 / seg) * (b - a) : Vec2{1.0, 0.0};
      return b + (s - total) * dir;
    }
    const auto it = std::upper_bound(cum_length.begin(), cum_length.end(), s);
    const std::size_t i = static_cast<std::size_t>(it - cum_length.begin());
    const double seg = cum_length[i] - cum_length[i - 1];
    const double t = seg > 0.0 ? (s - cum_length[i - 1]) / seg : 0.0;
    return points[i - 1] + t * (points[i] - points[i - 1]);
  }
};

struct CandidatePath {
  Trajectory trajectory;   // horizon_steps points walked along the path
  double start_distance;   // distance from the target's last position
  double turn;             // wrapped heading change first -> last segment
  double initial_heading;  // heading of the first walked segment
};

inline CandidatePath walk_path(const PathGeometry& geom, Vec2 origin, double s0,
                               double speed, double dt, std::size_t steps) {
  CandidatePath c;
  c.start_distance = distance(origin, geom.at(s0));
  Vec2 prev = geom.at(s0);
  Vec2 first_dir{1.0, 0.0};
  Vec2 last_dir{1.0, 0.0};
  for (std::size_t j = 0; j < steps; ++j) {
    const Vec2 p = geom.at(s0 + speed * dt * static_cast<double>(j + 1));
    const Vec2 d = p - prev;
    if (d.norm() > 1e-9) {
      if (j == 0) {
        first_dir = d;
      }
      last_dir = d;
    }
    c.trajectory.points.push_back(p);
    prev = p;
  }
  c.initial_heading = std::atan2(first_dir.y, first_dir.x);
  c.turn = wrap_angle(std::atan2(last_dir.y, last_dir.x) - c.initial_heading);
  return c;
}

}  // namespace synth_detail

// Fraction of the context that looks corrupted to a predictor: zeroed
// history positions plus missing lanes (relative to the canonical template
// lane count), clamped to [0, 1].
inline double corruption(const Scene& scene) {
  std::size_t zeroed = 0;
  std::size_t total = 0;
  for (const AgentHistory& agent : scene.agents) {
    for (const AgentState& s : agent.states) {
      ++total;
      if (s.position.x == 0.0 && s.position.y == 0.0) {
        ++zeroed;
      }
    }
  }
  const double zero_frac =
      total > 0 ? static_cast<double>(zeroed) / static_cast<double>(total) : 0.0;
  const double missing_frac =
      std::max(0.0, 1.0 - static_cast<double>(scene.lanes.size()) /
                              synth_detail::kReferenceLaneCount);
  return std::min(1.0, zero_frac + missing_frac);
}

inline std::vector<Scene> gen_scenes(const SceneTemplate& tmpl, int n,
                                     std::uint64_t seed) {
  if (n < 1) {
    throw ValidationError("gen_scenes: n must be >= 1");
  }
  if (tmpl.n_agents < 1 || tmpl.n_lanes < 1 || tmpl.history_steps < 2 ||
      tmpl.horizon_steps < 1 || !(tmpl.step_seconds > 0.0) ||
      !(tmpl.noise_sigma >= 0.0)) {
    throw ValidationError("gen_scenes: invalid template");
  }
  using namespace synth_detail;

  const double dt = tmpl.step_seconds;
  const int t_in = tmpl.history_steps;
  const int t_out = tmpl.horizon_steps;
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(n));
  for (int idx = 0; idx < n; ++idx) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(idx)));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double speed = 6.0 + 6.0 * uni(rng);
    const double ambiguity = uni(rng);
    // Undecided drivers hesitate into the junction: an unobservable future
    // slowdown that scales with ambiguity (irreducible execution variance).
    const double hesitation = tmpl.kind == SceneKind::kTJunction
                                  ? kMaxHesitation * ambiguity * uni(rng)
                                  : 0.0;
    int sign = 0;
    if (tmpl.kind != SceneKind::kStraight) {
      sign = (idx % 2 == 0) ? +1 : -1;  // exact 50/50 split
    }
    const double radius =
        tmpl.kind == SceneKind::kTJunction ? kTurnRadius : kCurveRadius;
    const double hint =
        tmpl.kind == SceneKind::kTJunction
            ? sign * (1.0 - ambiguity) * kMaxHeadingHint
            : (tmpl.kind == SceneKind::kCurve ? sign * kMaxHeadingHint : 0.0);

    Scene scene;
    char sid[64];
    std::snprintf(sid, sizeof sid, "%s-%06d",
                  std::string(scene_kind_name(tmpl.kind)).c_str(), idx);
    scene.scene_id = sid;
    scene.dataset_tag = "Original";

    // Target history ends at the origin with heading `hint`; heading ramps
    // from 0 at the oldest observation.
    AgentHistory target;
    target.agent_id = "ego";
    target.is_target = true;
    {
      std::vector<Vec2> pos(static_cast<std::size_t>(t_in));
      pos[static_cast<std::size_t>(t_in - 1)] = {0.0, 0.0};
      for (int j = t_in - 1; j >= 1; --j) {
        const double theta =
            hint * static_cast<double>(j) / static_cast<double>(t_in - 1);
        pos[static_cast<std::size_t>(j - 1)] =
            pos[static_cast<std::size_t>(j)] - speed * dt * heading_vec(theta);
      }
      for (int j = 0; j < t_in; ++j) {
        Vec2 p = pos[static_cast<std::size_t>(j)];
        if (j != t_in - 1 && tmpl.noise_sigma > 0.0) {
          p = p + tmpl.noise_sigma * Vec2{gauss(rng), gauss(rng)};
        }
        target.states.push_back(
            {p, dt * static_cast<double>(j - (t_in - 1))});
      }
    }
    scene.agents.push_back(std::move(target));

    // Ground truth follows the junction/curve centerline geometry (arc from
    // the origin at heading zero), so lane-following continuations are the
    // right hypotheses; the telegraphed hint lives only in the history.
    {
      Vec2 p{0.0, 0.0};
      double theta = 0.0;
      for (int j = 0; j < t_out; ++j) {
        const double v_j =
            speed * (1.0 - (2 * j < t_out ? hesitation : 0.0));
        if (tmpl.kind == SceneKind::kTJunction &&
            std::abs(theta) < 0.5 * std::numbers::pi) {
          theta += sign * v_j * dt / radius;
          theta = std::clamp(theta, -0.5 * std::numbers::pi,
                             0.5 * std::numbers::pi);
        } else if (tmpl.kind == SceneKind::kCurve) {
          theta += sign * speed * dt / radius;
        }
        p = p + v_j * dt * heading_vec(theta);
        Vec2 q = p;
        if (tmpl.noise_sigma > 0.0) {
          q = q + tmpl.noise_sigma * Vec2{gauss(rng), gauss(rng)};
        }
        scene.ground_truth.points.push_back(q);
      }
    }

    // Surrounding agents: parallel constant-velocity traffic.
    for (int a = 1; a < tmpl.n_agents; ++a) {
      AgentHistory agent;
      agent.agent_id = "agent_" + std::to_string(a);
      const double lateral = 3.5 * static_cast<double>((a + 1) / 2) *
                             ((a % 2 == 0) ? -1.0 : 1.0);
      const double back = 5.0 * static_cast<double>(a);
      const double v = 4.0 + 6.0 * uni(rng);
      for (int j = 0; j < t_in; ++j) {
        const double t = dt * static_cast<double>(j - (t_in - 1));
        Vec2 p{v * t - back, lateral};
        if (tmpl.noise_sigma > 0.0) {
          p = p + tmpl.noise_sigma * Vec2{gauss(rng), gauss(rng)};
        }
        agent.states.push_back({p, t});
      }
      scene.agents.push_back(std::move(agent));
    }

    const double reach =
        std::max(40.0, speed * dt * static_cast<double>(t_in + t_out));
    scene.lanes = build_lanes(tmpl.kind, tmpl.n_lanes, reach);

    validate_scene(scene, static_cast<std::size_t>(t_out));
    scenes.push_back(std::move(scene));
  }
  return scenes;
}

// Deterministic given (predictor.seed, scene_id).
inline ModeSet predict(const SyntheticPredictor& predictor, const Scene& scene) {
  if (!(predictor.skill_sigma > 0.0) || predictor.mode_count < 1 ||
      predictor.context_sensitivity < 0.0 || predictor.context_sensitivity > 1.0) {
    throw ValidationError("predict: invalid predictor");
  }
  using namespace synth_detail;

  const std::size_t t_out = scene.ground_truth.length();
  const AgentHistory& target = target_agent(scene);
  const std::vector<AgentState>& st = target.states;
  const std::size_t t_in = st.size();

  const Vec2 p_last = st[t_in - 1].position;
  std::mt19937_64 rng(derive_seed(predictor.seed, fnv1a64(scene.scene_id)));
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Member-specific reading of the history: a convex member-weighted blend
  // of the per-step displacements. A consistent history gives every member
  // the same estimate; a garbled one (zeroed, shuffled, reverted segments)
  // makes the members genuinely disagree.
  Vec2 velocity{0.0, 0.0};
  double projected_turn = 0.0;
  if (t_in >= 2) {
    std::vector<Vec2> step_v;
    step_v.reserve(t_in - 1);
    for (std::size_t j = 0; j + 1 < t_in; ++j) {
      const double step_dt = st[j + 1].timestamp - st[j].timestamp;
      step_v.push_back((1.0 / step_dt) *
                       (st[j + 1].position - st[j].position));
    }
    double wsum = 0.0;
    for (const Vec2& v : step_v) {
      const double w = std::exp(kHistoryReadingSpread * gauss(rng));
      velocity = velocity + w * v;
      wsum += w;
    }
    velocity = (1.0 / wsum) * velocity;

    // Per-step heading changes, blended the same way.
    double turn_acc = 0.0;
    double turn_w = 0.0;
    for (std::size_t j = 0; j + 1 < step_v.size(); ++j) {
      const double w = std::exp(kHistoryReadingSpread * gauss(rng));
      if (step_v[j].norm() > 1e-9 && step_v[j + 1].norm() > 1e-9) {
        turn_acc += w * wrap_angle(std::atan2(step_v[j + 1].y, step_v[j + 1].x) -
                                   std::atan2(step_v[j].y, step_v[j].x));
        turn_w += w;
      }
    }
    if (turn_w > 0.0) {
      projected_turn = std::clamp(
          (turn_acc / turn_w) * static_cast<double>(t_out),
          -0.6 * std::numbers::pi, 0.6 * std::numbers::pi);
    }
  }
  const double dt = t_in >= 2 ? st[1].timestamp - st[0].timestamp : 0.5;
  double speed = std::min(velocity.norm(), kMaxSpeed);
  const double obs_heading =
      speed > 1e-9 ? std::atan2(velocity.y, velocity.x) : 0.0;

  const double corrupt = corruption(scene);
  const double sigma =
      predictor.skill_sigma * (1.0 + predictor.context_sensitivity * corrupt);
  const double pref_sigma =
      kPrefNoiseBase * (1.0 + predictor.context_sensitivity * corrupt);

  // Candidate continuations: lane-following where a lane is close enough,
  // a kinematic heading fan otherwise.
  std::vector<CandidatePath> candidates;
  for (const LanePolyline& lane : scene.lanes) {
    const PathGeometry geom = PathGeometry::from_points(lane.points);
    const auto [dist, s0] = geom.project(p_last);
    if (dist <= kLaneCaptureRadius) {
      candidates.push_back(walk_path(geom, p_last, s0, speed, dt, t_out));
    }
  }
  if (candidates.empty()) {
    for (const double offset : {0.0, 0.35, -0.35, 0.8, -0.8, 1.3, -1.3}) {
      CandidatePath c;
      const double heading = obs_heading + offset;
      for (std::size_t j = 0; j < t_out; ++j) {
        c.trajectory.points.push_back(
            p_last + speed * dt * static_cast<double>(j + 1) * heading_vec(heading));
      }
      c.start_distance = 0.0;
      c.initial_heading = heading;
      c.turn = 0.0;
      candidates.push_back(std::move(c));
    }
  }

  // Path preference: heading alignment, turn-trend match, start proximity,
  // plus this member's own noisy opinion.
  std::vector<double> score(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const CandidatePath& cand = candidates[c];
    const double align = std::cos(wrap_angle(cand.initial_heading - obs_heading));
    const double turn_gap = std::abs(wrap_angle(cand.turn - projected_turn)) /
                            (0.5 * std::numbers::pi);
    score[c] = kAlignGain * align - kTurnGain * turn_gap -
               kStartGain * cand.start_distance + pref_sigma * gauss(rng);
  }
  double mx = *std::max_element(score.begin(), score.end());
  std::vector<double> prob(candidates.size());
  double z = 0.0;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    prob[c] = std::exp(score[c] - mx);
    z += prob[c];
  }
  for (double& p : prob) {
    p /= z;
  }

  // Largest-remainder allocation of modes to candidate paths.
  const int k = predictor.mode_count;
  std::vector<int> counts(candidates.size(), 0);
  {
    std::vector<std::pair<double, std::size_t>> remainders;
    int assigned = 0;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double exact = prob[c] * static_cast<double>(k);
      counts[c] = static_cast<int>(exact);
      assigned += counts[c];
      remainders.push_back({exact - static_cast<double>(counts[c]), c});
    }
    std::stable_sort(remainders.begin(), remainders.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int r = 0; assigned < k; ++assigned, ++r) {
      ++counts[remainders[static_cast<std::size_t>(r) % remainders.size()].second];
    }
  }

  // One trajectory per mode: the candidate path plus endpoint noise ramped
  // linearly along the horizon.
  ModeSet result;
  result.model_id = predictor.model_id;
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    for (int m = 0; m < counts[c]; ++m) {
      const Vec2 offset = sigma * Vec2{gauss(rng), gauss(rng)};
      Mode mode;
      mode.trajectory.points.reserve(t_out);
      for (std::size_t j = 0; j < t_out; ++j) {
        const double ramp =
            static_cast<double>(j + 1) / static_cast<double>(t_out);
        mode.trajectory.points.push_back(candidates[c].trajectory.points[j] +
                                         ramp * offset);
      }
      result.modes.push_back(std::move(mode));
    }
  }

  // Weights: softmax of negative endpoint distance to the endpoint centroid.
  Vec2 centroid{0.0, 0.0};
  for (const Mode& mode : result.modes) {
    centroid = centroid + mode.trajectory.endpoint();
  }
  centroid = (1.0 / static_cast<double>(result.modes.size())) * centroid;
  std::vector<double> d(result.modes.size());
  double mean_d = 0.0;
  for (std::size_t i = 0; i < result.modes.size(); ++i) {
    d[i] = distance(result.modes[i].trajectory.endpoint(), centroid);
    mean_d += d[i];
  }
  mean_d /= static_cast<double>(result.modes.size());
  const double scale = std::max(1.0, mean_d);
  double wsum = 0.0;
  for (std::size_t i = 0; i < result.modes.size(); ++i) {
    result.modes[i].weight = std::exp(-d[i] / scale);
    wsum += result.modes[i].weight;
  }
  for (Mode& mode : result.modes) {
    mode.weight /= wsum;
  }
  validate_mode_set(result, t_out);
  return result;
}

}  // namespace traj_uncert
