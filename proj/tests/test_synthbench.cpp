#include "traj_uncert/synthbench.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "traj_uncert/perturb.hpp"

namespace traj_uncert {
namespace {

double endpoint_spread(const ModeSet& ms) {
  Vec2 centroid{0.0, 0.0};
  for (const Mode& mode : ms.modes) {
    centroid = centroid + mode.trajectory.endpoint();
  }
  centroid = (1.0 / static_cast<double>(ms.modes.size())) * centroid;
  double acc = 0.0;
  for (const Mode& mode : ms.modes) {
    acc += distance(mode.trajectory.endpoint(), centroid);
  }
  return acc / static_cast<double>(ms.modes.size());
}

TEST(GenScenes, DeterministicGivenSeed) {
  SceneTemplate tmpl;
  const auto a = gen_scenes(tmpl, 5, 42);
  const auto b = gen_scenes(tmpl, 5, 42);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
  }
  const auto c = gen_scenes(tmpl, 5, 43);
  EXPECT_NE(a[0], c[0]);
}

TEST(GenScenes, TJunctionSplitsTurnsEvenly) {
  SceneTemplate tmpl;
  tmpl.kind = SceneKind::kTJunction;
  const auto scenes = gen_scenes(tmpl, 100, 7);
  int left = 0, right = 0;
  for (const Scene& scene : scenes) {
    (scene.ground_truth.endpoint().y > 0.0 ? left : right) += 1;
  }
  EXPECT_EQ(left, 50);
  EXPECT_EQ(right, 50);
}

TEST(GenScenes, NoiselessStraightIsExactlyLinear) {
  SceneTemplate tmpl;
  tmpl.kind = SceneKind::kStraight;
  tmpl.noise_sigma = 0.0;
  const Scene scene = gen_scenes(tmpl, 1, 9).front();
  const AgentHistory& target = target_agent(scene);
  const Vec2 last = target.states.back().position;
  EXPECT_EQ(last, (Vec2{0.0, 0.0}));
  // Per-step displacement of history and ground truth all equal.
  const Vec2 step = target.states[1].position - target.states[0].position;
  for (std::size_t i = 1; i < target.states.size(); ++i) {
    const Vec2 d = target.states[i].position - target.states[i - 1].position;
    EXPECT_NEAR(d.x, step.x, 1e-12);
    EXPECT_NEAR(d.y, step.y, 1e-12);
  }
  Vec2 prev{0.0, 0.0};
  for (const Vec2& p : scene.ground_truth.points) {
    EXPECT_NEAR(p.x - prev.x, step.x, 1e-9);
    EXPECT_NEAR(p.y - prev.y, 0.0, 1e-12);
    prev = p;
  }
}

TEST(GenScenes, RespectsTemplateCounts) {
  SceneTemplate tmpl;
  tmpl.n_agents = 5;
  tmpl.n_lanes = 6;
  tmpl.history_steps = 4;
  tmpl.horizon_steps = 10;
  const Scene scene = gen_scenes(tmpl, 1, 11).front();
  EXPECT_EQ(scene.agents.size(), 5u);
  EXPECT_EQ(scene.lanes.size(), 6u);
  EXPECT_EQ(target_agent(scene).states.size(), 4u);
  EXPECT_EQ(scene.ground_truth.length(), 10u);
  validate_scene(scene, 10u);
}

TEST(Corruption, RisesWithBlackoutAndLaneDeletion) {
  SceneTemplate tmpl;
  const Scene clean = gen_scenes(tmpl, 1, 13).front();
  const double base = corruption(clean);
  EXPECT_GE(base, 0.0);
  EXPECT_LT(base, 0.2);
  const double dark = corruption(blackout(clean));
  EXPECT_GT(dark, base);
  const double thin = corruption(lane_deletion(clean, 3));
  EXPECT_GT(thin, base);
  EXPECT_LE(dark, 1.0);
  PerturbationSpec all;
  all.ops = {PerturbOp::kBlackout, PerturbOp::kScrambleEgo,
             PerturbOp::kLaneDeletion};
  const double worst =
      corruption(traj_uncert::apply(all, std::vector<Scene>{clean}).front());
  EXPECT_GT(worst, dark);
}

TEST(Predict, DeterministicGivenSeedAndScene) {
  SceneTemplate tmpl;
  const Scene scene = gen_scenes(tmpl, 1, 21).front();
  SyntheticPredictor p;
  p.model_id = "m0";
  p.seed = 5;
  const ModeSet a = predict(p, scene);
  SyntheticPredictor q = p;  // identical fields and seed
  const ModeSet b = predict(q, scene);
  EXPECT_EQ(a, b);
  validate_mode_set(a, scene.ground_truth.length());
}

TEST(Predict, DistinctSeedsGiveDistinctModeSets) {
  SceneTemplate tmpl;
  const Scene scene = gen_scenes(tmpl, 1, 22).front();
  SyntheticPredictor p;
  p.model_id = "m0";
  p.seed = 1;
  SyntheticPredictor q = p;
  q.seed = 2;
  EXPECT_NE(predict(p, scene), predict(q, scene));
}

TEST(Predict, SingleModeGetsFullWeight) {
  SceneTemplate tmpl;
  const Scene scene = gen_scenes(tmpl, 1, 23).front();
  SyntheticPredictor p;
  p.model_id = "m0";
  p.mode_count = 1;
  const ModeSet ms = predict(p, scene);
  ASSERT_EQ(ms.modes.size(), 1u);
  EXPECT_DOUBLE_EQ(ms.modes[0].weight, 1.0);
}

// Controlled comparison: a single usable lane pins the mode geometry, so
// the same seed draws the same noise directions and only the corruption
// factor scales them.
TEST(Predict, BlackoutStrictlyInflatesEndpointSpread) {
  SceneTemplate tmpl;
  tmpl.kind = SceneKind::kStraight;
  tmpl.n_lanes = 1;
  const Scene clean = gen_scenes(tmpl, 1, 24).front();
  const Scene dark = blackout(clean);
  SyntheticPredictor p;
  p.model_id = "m0";
  p.context_sensitivity = 1.0;
  p.seed = 77;
  EXPECT_GT(endpoint_spread(predict(p, dark)),
            endpoint_spread(predict(p, clean)));
}

TEST(Predict, MeanSpreadRisesWithCorruptionAcrossSeeds) {
  SceneTemplate tmpl;
  tmpl.kind = SceneKind::kStraight;
  tmpl.n_lanes = 1;
  const Scene clean = gen_scenes(tmpl, 1, 25).front();
  const Scene dark = blackout(clean);
  ASSERT_GT(corruption(dark), corruption(clean));
  double clean_acc = 0.0, dark_acc = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    SyntheticPredictor p;
    p.model_id = "m0";
    p.context_sensitivity = 1.0;
    p.seed = static_cast<std::uint64_t>(seed);
    clean_acc += endpoint_spread(predict(p, clean));
    dark_acc += endpoint_spread(predict(p, dark));
  }
  EXPECT_GT(dark_acc, clean_acc);
}

TEST(Predict, KinematicFallbackWithoutLanes) {
  SceneTemplate tmpl;
  const Scene with_lanes = gen_scenes(tmpl, 1, 26).front();
  Scene bare = with_lanes;
  bare.lanes.clear();
  SyntheticPredictor p;
  p.model_id = "m0";
  const ModeSet ms = predict(p, bare);
  validate_mode_set(ms, bare.ground_truth.length());
  EXPECT_EQ(ms.modes.size(), static_cast<std::size_t>(p.mode_count));
}

}  // namespace
}  // namespace traj_uncert
