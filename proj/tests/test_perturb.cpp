#include "traj_uncert/perturb.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "traj_uncert/synthbench.hpp"

namespace traj_uncert {
namespace {

Scene test_scene(int t_in = 5, int n_lanes = 8) {
  SceneTemplate tmpl;
  tmpl.kind = SceneKind::kTJunction;
  tmpl.n_agents = 3;
  tmpl.n_lanes = n_lanes;
  tmpl.history_steps = t_in;
  return gen_scenes(tmpl, 1, 99).front();
}

std::vector<Vec2> target_positions(const Scene& scene) {
  std::vector<Vec2> out;
  for (const AgentState& s : target_agent(scene).states) {
    out.push_back(s.position);
  }
  return out;
}

TEST(RevertEgo, ReversesTargetPositionsOnly) {
  Scene scene = test_scene();
  const std::vector<Vec2> before = target_positions(scene);
  const std::vector<AgentHistory> others_before = scene.agents;

  const Scene reverted = revert_ego(scene);
  const std::vector<Vec2> after = target_positions(reverted);
  ASSERT_EQ(after.size(), before.size());
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(after[i], before[before.size() - 1 - i]);
  }
  // Timestamps keep original order.
  for (std::size_t i = 0; i < before.size(); ++i) {
    EXPECT_EQ(target_agent(reverted).states[i].timestamp,
              target_agent(scene).states[i].timestamp);
  }
  // Non-target agents unchanged.
  for (std::size_t a = 0; a < scene.agents.size(); ++a) {
    if (!scene.agents[a].is_target) {
      EXPECT_EQ(reverted.agents[a], others_before[a]);
    }
  }
  EXPECT_EQ(reverted.dataset_tag, "RevertEGO");
}

TEST(RevertEgo, IsInvolutionOnPositions) {
  const Scene scene = test_scene();
  const Scene twice = revert_ego(revert_ego(scene));
  EXPECT_EQ(target_positions(twice), target_positions(scene));
  EXPECT_EQ(twice.ground_truth, scene.ground_truth);
  EXPECT_EQ(twice.scene_id, scene.scene_id);
}

TEST(ScrambleEgo, DeterministicPermutation) {
  const Scene scene = test_scene();
  const Scene a = scramble_ego(scene, 7);
  const Scene b = scramble_ego(scene, 7);
  EXPECT_EQ(target_positions(a), target_positions(b));

  // Multiset equality with the original positions.
  std::vector<Vec2> orig = target_positions(scene);
  std::vector<Vec2> shuffled = target_positions(a);
  const auto lt = [](Vec2 p, Vec2 q) {
    return p.x != q.x ? p.x < q.x : p.y < q.y;
  };
  std::sort(orig.begin(), orig.end(), lt);
  std::sort(shuffled.begin(), shuffled.end(), lt);
  EXPECT_EQ(orig, shuffled);
}

TEST(ScrambleEgo, SingleStepHistoryUnchanged) {
  const Scene scene = test_scene(/*t_in=*/2);
  Scene one = scene;
  for (AgentHistory& agent : one.agents) {
    agent.states.resize(1);
  }
  one.agents[0].states[0].position = {4.0, 2.0};
  const Scene out = scramble_ego(one, 3);
  EXPECT_EQ(target_positions(out), target_positions(one));
}

TEST(Blackout, ZeroesEarliestCeilHalfForEveryAgent) {
  const Scene scene = test_scene(/*t_in=*/5);
  const Scene dark = blackout(scene);
  for (const AgentHistory& agent : dark.agents) {
    for (std::size_t i = 0; i < 3; ++i) {  // ceil(5/2) = 3
      EXPECT_EQ(agent.states[i].position, (Vec2{0.0, 0.0}));
      EXPECT_EQ(agent.states[i].timestamp,
                scene.agents[0].states[i].timestamp);
    }
  }
  EXPECT_EQ(dark.lanes.size(), scene.lanes.size());
  EXPECT_EQ(dark.lanes[0].points, scene.lanes[0].points);

  const Scene four = test_scene(/*t_in=*/4);
  const Scene dark4 = blackout(four);
  for (const AgentHistory& agent : dark4.agents) {
    EXPECT_EQ(agent.states[0].position, (Vec2{0.0, 0.0}));
    EXPECT_EQ(agent.states[1].position, (Vec2{0.0, 0.0}));
    EXPECT_NE(agent.states[2].position, (Vec2{0.0, 0.0}));
  }
}

TEST(LaneDeletion, KeepsCeilQuarter) {
  const Scene scene = test_scene(5, /*n_lanes=*/8);
  const Scene thinned = lane_deletion(scene, 17);
  EXPECT_EQ(thinned.lanes.size(), 2u);  // ceil(8/4)
  EXPECT_EQ(thinned.agents, scene.agents);

  const Scene single = lane_deletion(test_scene(5, /*n_lanes=*/1), 17);
  EXPECT_EQ(single.lanes.size(), 1u);  // never drops below one lane
}

TEST(LaneDeletion, DeterministicRetention) {
  const Scene scene = test_scene(5, 8);
  const Scene a = lane_deletion(scene, 5);
  const Scene b = lane_deletion(scene, 5);
  ASSERT_EQ(a.lanes.size(), b.lanes.size());
  for (std::size_t i = 0; i < a.lanes.size(); ++i) {
    EXPECT_EQ(a.lanes[i].lane_id, b.lanes[i].lane_id);
  }
  // Retained lanes are a subset of the originals, order preserved.
  std::vector<std::string> ids;
  for (const LanePolyline& lane : scene.lanes) {
    ids.push_back(lane.lane_id);
  }
  std::size_t cursor = 0;
  for (const LanePolyline& lane : a.lanes) {
    const auto it = std::find(ids.begin() + cursor, ids.end(), lane.lane_id);
    ASSERT_NE(it, ids.end());
    cursor = static_cast<std::size_t>(it - ids.begin()) + 1;
  }
}

TEST(Apply, TagsJoinOpNamesInOrder) {
  const std::vector<Scene> scenes{test_scene()};
  PerturbationSpec spec;
  spec.ops = {PerturbOp::kBlackout};
  spec.seed = 1;
  EXPECT_EQ(traj_uncert::apply(spec, scenes)[0].dataset_tag, "Blackout");

  spec.ops = {PerturbOp::kScrambleEgo, PerturbOp::kLaneDeletion};
  EXPECT_EQ(traj_uncert::apply(spec, scenes)[0].dataset_tag, "ScrambleEGO+LaneDeletion");

  spec.ops = {PerturbOp::kBlackout, PerturbOp::kScrambleEgo,
              PerturbOp::kLaneDeletion};
  EXPECT_EQ(traj_uncert::apply(spec, scenes)[0].dataset_tag,
            "Blackout+ScrambleEGO+LaneDeletion");
}

TEST(Apply, EmptySceneListGivesEmptyList) {
  PerturbationSpec spec;
  spec.ops = {PerturbOp::kBlackout};
  EXPECT_TRUE(traj_uncert::apply(spec, std::vector<Scene>{}).empty());
}

TEST(Apply, DeterministicAndPreservesIdentity) {
  SceneTemplate tmpl;
  tmpl.n_lanes = 8;
  const std::vector<Scene> scenes = gen_scenes(tmpl, 10, 3);
  PerturbationSpec spec;
  spec.ops = {PerturbOp::kScrambleEgo, PerturbOp::kLaneDeletion};
  spec.seed = 4;
  const std::vector<Scene> a = traj_uncert::apply(spec, scenes);
  const std::vector<Scene> b = traj_uncert::apply(spec, scenes);
  ASSERT_EQ(a.size(), scenes.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);  // bit-identical
    EXPECT_EQ(a[i].scene_id, scenes[i].scene_id);
    EXPECT_EQ(a[i].ground_truth, scenes[i].ground_truth);
  }
}

TEST(Apply, RejectsInvalidSpecs) {
  PerturbationSpec spec;
  EXPECT_THROW(validate_perturbation_spec(spec), ValidationError);
  spec.ops = {PerturbOp::kBlackout, PerturbOp::kBlackout};
  EXPECT_THROW(validate_perturbation_spec(spec), ValidationError);
}

TEST(ParseOp, AcceptsCliAndLabelSpellings) {
  EXPECT_EQ(parse_perturb_op("revert_ego"), PerturbOp::kRevertEgo);
  EXPECT_EQ(parse_perturb_op("RevertEGO"), PerturbOp::kRevertEgo);
  EXPECT_EQ(parse_perturb_op("lane_deletion"), PerturbOp::kLaneDeletion);
  EXPECT_EQ(parse_perturb_op("Blackout"), PerturbOp::kBlackout);
  EXPECT_EQ(parse_perturb_op("scramble_ego"), PerturbOp::kScrambleEgo);
  EXPECT_THROW(parse_perturb_op("melt"), ValidationError);
}

}  // namespace
}  // namespace traj_uncert
