#include "traj_uncert/scene_io.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

namespace traj_uncert {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("traj_uncert_io_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

Scene make_scene(std::uint64_t seed, const std::string& id) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-20.0, 20.0);
  Scene scene;
  scene.scene_id = id;
  scene.dataset_tag = "Original";
  for (int a = 0; a < 3; ++a) {
    AgentHistory agent;
    agent.agent_id = "agent_" + std::to_string(a);
    agent.is_target = a == 0;
    for (int t = 0; t < 5; ++t) {
      agent.states.push_back({{uni(rng), uni(rng)}, 0.5 * t - 2.0});
    }
    scene.agents.push_back(agent);
  }
  for (int l = 0; l < 2; ++l) {
    LanePolyline lane;
    lane.lane_id = "lane_" + std::to_string(l);
    for (int p = 0; p < 4; ++p) {
      lane.points.push_back({uni(rng), uni(rng)});
    }
    scene.lanes.push_back(lane);
  }
  for (int t = 0; t < 12; ++t) {
    scene.ground_truth.points.push_back({uni(rng), uni(rng)});
  }
  return scene;
}

ModeSet make_mode_set(std::uint64_t seed, const std::string& model_id) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-20.0, 20.0);
  ModeSet ms;
  ms.model_id = model_id;
  const int k = 4;
  for (int m = 0; m < k; ++m) {
    Mode mode;
    mode.weight = 0.25;
    for (int t = 0; t < 12; ++t) {
      mode.trajectory.points.push_back({uni(rng), uni(rng)});
    }
    ms.modes.push_back(mode);
  }
  return ms;
}

TEST_F(TempDir, SceneRoundTripIsIdentity) {
  std::vector<Scene> scenes;
  for (int i = 0; i < 10; ++i) {
    scenes.push_back(make_scene(100 + i, "scene_" + std::to_string(i)));
  }
  scenes[3].dataset_tag = "Blackout";
  write_scenes(scenes, path("scenes.jsonl"));
  const std::vector<Scene> loaded = read_scenes(path("scenes.jsonl"));
  ASSERT_EQ(loaded.size(), scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    EXPECT_EQ(loaded[i], scenes[i]);  // bit-for-bit on all numeric fields
  }
  EXPECT_EQ(loaded[3].dataset_tag, "Blackout");
}

TEST_F(TempDir, SingleSceneFile) {
  write_scenes(std::vector<Scene>{make_scene(1, "only")}, path("one.jsonl"));
  EXPECT_EQ(read_scenes(path("one.jsonl")).size(), 1u);
}

TEST_F(TempDir, EmptyFileGivesEmptyList) {
  std::ofstream(path("empty.jsonl")).flush();
  EXPECT_TRUE(read_scenes(path("empty.jsonl")).empty());
}

TEST_F(TempDir, DecreasingTimestampsRejected) {
  Scene scene = make_scene(2, "bad");
  scene.agents[1].states[2].timestamp = -10.0;
  write_scenes(std::vector<Scene>{make_scene(1, "ok")}, path("bad.jsonl"));
  {
    // Append the invalid record manually; write_scenes would refuse it.
    std::ofstream out(path("bad.jsonl"), std::ios::app);
    nlohmann::json j;
    j["scene_id"] = "bad";
    j["dataset_tag"] = "";
    j["agents"] = {{{"agent_id", "a"},
                    {"is_target", true},
                    {"states", {{0.0, 0.0, 1.0}, {1.0, 1.0, 0.5}}}}};
    j["lanes"] = nlohmann::json::array();
    j["ground_truth"] = {{0.0, 0.0}};
    out << j.dump() << "\n";
  }
  try {
    read_scenes(path("bad.jsonl"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("timestamps"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find(":2"), std::string::npos) << e.what();
  }
}

TEST_F(TempDir, ParseErrorNamesLine) {
  {
    std::ofstream out(path("garbled.jsonl"));
    out << R"({"scene_id": "ok"... )" << "\n";
  }
  try {
    read_scenes(path("garbled.jsonl"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(":1"), std::string::npos);
  }
}

TEST_F(TempDir, TwoTargetsRejected) {
  Scene scene = make_scene(3, "two_targets");
  scene.agents[1].is_target = true;
  EXPECT_THROW(write_scenes(std::vector<Scene>{scene}, path("x.jsonl")),
               ValidationError);
}

TEST_F(TempDir, UnknownFieldsIgnored) {
  write_scenes(std::vector<Scene>{make_scene(4, "s")}, path("extra.jsonl"));
  std::string line;
  {
    std::ifstream in(path("extra.jsonl"));
    std::getline(in, line);
  }
  {
    nlohmann::json j = nlohmann::json::parse(line);
    j["future_extension"] = {{"a", 1}};
    std::ofstream out(path("extra.jsonl"));
    out << j.dump() << "\n";
  }
  EXPECT_EQ(read_scenes(path("extra.jsonl")).size(), 1u);
}

TEST_F(TempDir, UnwritablePathFails) {
  EXPECT_THROW(write_scenes(std::vector<Scene>{make_scene(5, "s")},
                            "/nonexistent_dir/scenes.jsonl"),
               IoError);
}

TEST_F(TempDir, HorizonMismatchRejectedWhenConfigured) {
  write_scenes(std::vector<Scene>{make_scene(6, "s")}, path("h.jsonl"));
  EXPECT_EQ(read_scenes(path("h.jsonl"), 12).size(), 1u);
  EXPECT_THROW(read_scenes(path("h.jsonl"), 10), ValidationError);
}

TEST_F(TempDir, PredictionRoundTrip) {
  std::vector<PredictionRecord> records;
  for (int m = 0; m < 3; ++m) {
    records.push_back({"scene_0", make_mode_set(m, "m" + std::to_string(m))});
  }
  write_predictions(records, path("preds.jsonl"));
  const std::vector<PredictionRecord> loaded = read_predictions(path("preds.jsonl"));
  ASSERT_EQ(loaded.size(), records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_EQ(loaded[i], records[i]);
  }
}

TEST_F(TempDir, BadWeightSumRejected) {
  PredictionRecord rec{"scene_0", make_mode_set(9, "m0")};
  rec.mode_set.modes[0].weight = 0.5;  // sum now 1.25
  EXPECT_THROW(write_predictions(std::vector<PredictionRecord>{rec}, path("p.jsonl")),
               ValidationError);
}

TEST_F(TempDir, MixtureDumpWrites) {
  GaussianMixture2D g;
  g.components.push_back({0.5, {1.0, 2.0}, {1.0, 0.1, 2.0}});
  g.components.push_back({0.5, {-1.0, 0.0}, {2.0, 0.0, 1.0}});
  write_mixtures(std::vector<GaussianMixture2D>{g}, path("mix.jsonl"));
  std::ifstream in(path("mix.jsonl"));
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("weight"));
    EXPECT_TRUE(j.contains("mean"));
    EXPECT_TRUE(j.contains("cov"));
    ++lines;
  }
  EXPECT_EQ(lines, 2);
}

TEST_F(TempDir, ReportRoundTrip) {
  RunReport report;
  for (int i = 0; i < 4; ++i) {
    ReportRow row;
    row.scene_id = "scene_" + std::to_string(i);
    row.dataset_tag = "Original";
    row.model_config = "m0+m1";
    row.min_ade = {{1, 2.5 + i}, {5, 1.25}, {10, 0.75}};
    row.min_fde = {{1, 5.0}, {5, 2.5}, {10, 1.5}};
    row.uncertainty = {3.1, 2.9, 0.2};
    row.rip = 0.01 * i;
    report.rows.push_back(row);
  }
  write_report_jsonl(report, path("report.jsonl"));
  const RunReport loaded = read_report_jsonl(path("report.jsonl"));
  ASSERT_EQ(loaded.rows.size(), report.rows.size());
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    EXPECT_EQ(loaded.rows[i].scene_id, report.rows[i].scene_id);
    EXPECT_EQ(loaded.rows[i].min_ade, report.rows[i].min_ade);
    EXPECT_EQ(loaded.rows[i].uncertainty.total, report.rows[i].uncertainty.total);
    EXPECT_EQ(loaded.rows[i].rip, report.rows[i].rip);
  }

  write_report_csv(report, path("report.csv"));
  std::ifstream in(path("report.csv"));
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "scene_id,dataset_tag,model_config,min_ade_1,min_ade_5,min_ade_10,"
            "min_fde_1,min_fde_5,min_fde_10,total,aleatoric,epistemic,rip");
}

}  // namespace
}  // namespace traj_uncert
