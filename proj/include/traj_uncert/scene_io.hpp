#pragma once

// JSONL file formats: scenes, predictions, run reports, and the optional
// mixture dump. One JSON object per line, UTF-8, numbers at full round-trip
// precision. Unknown fields in input records are ignored.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "traj_uncert/analysis.hpp"
#include "traj_uncert/gmm.hpp"
#include "traj_uncert/scene.hpp"

namespace traj_uncert {

struct PredictionRecord {
  std::string scene_id;
  ModeSet mode_set;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

namespace detail {

using nlohmann::json;

inline json point_to_json(Vec2 p) { return json::array({p.x, p.y}); }

inline Vec2 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw ValidationError("expected [x, y] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json trajectory_to_json(const Trajectory& t) {
  json arr = json::array();
  for (const Vec2& p : t.points) {
    arr.push_back(point_to_json(p));
  }
  return arr;
}

inline Trajectory trajectory_from_json(const json& j) {
  Trajectory t;
  for (const json& p : j) {
    t.points.push_back(point_from_json(p));
  }
  return t;
}

template <typename Parse>
auto parse_jsonl(const std::string& path, Parse&& parse_record) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open '" + path + "' for reading");
  }
  std::vector<decltype(parse_record(json{}))> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(parse_record(json::parse(line)));
    } catch (const json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": parse error: " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " +
                            e.what());
    }
  }
  if (in.bad()) {
    throw IoError("read failure on '" + path + "'");
  }
  return out;
}

template <typename Range, typename ToJson>
void write_jsonl(const Range& records, const std::string& path,
                 ToJson&& to_json) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  for (const auto& record : records) {
    out << to_json(record).dump() << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on '" + path + "'");
  }
}

}  // namespace detail

inline std::vector<Scene> read_scenes(
    const std::string& path, std::optional<std::size_t> expected_horizon = {}) {
  using detail::json;
  return detail::parse_jsonl(path, [&](const json& j) {
    Scene scene;
    scene.scene_id = j.at("scene_id").get<std::string>();
    scene.dataset_tag = j.value("dataset_tag", std::string{});
    for (const json& ja : j.at("agents")) {
      AgentHistory agent;
      agent.agent_id = ja.at("agent_id").get<std::string>();
      agent.is_target = ja.value("is_target", false);
      for (const json& js : ja.at("states")) {
        if (!js.is_array() || js.size() != 3) {
          throw ValidationError("agent '" + agent.agent_id +
                                "': states must be [x, y, t] triples");
        }
        agent.states.push_back(
            {{js[0].get<double>(), js[1].get<double>()}, js[2].get<double>()});
      }
      scene.agents.push_back(std::move(agent));
    }
    if (j.contains("lanes")) {
      for (const json& jl : j.at("lanes")) {
        scene.lanes.push_back({jl.at("lane_id").get<std::string>(),
                               detail::trajectory_from_json(jl.at("points")).points});
      }
    }
    scene.ground_truth = detail::trajectory_from_json(j.at("ground_truth"));
    validate_scene(scene, expected_horizon);
    return scene;
  });
}

inline void write_scenes(std::span<const Scene> scenes,
                         const std::string& path) {
  using detail::json;
  for (const Scene& scene : scenes) {
    validate_scene(scene);
  }
  detail::write_jsonl(scenes, path, [](const Scene& scene) {
    json j;
    j["scene_id"] = scene.scene_id;
    j["dataset_tag"] = scene.dataset_tag;
    json agents = json::array();
    for (const AgentHistory& agent : scene.agents) {
      json states = json::array();
      for (const AgentState& s : agent.states) {
        states.push_back(json::array({s.position.x, s.position.y, s.timestamp}));
      }
      agents.push_back({{"agent_id", agent.agent_id},
                        {"is_target", agent.is_target},
                        {"states", std::move(states)}});
    }
    j["agents"] = std::move(agents);
    json lanes = json::array();
    for (const LanePolyline& lane : scene.lanes) {
      json points = json::array();
      for (const Vec2& p : lane.points) {
        points.push_back(detail::point_to_json(p));
      }
      lanes.push_back({{"lane_id", lane.lane_id}, {"points", std::move(points)}});
    }
    j["lanes"] = std::move(lanes);
    j["ground_truth"] = detail::trajectory_to_json(scene.ground_truth);
    return j;
  });
}

inline std::vector<PredictionRecord> read_predictions(
    const std::string& path, std::optional<std::size_t> expected_horizon = {}) {
  using detail::json;
  return detail::parse_jsonl(path, [&](const json& j) {
    PredictionRecord rec;
    rec.scene_id = j.at("scene_id").get<std::string>();
    rec.mode_set.model_id = j.at("model_id").get<std::string>();
    for (const json& jm : j.at("modes")) {
      Mode mode;
      mode.weight = jm.at("weight").get<double>();
      mode.trajectory = detail::trajectory_from_json(jm.at("points"));
      rec.mode_set.modes.push_back(std::move(mode));
    }
    validate_mode_set(rec.mode_set, expected_horizon);
    return rec;
  });
}

inline void write_predictions(std::span<const PredictionRecord> records,
                              const std::string& path) {
  using detail::json;
  for (const PredictionRecord& rec : records) {
    validate_mode_set(rec.mode_set);
  }
  detail::write_jsonl(records, path, [](const PredictionRecord& rec) {
    json modes = json::array();
    for (const Mode& mode : rec.mode_set.modes) {
      modes.push_back({{"weight", mode.weight},
                       {"points", detail::trajectory_to_json(mode.trajectory)}});
    }
    return json{{"scene_id", rec.scene_id},
                {"model_id", rec.mode_set.model_id},
                {"modes", std::move(modes)}};
  });
}

// Debug dump: one component per line. Not load-bearing.
inline void write_mixtures(std::span<const GaussianMixture2D> mixtures,
                           const std::string& path) {
  using detail::json;
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  for (std::size_t i = 0; i < mixtures.size(); ++i) {
    for (const GaussianComponent& c : mixtures[i].components) {
      json j{{"mixture", i},
             {"weight", c.weight},
             {"mean", json::array({c.mean.x, c.mean.y})},
             {"cov", json::array({json::array({c.covariance.xx, c.covariance.xy}),
                                  json::array({c.covariance.xy, c.covariance.yy})})}};
      out << j.dump() << '\n';
    }
  }
  if (!out) {
    throw IoError("write failure on '" + path + "'");
  }
}

namespace detail {

inline json report_row_to_json(const ReportRow& row) {
  json ade, fde;
  for (const auto& [k, v] : row.min_ade) {
    ade[std::to_string(k)] = v;
  }
  for (const auto& [k, v] : row.min_fde) {
    fde[std::to_string(k)] = v;
  }
  return json{{"scene_id", row.scene_id},
              {"dataset_tag", row.dataset_tag},
              {"model_config", row.model_config},
              {"min_ade", std::move(ade)},
              {"min_fde", std::move(fde)},
              {"total", row.uncertainty.total},
              {"aleatoric", row.uncertainty.aleatoric},
              {"epistemic", row.uncertainty.epistemic},
              {"rip", row.rip}};
}

// Shortest round-trip decimal form, reused for the CSV cells so both report
// formats carry identical values.
inline std::string number_cell(double v) { return json(v).dump(); }

}  // namespace detail

inline void write_report_jsonl(const RunReport& report,
                               const std::string& path) {
  detail::write_jsonl(report.rows, path, detail::report_row_to_json);
}

inline RunReport read_report_jsonl(const std::string& path) {
  using detail::json;
  RunReport report;
  report.rows = detail::parse_jsonl(path, [](const json& j) {
    ReportRow row;
    row.scene_id = j.at("scene_id").get<std::string>();
    row.dataset_tag = j.at("dataset_tag").get<std::string>();
    row.model_config = j.at("model_config").get<std::string>();
    for (const auto& [key, value] : j.at("min_ade").items()) {
      row.min_ade[std::stoi(key)] = value.get<double>();
    }
    for (const auto& [key, value] : j.at("min_fde").items()) {
      row.min_fde[std::stoi(key)] = value.get<double>();
    }
    row.uncertainty.total = j.at("total").get<double>();
    row.uncertainty.aleatoric = j.at("aleatoric").get<double>();
    row.uncertainty.epistemic = j.at("epistemic").get<double>();
    row.rip = j.at("rip").get<double>();
    return row;
  });
  validate_report(report);
  return report;
}

inline void write_report_csv(const RunReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot open '" + path + "' for writing");
  }
  std::vector<int> ks;
  if (!report.rows.empty()) {
    for (const auto& [k, v] : report.rows.front().min_ade) {
      ks.push_back(k);
    }
  }
  out << "scene_id,dataset_tag,model_config";
  for (const int k : ks) {
    out << ",min_ade_" << k;
  }
  for (const int k : ks) {
    out << ",min_fde_" << k;
  }
  out << ",total,aleatoric,epistemic,rip\n";
  for (const ReportRow& row : report.rows) {
    out << row.scene_id << ',' << row.dataset_tag << ',' << row.model_config;
    for (const int k : ks) {
      out << ',' << detail::number_cell(metric_value(row, MetricKind::kMinAde, k));
    }
    for (const int k : ks) {
      out << ',' << detail::number_cell(metric_value(row, MetricKind::kMinFde, k));
    }
    out << ',' << detail::number_cell(row.uncertainty.total) << ','
        << detail::number_cell(row.uncertainty.aleatoric) << ','
        << detail::number_cell(row.uncertainty.epistemic) << ','
        << detail::number_cell(row.rip) << '\n';
  }
  out.flush();
  if (!out) {
    throw IoError("write failure on '" + path + "'");
  }
}

}  // namespace traj_uncert
