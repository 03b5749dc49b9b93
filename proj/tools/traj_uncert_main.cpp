// Command-line driver: data utilities (synth gen/predict, perturb, metrics)
// and the uncertainty pipeline (decompose, correlate, experiment).
//
// Exit codes: 0 success, 1 internal error, 2 input error.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "traj_uncert/pipeline.hpp"

namespace {

using namespace traj_uncert;

constexpr int kExitInputError = 2;
constexpr int kExitInternalError = 1;

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  for (const char c : csv) {
    if (c == ',') {
      if (!item.empty()) {
        out.push_back(item);
      }
      item.clear();
    } else {
      item += c;
    }
  }
  if (!item.empty()) {
    out.push_back(item);
  }
  return out;
}

std::vector<int> parse_k_list(const std::string& csv) {
  std::vector<int> out;
  for (const std::string& item : split_list(csv)) {
    out.push_back(std::stoi(item));
  }
  return out;
}

std::uint64_t parse_seed(const std::string& text) {
  return std::stoull(text);
}

// Option sources, lowest to highest precedence: built-in default, the
// TRAJ_UNCERT_SEED environment variable (seed only), the --config file,
// explicit flags.
struct ConfigLayer {
  std::map<std::string, std::string> file_values;

  void load(const std::string& path) { file_values = parse_config_file(path); }

  template <typename T, typename Parse>
  void apply(const CLI::App* cmd, const std::string& flag,
             const std::string& key, T& value, Parse&& parse) const {
    if (cmd->count(flag) > 0) {
      return;  // explicit flag wins
    }
    const auto it = file_values.find(key);
    if (it != file_values.end()) {
      value = parse(it->second);
    }
  }

  void apply_seed(const CLI::App* cmd, std::uint64_t& seed) const {
    if (cmd->count("--seed") > 0) {
      return;
    }
    const auto it = file_values.find("seed");
    if (it != file_values.end()) {
      seed = parse_seed(it->second);
      return;
    }
    if (const char* env = std::getenv("TRAJ_UNCERT_SEED")) {
      seed = parse_seed(env);
    }
  }

  void check_known(const std::vector<std::string>& known) const {
    for (const auto& [key, value] : file_values) {
      if (std::find(known.begin(), known.end(), key) == known.end()) {
        throw ValidationError("config file: unknown key '" + key + "'");
      }
    }
  }
};

struct RunFlags {
  std::string config_path;
  std::string k_csv;
  RunConfig config;

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path,
                    "flat key=value configuration file");
    cmd->add_option("--seed", config.seed, "base RNG seed");
    cmd->add_option("--n-per-model", config.n_per_model,
                    "MC samples per ensemble member (N')");
    cmd->add_option("--bandwidth", config.bandwidth,
                    "isotropic endpoint bandwidth in m^2");
    cmd->add_option("--k", k_csv, "comma-separated k values (default 1,5,10)");
    cmd->add_option("--parallelism", config.parallelism,
                    "worker threads for per-scene work");
    cmd->add_flag("--reuse-samples", config.reuse_samples,
                  "total-entropy stage reuses the aleatoric sample streams");
    cmd->add_flag("--seed-by-model-id", config.seed_by_model_id,
                  "derive member streams from model_id instead of index");
  }

  ConfigLayer resolve(const CLI::App* cmd) {
    ConfigLayer layer;
    if (!config_path.empty()) {
      layer.load(config_path);
    }
    layer.check_known({"seed", "n_per_model", "bandwidth", "k_values",
                       "parallelism", "reuse_samples", "seed_by_model_id",
                       "n_scenes", "ensemble_size", "mode_count", "skill_sigma",
                       "context_sensitivity", "template", "n_agents", "n_lanes",
                       "noise_sigma", "seeds"});
    layer.apply_seed(cmd, config.seed);
    layer.apply(cmd, "--n-per-model", "n_per_model", config.n_per_model,
                [](const std::string& s) { return std::stol(s); });
    layer.apply(cmd, "--bandwidth", "bandwidth", config.bandwidth,
                [](const std::string& s) { return std::stod(s); });
    layer.apply(cmd, "--parallelism", "parallelism", config.parallelism,
                [](const std::string& s) { return std::stoi(s); });
    layer.apply(cmd, "--reuse-samples", "reuse_samples", config.reuse_samples,
                [](const std::string& s) { return s == "true" || s == "1"; });
    layer.apply(cmd, "--seed-by-model-id", "seed_by_model_id",
                config.seed_by_model_id,
                [](const std::string& s) { return s == "true" || s == "1"; });
    if (!k_csv.empty()) {
      config.k_values = parse_k_list(k_csv);
    } else if (layer.file_values.count("k_values")) {
      config.k_values = parse_k_list(layer.file_values.at("k_values"));
    }
    validate_run_config(config);
    return layer;
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Uncertainty quantification for trajectory-prediction ensembles"};
  app.require_subcommand(1);

  // decompose
  auto* decompose_cmd = app.add_subcommand(
      "decompose", "per-scene uncertainty + metrics report (CSV and JSONL)");
  std::string scenes_path, predictions_path, out_path;
  RunFlags decompose_flags;
  decompose_cmd->add_option("--scenes", scenes_path, "scene JSONL file")
      ->required();
  decompose_cmd
      ->add_option("--predictions", predictions_path, "prediction JSONL file")
      ->required();
  decompose_cmd->add_option("--out", out_path, "report base path")->required();
  decompose_flags.attach(decompose_cmd);

  // metrics
  auto* metrics_cmd =
      app.add_subcommand("metrics", "metrics-only report (CSV and JSONL)");
  std::string m_scenes, m_predictions, m_out;
  RunFlags metrics_flags;
  metrics_cmd->add_option("--scenes", m_scenes, "scene JSONL file")->required();
  metrics_cmd->add_option("--predictions", m_predictions, "prediction JSONL file")
      ->required();
  metrics_cmd->add_option("--out", m_out, "report base path")->required();
  metrics_flags.attach(metrics_cmd);

  // perturb
  auto* perturb_cmd =
      app.add_subcommand("perturb", "apply OOD manipulations to a scene file");
  std::string ops_csv, perturb_in, perturb_out;
  std::uint64_t perturb_seed = 0;
  perturb_cmd
      ->add_option("--ops", ops_csv,
                   "comma-separated ops: revert_ego, scramble_ego, blackout, "
                   "lane_deletion")
      ->required();
  perturb_cmd->add_option("--seed", perturb_seed, "base RNG seed");
  perturb_cmd->add_option("input", perturb_in, "input scene JSONL")->required();
  perturb_cmd->add_option("output", perturb_out, "output scene JSONL")
      ->required();

  // correlate
  auto* correlate_cmd = app.add_subcommand(
      "correlate", "Pearson correlations from a report JSONL");
  std::string report_path, kind_name, corr_metric, corr_out;
  int corr_k = 0;
  correlate_cmd->add_option("--report", report_path, "report JSONL file")
      ->required();
  correlate_cmd->add_option("--kind", kind_name,
                            "total | aleatoric | epistemic | rip (default all)");
  correlate_cmd->add_option("--metric", corr_metric,
                            "minADE | minFDE (default both)");
  correlate_cmd->add_option("--k", corr_k, "restrict to one k");
  correlate_cmd->add_option("--out", corr_out, "output JSON path (default stdout)");

  // experiment
  auto* experiment_cmd = app.add_subcommand(
      "experiment", "run a full experiment suite, emit a JSON summary");
  std::string suite_str, workdir;
  ExperimentOptions exp_opts;
  std::string template_name = "t_junction";
  RunFlags experiment_flags;
  experiment_cmd
      ->add_option("--suite", suite_str, "corr | robustness | ood_corr | ood_detect")
      ->required();
  experiment_cmd->add_option("--workdir", workdir, "working directory")
      ->required();
  experiment_cmd->add_option("--seeds", exp_opts.n_seeds,
                             "number of pipeline repetitions");
  experiment_cmd->add_option("--n-scenes", exp_opts.n_scenes,
                             "synthetic scenes to generate");
  experiment_cmd->add_option("--ensemble-size", exp_opts.ensemble_size,
                             "synthetic ensemble members");
  experiment_cmd->add_option("--mode-count", exp_opts.mode_count,
                             "modes per synthetic prediction");
  experiment_cmd->add_option("--skill-sigma", exp_opts.skill_sigma,
                             "endpoint noise scale of synthetic predictors");
  experiment_cmd->add_option("--context-sensitivity",
                             exp_opts.context_sensitivity,
                             "corruption sensitivity of synthetic predictors");
  experiment_cmd->add_option("--template", template_name,
                             "straight | t_junction | curve");
  experiment_cmd->add_option("--n-agents", exp_opts.scene_template.n_agents,
                             "agents per synthetic scene");
  experiment_cmd->add_option("--n-lanes", exp_opts.scene_template.n_lanes,
                             "lanes per synthetic scene");
  experiment_cmd->add_option("--noise-sigma", exp_opts.scene_template.noise_sigma,
                             "observation jitter of synthetic scenes");
  experiment_flags.attach(experiment_cmd);

  // synth gen / synth predict
  auto* synth_cmd = app.add_subcommand("synth", "synthetic data utilities");
  synth_cmd->require_subcommand(1);
  auto* gen_cmd = synth_cmd->add_subcommand("gen", "generate synthetic scenes");
  SceneTemplate gen_template;
  std::string gen_kind = "t_junction", gen_out;
  int gen_n = 100;
  std::uint64_t gen_seed = 0;
  gen_cmd->add_option("--template", gen_kind, "straight | t_junction | curve");
  gen_cmd->add_option("--n", gen_n, "number of scenes")->required();
  gen_cmd->add_option("--out", gen_out, "output scene JSONL")->required();
  gen_cmd->add_option("--seed", gen_seed, "base RNG seed");
  gen_cmd->add_option("--n-agents", gen_template.n_agents, "agents per scene");
  gen_cmd->add_option("--n-lanes", gen_template.n_lanes, "lanes per scene");
  gen_cmd->add_option("--noise-sigma", gen_template.noise_sigma,
                      "observation jitter in meters");
  gen_cmd->add_option("--t-in", gen_template.history_steps, "history steps");
  gen_cmd->add_option("--t-out", gen_template.horizon_steps, "horizon steps");
  gen_cmd->add_option("--dt", gen_template.step_seconds, "step seconds");

  auto* predict_cmd =
      synth_cmd->add_subcommand("predict", "run synthetic predictors");
  std::string pr_scenes, pr_out;
  int pr_models = 3;
  SyntheticPredictor pr_proto;
  std::uint64_t pr_seed = 0;
  predict_cmd->add_option("--scenes", pr_scenes, "scene JSONL file")->required();
  predict_cmd->add_option("--out", pr_out, "output prediction JSONL")->required();
  predict_cmd->add_option("--models", pr_models, "number of ensemble members");
  predict_cmd->add_option("--seed", pr_seed, "base RNG seed");
  predict_cmd->add_option("--skill-sigma", pr_proto.skill_sigma,
                          "endpoint noise scale in meters");
  predict_cmd->add_option("--context-sensitivity", pr_proto.context_sensitivity,
                          "corruption sensitivity in [0,1]");
  predict_cmd->add_option("--mode-count", pr_proto.mode_count,
                          "modes per prediction");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    if (*decompose_cmd) {
      decompose_flags.resolve(decompose_cmd);
      cmd_decompose(scenes_path, predictions_path, out_path,
                    decompose_flags.config);
      std::cout << "report written to " << report_base_path(out_path)
                << ".{csv,jsonl}\n";
    } else if (*metrics_cmd) {
      metrics_flags.resolve(metrics_cmd);
      cmd_metrics(m_scenes, m_predictions, m_out, metrics_flags.config);
      std::cout << "metrics written to " << report_base_path(m_out)
                << ".{csv,jsonl}\n";
    } else if (*perturb_cmd) {
      PerturbationSpec spec;
      for (const std::string& name : split_list(ops_csv)) {
        spec.ops.push_back(parse_perturb_op(name));
      }
      if (perturb_cmd->count("--seed") == 0) {
        if (const char* env = std::getenv("TRAJ_UNCERT_SEED")) {
          perturb_seed = parse_seed(env);
        }
      }
      spec.seed = perturb_seed;
      const std::vector<Scene> scenes = read_scenes(perturb_in);
      const std::vector<Scene> out = traj_uncert::apply(spec, scenes);
      write_scenes(out, perturb_out);
      std::cout << out.size() << " scenes written to " << perturb_out << "\n";
    } else if (*correlate_cmd) {
      const RunReport report = read_report_jsonl(report_path);
      std::map<std::pair<std::string, std::string>, RunReport> groups;
      for (const ReportRow& row : report.rows) {
        groups[{row.dataset_tag, row.model_config}].rows.push_back(row);
      }
      std::vector<UncertaintyKind> kinds{
          UncertaintyKind::kTotal, UncertaintyKind::kAleatoric,
          UncertaintyKind::kEpistemic, UncertaintyKind::kRip};
      if (!kind_name.empty()) {
        kinds.assign(1, [&] {
          if (kind_name == "total") return UncertaintyKind::kTotal;
          if (kind_name == "aleatoric") return UncertaintyKind::kAleatoric;
          if (kind_name == "epistemic") return UncertaintyKind::kEpistemic;
          if (kind_name == "rip") return UncertaintyKind::kRip;
          throw ValidationError("unknown uncertainty kind '" + kind_name + "'");
        }());
      }
      std::vector<MetricKind> metrics{MetricKind::kMinAde, MetricKind::kMinFde};
      if (!corr_metric.empty()) {
        if (corr_metric == "minADE") {
          metrics.assign(1, MetricKind::kMinAde);
        } else if (corr_metric == "minFDE") {
          metrics.assign(1, MetricKind::kMinFde);
        } else {
          throw ValidationError("unknown metric '" + corr_metric + "'");
        }
      }
      nlohmann::json entries = nlohmann::json::array();
      for (const auto& [key, group] : groups) {
        std::vector<int> ks;
        for (const auto& [k, v] : group.rows.front().min_ade) {
          ks.push_back(k);
        }
        for (const UncertaintyKind kind : kinds) {
          for (const MetricKind metric : metrics) {
            for (const int k : ks) {
              if (corr_k > 0 && k != corr_k) {
                continue;
              }
              nlohmann::json entry{{"dataset_tag", key.first},
                                   {"model_config", key.second},
                                   {"kind", uncertainty_kind_name(kind)},
                                   {"metric", metric_name(metric)},
                                   {"k", k}};
              try {
                entry["rho"] = correlate(group, kind, metric, k);
              } catch (const ValidationError&) {
                entry["rho"] = nullptr;
              }
              entries.push_back(std::move(entry));
            }
          }
        }
      }
      if (corr_out.empty()) {
        std::cout << entries.dump(2) << "\n";
      } else {
        std::ofstream f(corr_out);
        if (!f) {
          throw IoError("cannot open '" + corr_out + "' for writing");
        }
        f << entries.dump(2) << '\n';
        std::cout << "correlations written to " << corr_out << "\n";
      }
    } else if (*experiment_cmd) {
      const ConfigLayer layer = experiment_flags.resolve(experiment_cmd);
      exp_opts.scene_template.kind = parse_scene_kind(template_name);
      const auto apply_int = [&](const std::string& flag, const std::string& key,
                                 int& value) {
        layer.apply(experiment_cmd, flag, key, value,
                    [](const std::string& s) { return std::stoi(s); });
      };
      apply_int("--seeds", "seeds", exp_opts.n_seeds);
      apply_int("--n-scenes", "n_scenes", exp_opts.n_scenes);
      apply_int("--ensemble-size", "ensemble_size", exp_opts.ensemble_size);
      apply_int("--mode-count", "mode_count", exp_opts.mode_count);
      apply_int("--n-agents", "n_agents", exp_opts.scene_template.n_agents);
      apply_int("--n-lanes", "n_lanes", exp_opts.scene_template.n_lanes);
      layer.apply(experiment_cmd, "--skill-sigma", "skill_sigma",
                  exp_opts.skill_sigma,
                  [](const std::string& s) { return std::stod(s); });
      layer.apply(experiment_cmd, "--context-sensitivity", "context_sensitivity",
                  exp_opts.context_sensitivity,
                  [](const std::string& s) { return std::stod(s); });
      layer.apply(experiment_cmd, "--noise-sigma", "noise_sigma",
                  exp_opts.scene_template.noise_sigma,
                  [](const std::string& s) { return std::stod(s); });
      if (experiment_cmd->count("--template") == 0 &&
          layer.file_values.count("template")) {
        exp_opts.scene_template.kind =
            parse_scene_kind(layer.file_values.at("template"));
      }
      cmd_experiment(parse_suite(suite_str), workdir, experiment_flags.config,
                     exp_opts);
      std::cout << "summary written to " << workdir << "/" << suite_str
                << "_summary.json\n";
    } else if (*gen_cmd) {
      gen_template.kind = parse_scene_kind(gen_kind);
      if (gen_cmd->count("--seed") == 0) {
        if (const char* env = std::getenv("TRAJ_UNCERT_SEED")) {
          gen_seed = parse_seed(env);
        }
      }
      const std::vector<Scene> scenes = gen_scenes(gen_template, gen_n, gen_seed);
      write_scenes(scenes, gen_out);
      std::cout << scenes.size() << " scenes written to " << gen_out << "\n";
    } else if (*predict_cmd) {
      if (predict_cmd->count("--seed") == 0) {
        if (const char* env = std::getenv("TRAJ_UNCERT_SEED")) {
          pr_seed = parse_seed(env);
        }
      }
      if (pr_models < 1) {
        throw ValidationError("--models must be >= 1");
      }
      const std::vector<Scene> scenes = read_scenes(pr_scenes);
      std::vector<PredictionRecord> records;
      records.reserve(scenes.size() * static_cast<std::size_t>(pr_models));
      for (int m = 0; m < pr_models; ++m) {
        SyntheticPredictor predictor = pr_proto;
        predictor.model_id = "m" + std::to_string(m);
        predictor.seed = derive_seed(pr_seed, 1000 + static_cast<std::uint64_t>(m));
        for (const Scene& scene : scenes) {
          records.push_back({scene.scene_id, predict(predictor, scene)});
        }
      }
      write_predictions(records, pr_out);
      std::cout << records.size() << " predictions written to " << pr_out << "\n";
    }
  } catch (const ValidationError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const IoError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternalError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
