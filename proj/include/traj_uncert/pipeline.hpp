#pragma once

// Batch drivers behind the CLI: per-scene decomposition reports and the
// four experiment suites (correlation, robustness, OOD correlation, OOD
// detection). All randomness is pre-derived per scene, so results are
// independent of worker scheduling; report rows are sorted by scene_id.

#include <atomic>
#include <cctype>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "traj_uncert/analysis.hpp"
#include "traj_uncert/perturb.hpp"
#include "traj_uncert/scene_io.hpp"
#include "traj_uncert/synthbench.hpp"

namespace traj_uncert {

struct RunConfig {
  long n_per_model{1000};
  double bandwidth{1.0};  // m^2
  std::uint64_t seed{0};
  std::vector<int> k_values{1, 5, 10};
  int parallelism{1};
  bool reuse_samples{false};
  bool seed_by_model_id{false};
};

inline void validate_run_config(const RunConfig& config) {
  if (config.n_per_model < 1) {
    throw ValidationError("config: n_per_model must be >= 1");
  }
  if (!(config.bandwidth > 0.0)) {
    throw ValidationError("config: bandwidth must be positive");
  }
  if (config.k_values.empty()) {
    throw ValidationError("config: k_values must be nonempty");
  }
  for (std::size_t i = 1; i < config.k_values.size(); ++i) {
    if (config.k_values[i] <= config.k_values[i - 1]) {
      throw ValidationError("config: k_values must be sorted ascending");
    }
  }
  if (config.k_values.front() < 1) {
    throw ValidationError("config: k_values must be positive");
  }
  if (config.parallelism < 1) {
    throw ValidationError("config: parallelism must be >= 1");
  }
}

namespace detail {

template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) {
          error = std::current_exception();
        }
      }
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(n));
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w) {
    pool.emplace_back(work);
  }
  for (std::thread& t : pool) {
    t.join();
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

// Extraction scheme: MBRM over the pooled modes for ensembles (k-specific,
// since the objective depends on k), Topk prefixes for single members.
inline std::vector<Trajectory> extract_proposals(
    const EnsemblePrediction& ensemble, int k) {
  if (ensemble.members.size() == 1) {
    const auto available =
        static_cast<int>(ensemble.members.front().modes.size());
    return topk(ensemble.members.front(), std::min(k, available));
  }
  return mbrm(ensemble, k);
}

}  // namespace detail

// One report row per scene: MBRM-extracted (Topk for single members)
// trajectories scored at every configured k, the uncertainty decomposition,
// and the RIP variance baseline. Per-scene estimator seeds derive from
// config.seed and the scene id.
inline RunReport build_report(std::span<const Scene> scenes,
                              std::span<const PredictionRecord> predictions,
                              const RunConfig& config,
                              const std::string& model_config_label = {}) {
  validate_run_config(config);
  std::map<std::string, std::vector<const PredictionRecord*>> by_scene;
  for (const PredictionRecord& rec : predictions) {
    by_scene[rec.scene_id].push_back(&rec);
  }
  std::map<std::string, const Scene*> scene_ids;
  for (const Scene& scene : scenes) {
    scene_ids[scene.scene_id] = &scene;
  }
  for (const auto& [id, recs] : by_scene) {
    if (!scene_ids.count(id)) {
      throw ValidationError("prediction references unknown scene_id '" + id +
                            "'");
    }
  }
  for (const Scene& scene : scenes) {
    if (!by_scene.count(scene.scene_id)) {
      throw ValidationError("no predictions for scene_id '" + scene.scene_id +
                            "'");
    }
  }

  RunReport report;
  report.rows.resize(scenes.size());
  detail::parallel_for(scenes.size(), config.parallelism, [&](std::size_t i) {
    const Scene& scene = scenes[i];
    EnsemblePrediction ensemble;
    ensemble.scene_id = scene.scene_id;
    for (const PredictionRecord* rec : by_scene.at(scene.scene_id)) {
      ensemble.members.push_back(rec->mode_set);
    }
    validate_ensemble(ensemble, scene.ground_truth.length());

    EstimatorConfig est;
    est.n_per_model = config.n_per_model;
    est.seed = config.seed ^ fnv1a64(scene.scene_id);
    est.bandwidth = config.bandwidth;
    est.reuse_samples = config.reuse_samples;
    est.seed_by_model_id = config.seed_by_model_id;

    ReportRow row;
    row.scene_id = scene.scene_id;
    row.dataset_tag = scene.dataset_tag;
    if (!model_config_label.empty()) {
      row.model_config = model_config_label;
    } else {
      for (const ModeSet& member : ensemble.members) {
        if (!row.model_config.empty()) {
          row.model_config += '+';
        }
        row.model_config += member.model_id;
      }
    }
    row.uncertainty = decompose(ensemble, est);
    row.rip = rip_epistemic(ensemble, scene.ground_truth, config.bandwidth);

    for (const int k : config.k_values) {
      const std::vector<Trajectory> proposals =
          detail::extract_proposals(ensemble, k);
      row.min_ade[k] = min_ade(proposals, scene.ground_truth, k).value;
      row.min_fde[k] = min_fde(proposals, scene.ground_truth, k).value;
    }
    report.rows[i] = std::move(row);
  });

  std::sort(report.rows.begin(), report.rows.end(),
            [](const ReportRow& a, const ReportRow& b) {
              return a.scene_id < b.scene_id;
            });
  validate_report(report);
  return report;
}

// Writes <out_base>.csv and <out_base>.jsonl (a trailing .csv/.jsonl on
// out_base is stripped first).
inline std::string report_base_path(std::string out) {
  for (const std::string_view ext : {".csv", ".jsonl"}) {
    if (out.size() > ext.size() &&
        out.compare(out.size() - ext.size(), ext.size(), ext) == 0) {
      out.erase(out.size() - ext.size());
      break;
    }
  }
  return out;
}

inline void write_report(const RunReport& report, const std::string& out) {
  const std::string base = report_base_path(out);
  write_report_csv(report, base + ".csv");
  write_report_jsonl(report, base + ".jsonl");
}

inline RunReport cmd_decompose(const std::string& scenes_path,
                               const std::string& predictions_path,
                               const std::string& out_path,
                               const RunConfig& config) {
  validate_run_config(config);
  const std::vector<Scene> scenes = read_scenes(scenes_path);
  const std::vector<PredictionRecord> predictions =
      read_predictions(predictions_path);
  RunReport report = build_report(scenes, predictions, config);
  if (!out_path.empty()) {
    write_report(report, out_path);
  }
  return report;
}

// Metrics-only table (no uncertainty columns): scene_id, dataset_tag,
// model_config, then min_ade_k / min_fde_k per configured k.
inline void cmd_metrics(const std::string& scenes_path,
                        const std::string& predictions_path,
                        const std::string& out_path, const RunConfig& config) {
  validate_run_config(config);
  const std::vector<Scene> scenes = read_scenes(scenes_path);
  const std::vector<PredictionRecord> predictions =
      read_predictions(predictions_path);
  std::map<std::string, std::vector<const PredictionRecord*>> by_scene;
  for (const PredictionRecord& rec : predictions) {
    by_scene[rec.scene_id].push_back(&rec);
  }
  const std::string base = report_base_path(out_path);
  std::ofstream csv(base + ".csv");
  std::ofstream jsonl(base + ".jsonl");
  if (!csv || !jsonl) {
    throw IoError("cannot open '" + base + ".csv/.jsonl' for writing");
  }
  csv << "scene_id,dataset_tag,model_config";
  for (const int k : config.k_values) {
    csv << ",min_ade_" << k;
  }
  for (const int k : config.k_values) {
    csv << ",min_fde_" << k;
  }
  csv << '\n';
  for (const Scene& scene : scenes) {
    const auto it = by_scene.find(scene.scene_id);
    if (it == by_scene.end()) {
      throw ValidationError("no predictions for scene_id '" + scene.scene_id +
                            "'");
    }
    EnsemblePrediction ensemble;
    ensemble.scene_id = scene.scene_id;
    std::string model_config;
    for (const PredictionRecord* rec : it->second) {
      ensemble.members.push_back(rec->mode_set);
      if (!model_config.empty()) {
        model_config += '+';
      }
      model_config += rec->mode_set.model_id;
    }
    validate_ensemble(ensemble, scene.ground_truth.length());
    std::map<int, std::vector<Trajectory>> proposals_by_k;
    for (const int k : config.k_values) {
      proposals_by_k[k] = detail::extract_proposals(ensemble, k);
    }
    detail::json row{{"scene_id", scene.scene_id},
                     {"dataset_tag", scene.dataset_tag},
                     {"model_config", model_config}};
    csv << scene.scene_id << ',' << scene.dataset_tag << ',' << model_config;
    for (const MetricKind metric : {MetricKind::kMinAde, MetricKind::kMinFde}) {
      detail::json per_k;
      for (const int k : config.k_values) {
        const std::vector<Trajectory>& proposals = proposals_by_k.at(k);
        const MetricValue v = metric == MetricKind::kMinAde
                                  ? min_ade(proposals, scene.ground_truth, k)
                                  : min_fde(proposals, scene.ground_truth, k);
        per_k[std::to_string(k)] = v.value;
        csv << ',' << detail::number_cell(v.value);
      }
      row[metric == MetricKind::kMinAde ? "min_ade" : "min_fde"] =
          std::move(per_k);
    }
    csv << '\n';
    jsonl << row.dump() << '\n';
  }
  csv.flush();
  jsonl.flush();
  if (!csv || !jsonl) {
    throw IoError("write failure on '" + base + ".csv/.jsonl'");
  }
}

enum class Suite { kCorr, kRobustness, kOodCorr, kOodDetect };

inline Suite parse_suite(std::string_view name) {
  if (name == "corr") return Suite::kCorr;
  if (name == "robustness") return Suite::kRobustness;
  if (name == "ood_corr") return Suite::kOodCorr;
  if (name == "ood_detect") return Suite::kOodDetect;
  throw ValidationError("unknown experiment suite '" + std::string(name) + "'");
}

inline std::string_view suite_name(Suite suite) {
  switch (suite) {
    case Suite::kCorr:
      return "corr";
    case Suite::kRobustness:
      return "robustness";
    case Suite::kOodCorr:
      return "ood_corr";
    case Suite::kOodDetect:
      return "ood_detect";
  }
  throw ValidationError("unknown experiment suite");
}

struct ExperimentOptions {
  SceneTemplate scene_template;
  int n_scenes{500};
  int ensemble_size{3};
  int mode_count{10};
  double skill_sigma{1.0};
  double context_sensitivity{1.0};
  int n_seeds{1};
  // Perturbation sets defining the OOD datasets; an empty inner list means
  // an unperturbed copy of the clean dataset.
  std::vector<std::vector<PerturbOp>> datasets{
      {PerturbOp::kRevertEgo},
      {PerturbOp::kScrambleEgo},
      {PerturbOp::kBlackout},
      {PerturbOp::kLaneDeletion},
      {PerturbOp::kScrambleEgo, PerturbOp::kLaneDeletion},
      {PerturbOp::kBlackout, PerturbOp::kScrambleEgo, PerturbOp::kLaneDeletion},
  };
};

namespace detail {

using nlohmann::json;

struct DatasetRun {
  std::string tag;
  std::map<std::string, RunReport> reports;  // model_config -> report
};

// One full pipeline pass (generate/load -> perturb -> predict -> decompose)
// for one run seed. Returns per-dataset reports for the ensemble and each
// single member. A user-supplied workdir/scenes.jsonl fixes the dataset
// across runs; otherwise scenes are regenerated per run seed (and written
// out under a seed-indexed name for inspection, never read back).
inline std::vector<DatasetRun> run_pipeline(
    Suite suite, const std::string& workdir, const RunConfig& config,
    const ExperimentOptions& opts, std::uint64_t run_seed, int run_index,
    std::vector<std::string>* config_names_out) {
  namespace fs = std::filesystem;
  std::vector<Scene> clean;
  const fs::path scene_file = fs::path(workdir) / "scenes.jsonl";
  if (fs::exists(scene_file)) {
    clean = read_scenes(scene_file.string());
  } else {
    clean = gen_scenes(opts.scene_template, opts.n_scenes,
                       derive_seed(run_seed, fnv1a64("scenes")));
    const fs::path generated =
        fs::path(workdir) /
        ("scenes_generated_" + std::to_string(run_index) + ".jsonl");
    write_scenes(clean, generated.string());
  }

  // The corr suite runs on the clean dataset and can consume prediction
  // files directly; the OOD suites re-predict on perturbed scenes, which
  // requires the synthetic predictors.
  const fs::path prediction_file = fs::path(workdir) / "predictions.jsonl";
  if (suite == Suite::kCorr && fs::exists(prediction_file)) {
    const std::vector<PredictionRecord> records =
        read_predictions(prediction_file.string());
    std::vector<std::string> model_ids;
    std::map<std::string, std::vector<PredictionRecord>> by_model;
    for (const PredictionRecord& rec : records) {
      if (!by_model.count(rec.mode_set.model_id)) {
        model_ids.push_back(rec.mode_set.model_id);
      }
      by_model[rec.mode_set.model_id].push_back(rec);
    }
    std::string ensemble_name;
    for (const std::string& id : model_ids) {
      if (!ensemble_name.empty()) {
        ensemble_name += '+';
      }
      ensemble_name += id;
    }
    if (config_names_out) {
      *config_names_out = model_ids;
      config_names_out->insert(config_names_out->begin(), ensemble_name);
    }
    DatasetRun run;
    run.tag = "Original";
    run.reports.emplace(ensemble_name,
                        build_report(clean, records, config, ensemble_name));
    if (model_ids.size() > 1) {
      for (const std::string& id : model_ids) {
        run.reports.emplace(id, build_report(clean, by_model.at(id), config, id));
      }
    }
    std::vector<DatasetRun> out;
    out.push_back(std::move(run));
    return out;
  }

  std::vector<SyntheticPredictor> members;
  for (int m = 0; m < opts.ensemble_size; ++m) {
    SyntheticPredictor p;
    p.model_id = "m" + std::to_string(m);
    p.skill_sigma = opts.skill_sigma;
    p.context_sensitivity = opts.context_sensitivity;
    p.mode_count = opts.mode_count;
    p.seed = derive_seed(run_seed, 1000 + static_cast<std::uint64_t>(m));
    members.push_back(std::move(p));
  }

  std::string ensemble_name;
  for (const SyntheticPredictor& p : members) {
    if (!ensemble_name.empty()) {
      ensemble_name += '+';
    }
    ensemble_name += p.model_id;
  }
  if (config_names_out) {
    config_names_out->clear();
    config_names_out->push_back(ensemble_name);
    for (const SyntheticPredictor& p : members) {
      config_names_out->push_back(p.model_id);
    }
  }

  const bool ood = suite != Suite::kCorr;
  std::vector<std::pair<std::string, std::vector<Scene>>> datasets;
  datasets.emplace_back("Original", clean);
  if (ood) {
    for (const std::vector<PerturbOp>& ops : opts.datasets) {
      if (ops.empty()) {
        datasets.emplace_back("Original", clean);
        continue;
      }
      PerturbationSpec spec{ops, derive_seed(run_seed, fnv1a64("perturb"))};
      datasets.emplace_back(joined_label(ops), traj_uncert::apply(spec, clean));
    }
  }

  std::vector<DatasetRun> out;
  for (const auto& [tag, scenes] : datasets) {
    DatasetRun run;
    run.tag = tag;
    std::vector<std::vector<PredictionRecord>> per_member(members.size());
    for (std::size_t m = 0; m < members.size(); ++m) {
      per_member[m].resize(scenes.size());
      parallel_for(scenes.size(), config.parallelism, [&, m](std::size_t i) {
        per_member[m][i] = {scenes[i].scene_id, predict(members[m], scenes[i])};
      });
    }
    std::vector<PredictionRecord> all;
    for (const std::vector<PredictionRecord>& recs : per_member) {
      all.insert(all.end(), recs.begin(), recs.end());
    }
    run.reports.emplace(ensemble_name,
                        build_report(scenes, all, config, ensemble_name));
    for (std::size_t m = 0; m < members.size(); ++m) {
      run.reports.emplace(members[m].model_id,
                          build_report(scenes, per_member[m], config,
                                       members[m].model_id));
    }
    out.push_back(std::move(run));
  }
  return out;
}

inline json correlation_entries(const std::vector<DatasetRun>& runs,
                                const RunConfig& config) {
  json entries = json::array();
  for (const DatasetRun& run : runs) {
    for (const auto& [name, report] : run.reports) {
      for (const MetricKind metric : {MetricKind::kMinAde, MetricKind::kMinFde}) {
        for (const int k : config.k_values) {
          json entry{{"dataset_tag", run.tag},
                     {"model_config", name},
                     {"metric", metric_name(metric)},
                     {"k", k}};
          for (const UncertaintyKind kind :
               {UncertaintyKind::kTotal, UncertaintyKind::kAleatoric,
                UncertaintyKind::kEpistemic, UncertaintyKind::kRip}) {
            const std::string key =
                "rho_" + std::string(uncertainty_kind_name(kind));
            try {
              entry[key] = correlate(report, kind, metric, k);
            } catch (const ValidationError&) {
              entry[key] = nullptr;  // undefined (e.g. zero-variance column)
            }
          }
          entries.push_back(std::move(entry));
        }
      }
    }
  }
  return entries;
}

inline json robustness_entries(const std::vector<DatasetRun>& runs,
                               const RunConfig& config) {
  json entries = json::array();
  const DatasetRun& clean = runs.front();
  for (std::size_t d = 1; d < runs.size(); ++d) {
    for (const auto& [name, report] : runs[d].reports) {
      for (const MetricKind metric : {MetricKind::kMinAde, MetricKind::kMinFde}) {
        for (const int k : config.k_values) {
          entries.push_back(
              {{"dataset_tag", runs[d].tag},
               {"model_config", name},
               {"metric", metric_name(metric)},
               {"k", k},
               {"delta", delta_metrics(clean.reports.at(name), report, metric, k)}});
        }
      }
    }
  }
  return entries;
}

inline json detection_entries(const std::vector<DatasetRun>& runs) {
  json entries = json::array();
  const DatasetRun& clean = runs.front();
  for (const DatasetRun& run : runs) {
    for (const auto& [name, report] : run.reports) {
      for (const UncertaintyKind kind :
           {UncertaintyKind::kTotal, UncertaintyKind::kAleatoric,
            UncertaintyKind::kEpistemic, UncertaintyKind::kRip}) {
        std::vector<double> values;
        values.reserve(report.rows.size());
        for (const ReportRow& row : report.rows) {
          values.push_back(uncertainty_value(row, kind));
        }
        const QuartileSummary q = quartiles(values);
        json entry{{"dataset_tag", run.tag},
                   {"model_config", name},
                   {"kind", uncertainty_kind_name(kind)},
                   {"q1", q.q1},
                   {"median", q.median},
                   {"q3", q.q3},
                   {"whisker_low", q.whisker_low},
                   {"whisker_high", q.whisker_high}};
        if (&run != &clean) {
          std::vector<double> clean_values;
          for (const ReportRow& row : clean.reports.at(name).rows) {
            clean_values.push_back(uncertainty_value(row, kind));
          }
          const OodSeparation sep = ood_separation(quartiles(clean_values), q);
          entry["median_exceeds_q3"] = sep.median_exceeds_q3;
          entry["median_exceeds_median"] = sep.median_exceeds_median;
        }
        entries.push_back(std::move(entry));
      }
    }
  }
  return entries;
}

}  // namespace detail

// Runs the named experiment end to end and returns the summary JSON, also
// written to <workdir>/<suite>_summary.json. With n_seeds > 1 the whole
// pipeline runs once per derived seed and the summary carries per-seed
// results plus a mean/std aggregate over the numeric entry fields.
inline nlohmann::json cmd_experiment(Suite suite, const std::string& workdir,
                                     const RunConfig& config,
                                     const ExperimentOptions& opts) {
  using detail::json;
  validate_run_config(config);
  if (opts.n_seeds < 1 || opts.n_scenes < 1 || opts.ensemble_size < 1) {
    throw ValidationError("experiment: invalid options");
  }
  std::filesystem::create_directories(workdir);

  json runs = json::array();
  std::vector<std::string> config_names;
  for (int s = 0; s < opts.n_seeds; ++s) {
    const std::uint64_t run_seed =
        opts.n_seeds == 1 ? config.seed
                          : derive_seed(config.seed, static_cast<std::uint64_t>(s));
    RunConfig run_config = config;
    run_config.seed = run_seed;
    std::vector<detail::DatasetRun> data;
    try {
      data = detail::run_pipeline(suite, workdir, run_config, opts, run_seed,
                                  s, &config_names);
    } catch (const ValidationError& e) {
      throw ValidationError("experiment stage 'pipeline': " +
                            std::string(e.what()));
    }
    json results;
    switch (suite) {
      case Suite::kCorr:
      case Suite::kOodCorr:
        results = detail::correlation_entries(data, run_config);
        break;
      case Suite::kRobustness:
        results = detail::robustness_entries(data, run_config);
        break;
      case Suite::kOodDetect:
        results = detail::detection_entries(data);
        break;
    }
    runs.push_back({{"seed", run_seed}, {"results", std::move(results)}});
  }

  json summary{{"suite", suite_name(suite)},
               {"workdir", workdir},
               {"config",
                {{"n_per_model", config.n_per_model},
                 {"bandwidth", config.bandwidth},
                 {"seed", config.seed},
                 {"k_values", config.k_values},
                 {"n_scenes", opts.n_scenes},
                 {"ensemble_size", opts.ensemble_size},
                 {"mode_count", opts.mode_count},
                 {"skill_sigma", opts.skill_sigma},
                 {"context_sensitivity", opts.context_sensitivity},
                 {"template", scene_kind_name(opts.scene_template.kind)},
                 {"n_seeds", opts.n_seeds}}},
               {"model_configs", config_names},
               {"runs", std::move(runs)}};

  // Aggregate numeric fields across seeds, keyed by the identifying fields.
  if (opts.n_seeds > 1) {
    summary["aggregation"] = "mean_std_over_seeds";
    std::map<std::string, std::map<std::string, std::vector<double>>> grouped;
    for (const json& run : summary["runs"]) {
      for (const json& entry : run["results"]) {
        std::string key;
        for (const std::string_view field :
             {"dataset_tag", "model_config", "metric", "kind"}) {
          if (entry.contains(field)) {
            key += entry[std::string(field)].get<std::string>() + "|";
          }
        }
        if (entry.contains("k")) {
          key += std::to_string(entry["k"].get<int>());
        }
        for (const auto& [field, value] : entry.items()) {
          if (value.is_number()) {
            if (field == "k") {
              continue;
            }
            grouped[key][field].push_back(value.get<double>());
          }
        }
      }
    }
    json aggregate = json::object();
    for (const auto& [key, fields] : grouped) {
      json stats = json::object();
      for (const auto& [field, values] : fields) {
        double mean = 0.0;
        for (const double v : values) {
          mean += v;
        }
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (const double v : values) {
          var += (v - mean) * (v - mean);
        }
        var /= static_cast<double>(values.size());
        stats[field] = {{"mean", mean}, {"std", std::sqrt(var)},
                        {"n", values.size()}};
      }
      aggregate[key] = std::move(stats);
    }
    summary["aggregate"] = std::move(aggregate);
  }

  const std::filesystem::path out =
      std::filesystem::path(workdir) /
      (std::string(suite_name(suite)) + "_summary.json");
  std::ofstream f(out);
  if (!f) {
    throw IoError("cannot open '" + out.string() + "' for writing");
  }
  f << summary.dump(2) << '\n';
  if (!f) {
    throw IoError("write failure on '" + out.string() + "'");
  }
  return summary;
}

// Flat key=value configuration file ('#' starts a comment). Keys mirror the
// command-line flags; flags override file values, file values override
// defaults.
inline std::map<std::string, std::string> parse_config_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file '" + path + "'");
  }
  const auto trim = [](std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
  };
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected key = value");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace traj_uncert
