#pragma once

// Statistical layer over per-scene run reports: Pearson correlation between
// uncertainty and error, quartile/boxplot summaries for OOD detection, and
// cross-dataset metric deltas.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "traj_uncert/metrics.hpp"
#include "traj_uncert/uncertainty.hpp"

namespace traj_uncert {

struct ReportRow {
  std::string scene_id;
  std::string dataset_tag;
  std::string model_config;
  std::map<int, double> min_ade;  // k -> meters
  std::map<int, double> min_fde;
  UncertaintyTriple uncertainty;
  double rip{0.0};
};

struct RunReport {
  std::vector<ReportRow> rows;
};

inline void validate_report(const RunReport& report) {
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (const ReportRow& row : report.rows) {
    if (!seen.insert({row.dataset_tag, row.model_config, row.scene_id}).second) {
      throw ValidationError("report: duplicate scene_id '" + row.scene_id +
                            "' for (" + row.dataset_tag + ", " +
                            row.model_config + ")");
    }
  }
}

enum class UncertaintyKind { kTotal, kAleatoric, kEpistemic, kRip };

inline std::string_view uncertainty_kind_name(UncertaintyKind kind) {
  switch (kind) {
    case UncertaintyKind::kTotal:
      return "total";
    case UncertaintyKind::kAleatoric:
      return "aleatoric";
    case UncertaintyKind::kEpistemic:
      return "epistemic";
    case UncertaintyKind::kRip:
      return "rip";
  }
  throw ValidationError("unknown uncertainty kind");
}

inline double uncertainty_value(const ReportRow& row, UncertaintyKind kind) {
  switch (kind) {
    case UncertaintyKind::kTotal:
      return row.uncertainty.total;
    case UncertaintyKind::kAleatoric:
      return row.uncertainty.aleatoric;
    case UncertaintyKind::kEpistemic:
      return row.uncertainty.epistemic;
    case UncertaintyKind::kRip:
      return row.rip;
  }
  throw ValidationError("unknown uncertainty kind");
}

inline double metric_value(const ReportRow& row, MetricKind metric, int k) {
  const std::map<int, double>& values =
      metric == MetricKind::kMinAde ? row.min_ade : row.min_fde;
  const auto it = values.find(k);
  if (it == values.end()) {
    throw ValidationError("report row '" + row.scene_id + "': no " +
                          std::string(metric_name(metric)) + "_" +
                          std::to_string(k) + " column");
  }
  return it->second;
}

// Sample Pearson correlation, accumulated with Welford-style running
// co-moments. Zero variance in either input is an explicit error.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw ValidationError("pearson: input lengths differ");
  }
  if (xs.size() < 2) {
    throw ValidationError("pearson: need at least 2 pairs");
  }
  double mean_x = 0.0, mean_y = 0.0, m_xx = 0.0, m_yy = 0.0, m_xy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double dx = xs[i] - mean_x;
    const double dy = ys[i] - mean_y;
    mean_x += dx / n;
    mean_y += dy / n;
    m_xx += dx * (xs[i] - mean_x);
    m_yy += dy * (ys[i] - mean_y);
    m_xy += dx * (ys[i] - mean_y);
  }
  if (!(m_xx > 0.0) || !(m_yy > 0.0)) {
    throw ValidationError("pearson: undefined correlation (zero variance)");
  }
  const double rho = m_xy / std::sqrt(m_xx * m_yy);
  return std::clamp(rho, -1.0, 1.0);
}

inline double correlate(const RunReport& report, UncertaintyKind kind,
                        MetricKind metric, int k) {
  std::vector<double> xs, ys;
  xs.reserve(report.rows.size());
  ys.reserve(report.rows.size());
  for (const ReportRow& row : report.rows) {
    xs.push_back(uncertainty_value(row, kind));
    ys.push_back(metric_value(row, metric, k));
  }
  if (xs.empty()) {
    throw ValidationError("correlate: report is empty");
  }
  return pearson(xs, ys);
}

struct QuartileSummary {
  double q1{0.0};
  double median{0.0};
  double q3{0.0};
  double whisker_low{0.0};
  double whisker_high{0.0};
};

// Linear-interpolation (type-7) quantiles; whiskers at the most extreme
// points within 1.5 IQR of the box.
inline QuartileSummary quartiles(std::span<const double> values) {
  if (values.empty()) {
    throw ValidationError("quartiles: values must be nonempty");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) {
      return sorted.back();
    }
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
  };
  QuartileSummary s;
  s.q1 = quantile(0.25);
  s.median = quantile(0.5);
  s.q3 = quantile(0.75);
  const double iqr = s.q3 - s.q1;
  const double lo_limit = s.q1 - 1.5 * iqr;
  const double hi_limit = s.q3 + 1.5 * iqr;
  s.whisker_low = s.q3;
  s.whisker_high = s.q1;
  for (const double v : sorted) {
    if (v >= lo_limit) {
      s.whisker_low = std::min(s.whisker_low, v);
    }
    if (v <= hi_limit) {
      s.whisker_high = std::max(s.whisker_high, v);
    }
  }
  return s;
}

struct OodSeparation {
  bool median_exceeds_q3{false};
  bool median_exceeds_median{false};
};

// Strict exceedance of the OOD median over the clean box statistics;
// equality does not count.
inline OodSeparation ood_separation(const QuartileSummary& clean,
                                    const QuartileSummary& ood) {
  return {ood.median > clean.q3, ood.median > clean.median};
}

// mean(metric over OOD rows) - mean(metric over clean rows).
inline double delta_metrics(const RunReport& report_clean,
                            const RunReport& report_ood, MetricKind metric,
                            int k) {
  const auto configs = [](const RunReport& r) {
    std::set<std::string> out;
    for (const ReportRow& row : r.rows) {
      out.insert(row.model_config);
    }
    return out;
  };
  if (configs(report_clean) != configs(report_ood)) {
    throw ValidationError("delta_metrics: reports have mismatched model_config");
  }
  const auto mean_of = [&](const RunReport& r) {
    if (r.rows.empty()) {
      throw ValidationError("delta_metrics: empty report");
    }
    double sum = 0.0;
    for (const ReportRow& row : r.rows) {
      sum += metric_value(row, metric, k);
    }
    return sum / static_cast<double>(r.rows.size());
  };
  return mean_of(report_ood) - mean_of(report_clean);
}

}  // namespace traj_uncert
