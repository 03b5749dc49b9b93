#pragma once

// minADE_k / minFDE_k prediction-error metrics: minimum over the first k
// proposals of the average / final-point L2 displacement from ground truth.

#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "traj_uncert/scene.hpp"

namespace traj_uncert {

enum class MetricKind { kMinAde, kMinFde };

inline std::string_view metric_name(MetricKind kind) {
  return kind == MetricKind::kMinAde ? "minADE" : "minFDE";
}

struct MetricValue {
  MetricKind kind{MetricKind::kMinAde};
  int k{1};
  double value{0.0};

  std::string_view name() const { return metric_name(kind); }
};

inline double average_displacement(const Trajectory& a, const Trajectory& b) {
  if (a.length() != b.length() || a.points.empty()) {
    throw ValidationError("average_displacement: trajectory length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    sum += distance(a.points[i], b.points[i]);
  }
  return sum / static_cast<double>(a.points.size());
}

inline double final_displacement(const Trajectory& a, const Trajectory& b) {
  if (a.length() != b.length() || a.points.empty()) {
    throw ValidationError("final_displacement: trajectory length mismatch");
  }
  return distance(a.endpoint(), b.endpoint());
}

namespace detail {

template <typename PerProposal>
MetricValue min_metric(MetricKind kind, std::span<const Trajectory> proposals,
                       const Trajectory& ground_truth, int k,
                       PerProposal&& displacement) {
  if (proposals.empty()) {
    throw ValidationError("min metric: proposals must be nonempty");
  }
  if (k < 1 || static_cast<std::size_t>(k) > proposals.size()) {
    throw ValidationError("min metric: k out of range [1, " +
                          std::to_string(proposals.size()) + "]");
  }
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; ++i) {
    best = std::min(best, displacement(proposals[i], ground_truth));
  }
  return {kind, k, best};
}

}  // namespace detail

// Proposals are expected in the truncation order (highest weight first,
// ties broken by lower mode index); the metric uses the first k entries.
inline MetricValue min_ade(std::span<const Trajectory> proposals,
                           const Trajectory& ground_truth, int k) {
  return detail::min_metric(MetricKind::kMinAde, proposals, ground_truth, k,
                            average_displacement);
}

inline MetricValue min_fde(std::span<const Trajectory> proposals,
                           const Trajectory& ground_truth, int k) {
  return detail::min_metric(MetricKind::kMinFde, proposals, ground_truth, k,
                            final_displacement);
}

}  // namespace traj_uncert
