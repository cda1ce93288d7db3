#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "msis/labels.hpp"

namespace msis {

/// The metric is not defined for the input (e.g. only one class present).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Area under the ROC curve via the Mann-Whitney statistic with average ranks
/// for ties. labels are 0/1. Throws UndefinedMetric without both classes.
double auc(std::span<const double> scores, std::span<const double> labels);

/// Per-target metric values of one run; absent where undefined or inactive.
using TargetMetrics = std::array<std::optional<double>, kNumTargets>;

/// Mean over the GB targets that have a value; nullopt if none do.
std::optional<double> mean_gb(const TargetMetrics& m);

enum class EvalScope { kObservedOnly, kFullPopulation };
std::string scope_name(EvalScope s);
std::optional<EvalScope> parse_scope(const std::string& name);

struct TargetSummary {
  std::size_t runs = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) standard deviation
  std::optional<double> gain;
};

struct MetricsReport {
  std::string model;
  std::string baseline;  // empty when no gain is reported
  EvalScope scope = EvalScope::kFullPopulation;
  std::array<std::optional<TargetSummary>, kNumTargets> targets;

  const std::optional<TargetSummary>& at(Target t) const { return targets[index_of(t)]; }
};

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;
};
/// Mean and sample standard deviation; requires at least two values.
Summary mean_std(std::span<const double> values);

/// Aggregates per-seed runs (at least two) into mean/std per target.
MetricsReport report(const std::string& model, std::span<const TargetMetrics> runs, EvalScope scope);
/// Fills gain = mean - baseline mean for every target both reports share.
void attach_gain(MetricsReport& report, const MetricsReport& baseline);

/// One row per (model, target): model,scope,target,runs,mean,std,baseline,gain.
std::string reports_csv(std::span<const MetricsReport> reports);
/// Aligned plain-text table of the GB targets, one line per model.
std::string reports_table(std::span<const MetricsReport> reports);

}  // namespace msis
