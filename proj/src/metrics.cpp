#include "msis/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace msis {

double auc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("auc: scores/labels length mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("auc: NaN score");
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double n_pos = 0.0;
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    // ranks i+1 .. j+1 share their average
    const double avg_rank = 0.5 * static_cast<double>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) {
      if (labels[order[k]] != 0.0) {
        n_pos += 1.0;
        rank_sum += avg_rank;
      }
    }
    i = j + 1;
  }
  const double n_neg = static_cast<double>(scores.size()) - n_pos;
  if (n_pos == 0.0 || n_neg == 0.0) throw UndefinedMetric("auc: need at least one positive and one negative");
  return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

std::optional<double> mean_gb(const TargetMetrics& m) {
  double total = 0.0;
  int count = 0;
  for (Target t : kGbTargets) {
    if (m[index_of(t)]) {
      total += *m[index_of(t)];
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return total / count;
}

std::string scope_name(EvalScope s) {
  return s == EvalScope::kObservedOnly ? "observed-only" : "full-population";
}

std::optional<EvalScope> parse_scope(const std::string& name) {
  if (name == "observed-only") return EvalScope::kObservedOnly;
  if (name == "full-population") return EvalScope::kFullPopulation;
  return std::nullopt;
}

Summary mean_std(std::span<const double> values) {
  if (values.size() < 2) throw std::invalid_argument("mean_std: need at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return Summary{mean, std::sqrt(ss / (n - 1.0))};
}

MetricsReport report(const std::string& model, std::span<const TargetMetrics> runs, EvalScope scope) {
  if (runs.size() < 2) throw std::invalid_argument("report: need at least two runs");
  MetricsReport r;
  r.model = model;
  r.scope = scope;
  for (Target t : kAllTargets) {
    std::vector<double> values;
    for (const auto& run : runs) {
      if (run[index_of(t)]) values.push_back(*run[index_of(t)]);
    }
    if (values.size() < 2) continue;
    const Summary s = mean_std(values);
    r.targets[index_of(t)] = TargetSummary{values.size(), s.mean, s.stddev, std::nullopt};
  }
  return r;
}

void attach_gain(MetricsReport& report, const MetricsReport& baseline) {
  report.baseline = baseline.model;
  for (Target t : kAllTargets) {
    auto& mine = report.targets[index_of(t)];
    const auto& theirs = baseline.targets[index_of(t)];
    if (mine && theirs) mine->gain = mine->mean - theirs->mean;
  }
}

namespace {

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

}  // namespace

std::string reports_csv(std::span<const MetricsReport> reports) {
  std::string out = "model,scope,target,runs,mean,std,baseline,gain\n";
  for (const auto& r : reports) {
    for (Target t : kAllTargets) {
      const auto& s = r.at(t);
      if (!s) continue;
      out += r.model + "," + scope_name(r.scope) + "," + std::string(target_name(t)) + "," +
             std::to_string(s->runs) + "," + fmt(s->mean, "%.10f") + "," + fmt(s->stddev, "%.10f") + "," +
             r.baseline + "," + (s->gain ? fmt(*s->gain, "%.10f") : std::string()) + "\n";
    }
  }
  return out;
}

std::string reports_table(std::span<const MetricsReport> reports) {
  std::size_t width = 5;
  for (const auto& r : reports) width = std::max(width, r.model.size());
  std::ostringstream os;
  auto pad = [&](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };
  os << pad("model", width + 2);
  for (Target t : kGbTargets) os << pad("auc_" + std::string(target_name(t)), 20);
  for (Target t : kGbTargets) os << pad("gain_" + std::string(target_name(t)), 12);
  os << '\n';
  for (const auto& r : reports) {
    os << pad(r.model, width + 2);
    for (Target t : kGbTargets) {
      const auto& s = r.at(t);
      os << pad(s ? fmt(s->mean, "%.4f") + "+-" + fmt(s->stddev, "%.4f") : "-", 20);
    }
    for (Target t : kGbTargets) {
      const auto& s = r.at(t);
      os << pad(s && s->gain ? fmt(*s->gain, "%+.4f") : "-", 12);
    }
    os << '\n';
  }
  if (!reports.empty()) os << "scope: " << scope_name(reports.front().scope) << '\n';
  return os.str();
}

}  // namespace msis
