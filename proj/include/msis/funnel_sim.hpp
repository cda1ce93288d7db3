#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "msis/dataset.hpp"

namespace msis {

/// Synthetic loan funnel. Two selection gates (credit granting, withdrawal)
/// hide repayment outcomes; the simulator keeps them as counterfactuals.
struct SimConfig {
  std::size_t n = 100000;
  std::size_t feature_dim = 32;
  double acceptance_rate = 0.3;
  /// Cosine between the platform's scoring direction and the true default direction.
  double policy_alignment = 0.6;
  std::size_t n_terms = 6;
  /// Mean shift added to the first half of the coordinates after the OOT cutoff.
  double drift_shift = 0.5;
  double oot_fraction = 0.2;
  std::uint64_t seed = 7;

  // Generative constants. Defaults are calibrated so that roughly 10% of
  // accepted-and-drawn applicants reach mob6.
  double quality_signal = 1.5;
  double quality_noise = 0.5;
  double platform_signal = 1.5;
  double platform_noise = 0.5;
  /// Correlation between the platform's noise and the quality noise: how much
  /// the platform knows about applicants beyond the features.
  double noise_correlation = 0.0;
  /// Loading of the withdrawal propensity on the (negated) quality direction.
  double draw_quality_loading = 0.5;
  double draw_signal = 1.0;
  double draw_intercept = -4.0;
  double hazard_intercept = -0.9;
  double hazard_slope = 6.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// Withdrawal windows behind label_draw_30 / label_draw_90.
inline constexpr int kShortDrawWindow = 30;
inline constexpr int kLongDrawWindow = 90;
/// Observation window for withdrawals; later draws count as never.
inline constexpr int kDrawObservationDays = 365;
inline constexpr int kSimulationDays = 360;

struct PopulationRecord {
  std::int64_t id = 0;
  int timestamp = 0;
  std::vector<double> features;
  /// Latent repayment quality in (0, 1); higher is better.
  double quality = 0.0;
  double platform_score = 0.0;
  std::optional<int> draw_day;
  std::optional<int> default_term;
  std::array<bool, kNumTargets> labels{};

  Counterfactual counterfactual() const;
  friend bool operator==(const PopulationRecord&, const PopulationRecord&) = default;
};

struct Population {
  SimConfig config;
  int cutoff_timestamp = 0;
  double acceptance_threshold = 0.0;
  std::vector<PopulationRecord> records;

  std::vector<Counterfactual> counterfactuals() const;
};

/// First timestamp of the out-of-time period.
int oot_cutoff(const SimConfig& config);

Population generate(const SimConfig& config);

/// What the platform gets to see: credit always; withdrawal labels only for
/// accepted applicants; repayment labels only for accepted applicants who drew
/// within the long withdrawal window.
Examples observe(const Population& population);

}  // namespace msis
