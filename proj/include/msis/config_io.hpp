#pragma once

// JSON form of the experiment configuration. Every section is optional and
// falls back to the struct defaults; unknown keys and wrong types are
// rejected with the dotted path of the offending field.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "msis/baselines.hpp"
#include "msis/funnel_sim.hpp"
#include "msis/loss.hpp"
#include "msis/metrics.hpp"
#include "msis/model.hpp"
#include "msis/trainer.hpp"

namespace msis {

using Json = nlohmann::ordered_json;

struct SweepConfig {
  std::vector<std::size_t> corridor_dims{2, 4, 8, 16, 24};
  std::vector<double> gammas{0.0, 1e-4, 3e-4, 6e-4, 1e-3, 3e-3};

  friend bool operator==(const SweepConfig&, const SweepConfig&) = default;
};

struct ExperimentConfig {
  SimConfig sim;
  MsisConfig model;
  LossConfig loss;
  TrainConfig train;
  BaselineConfig baseline;
  std::vector<BaselineKind> baselines{BaselineKind::kSingleTask};
  SweepConfig sweep;
  EvalScope scope = EvalScope::kFullPopulation;
  /// Directory holding dataset.csv / counterfactuals.csv; empty means simulate in memory.
  std::filesystem::path data_dir;

  /// Validates every section plus cross-section consistency.
  void validate() const;
};

Json to_json(const SimConfig& c);
Json to_json(const MsisConfig& c);
Json to_json(const LossConfig& c);
Json to_json(const TrainConfig& c);
Json to_json(const BaselineConfig& c);
Json to_json(const ExperimentConfig& c);

// Each reader starts from `base` and overwrites the keys present in `j`.
SimConfig sim_from_json(const Json& j, SimConfig base = {});
MsisConfig model_from_json(const Json& j, MsisConfig base = {});
LossConfig loss_from_json(const Json& j, LossConfig base = {});
TrainConfig train_from_json(const Json& j, TrainConfig base = {});
BaselineConfig baseline_from_json(const Json& j, BaselineConfig base = {});
ExperimentConfig experiment_from_json(const Json& j, ExperimentConfig base = {});

/// Reads and parses a config file. Throws ConfigError (bad content) or
/// ParseError (not JSON).
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& config, const std::filesystem::path& path);

/// Canonical serialization; equal configs give equal text.
std::string canonical_text(const ExperimentConfig& config);

}  // namespace msis
