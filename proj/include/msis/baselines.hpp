#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "msis/trainer.hpp"

namespace msis {

enum class BaselineKind { kSingleTask, kSingleTaskEntropy, kFlatMultitask };

std::string baseline_name(BaselineKind kind);
std::optional<BaselineKind> parse_baseline(const std::string& name);

/// Hidden widths of the single-task MLPs. The defaults put one MLP within
/// 10% of the default MSIS parameter count.
struct BaselineConfig {
  std::vector<std::size_t> hidden{128, 48};

  friend bool operator==(const BaselineConfig&, const BaselineConfig&) = default;
};

/// Single-target MLP `mlp.<target>` reading raw features.
Learner single_task_learner(Target target, std::size_t input_dim, const BaselineConfig& config);
std::size_t single_task_parameter_count(std::size_t input_dim, const BaselineConfig& config);

/// MSIS architecture with the corridor severed: shared bottom, towers, heads.
MsisConfig flat_multitask_config(MsisConfig base);

/// Trains one baseline with the same optimizer and early-stopping protocol as
/// MSIS. Single-task kinds take exactly one GB target and see only its
/// observed labels; the entropy variant adds the unlabeled-entropy term with
/// the configured gamma. Throws ConfigError when the target has no observed
/// training labels.
TrainResult train_baseline(BaselineKind kind, const std::vector<Target>& targets, const MsisConfig& model,
                           const BaselineConfig& baseline, const LossConfig& loss, const TrainConfig& train_config,
                           const Split& data, std::uint64_t seed);

/// The learner train_baseline fits, for prediction after training.
Learner baseline_learner(BaselineKind kind, const std::vector<Target>& targets, const MsisConfig& model,
                         const BaselineConfig& baseline);

}  // namespace msis
