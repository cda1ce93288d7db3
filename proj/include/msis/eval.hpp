#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msis/baselines.hpp"
#include "msis/dataset.hpp"
#include "msis/funnel_sim.hpp"
#include "msis/gradcheck.hpp"
#include "msis/metrics.hpp"
#include "msis/trainer.hpp"

namespace msis {

/// Standardized out-of-time split plus the simulator's counterfactual outcomes.
struct ExperimentData {
  Split split;
  Standardizer standardizer;
  CounterfactualTable counterfactuals;
};

ExperimentData prepare_experiment(const Examples& observed, std::span<const Counterfactual> counterfactuals,
                                  int cutoff_timestamp, std::uint64_t split_seed);
ExperimentData prepare_experiment(const Population& population);

/// AUC per target of precomputed scores. Observed-only scope uses the
/// examples' observed labels; full-population scope scores every example
/// against its counterfactual label. Targets with empty score vectors, or
/// where the metric is undefined, are left absent.
TargetMetrics evaluate_scores(const std::array<std::vector<double>, kNumTargets>& scores, const Examples& examples,
                              EvalScope scope, const CounterfactualTable* counterfactuals);

TargetMetrics evaluate(const Learner& learner, ParamStore& params, const Examples& examples, EvalScope scope,
                       const CounterfactualTable* counterfactuals);

struct RunResult {
  std::uint64_t seed = 0;
  TargetMetrics metrics;
  std::size_t best_epoch = 0;  // of the last model trained for this seed

  friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Trains and evaluates MSIS once per seed on the test split.
std::vector<RunResult> repeat_experiment(const MsisConfig& model, const LossConfig& loss, const TrainConfig& train,
                                         const ExperimentData& data, std::span<const std::uint64_t> seeds,
                                         EvalScope scope);

/// Same protocol for a baseline. Single-task kinds train one model per GB
/// target of `model` and report each on its own target.
std::vector<RunResult> repeat_baseline(BaselineKind kind, const MsisConfig& model, const BaselineConfig& baseline,
                                       const LossConfig& loss, const TrainConfig& train, const ExperimentData& data,
                                       std::span<const std::uint64_t> seeds, EvalScope scope);

enum class AblationVariant { kFull, kSingleIntraTarget, kNoSemiSupervised, kOneAuxiliaryStage, kNoCorridor };
inline constexpr std::array<AblationVariant, 5> kAllAblations = {
    AblationVariant::kFull, AblationVariant::kSingleIntraTarget, AblationVariant::kNoSemiSupervised,
    AblationVariant::kOneAuxiliaryStage, AblationVariant::kNoCorridor};

std::string ablation_name(AblationVariant v);
std::optional<AblationVariant> parse_ablation(const std::string& name);

/// One trainable configuration; `evaluated` lists the targets whose metrics it reports.
struct AblationModel {
  MsisConfig model;
  LossConfig loss;
  std::vector<Target> evaluated;
};

/// Models a variant trains per seed. Single-intra-target yields one model per
/// GB target (WS keeps draw_90 only); the others yield one.
std::vector<AblationModel> ablation_models(AblationVariant variant, const MsisConfig& base, const LossConfig& loss);

struct AblationResult {
  AblationVariant variant;
  std::vector<RunResult> runs;
  MetricsReport report;
};

AblationResult ablate(AblationVariant variant, const MsisConfig& base, const LossConfig& loss,
                      const TrainConfig& train, const ExperimentData& data, std::span<const std::uint64_t> seeds,
                      EvalScope scope);

/// `size` rows of `examples`, half with observed GB labels where enough
/// exist, the rest without; rows are picked by a seeded shuffle.
Batch mixed_batch(const Examples& examples, std::size_t size, std::uint64_t seed);

/// Finite-difference check of the full stage-weighted loss of a freshly
/// initialised MSIS model on one batch.
GradCheckReport msis_gradcheck(const MsisConfig& model, const LossConfig& loss, const Batch& batch,
                               std::uint64_t init_seed, double step, double tol);

/// CSV of per-seed results: model,seed,target,auc.
std::string runs_csv(const std::string& model, std::span<const RunResult> runs);
std::vector<TargetMetrics> metrics_of(std::span<const RunResult> runs);

}  // namespace msis
