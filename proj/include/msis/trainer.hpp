#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "msis/autodiff.hpp"
#include "msis/dataset.hpp"
#include "msis/loss.hpp"
#include "msis/metrics.hpp"
#include "msis/model.hpp"

namespace msis {

using Predictions = std::array<Var, kNumTargets>;

/// Anything the trainer can fit: a parameter initializer plus a predictor
/// that yields probabilities for its targets.
struct Learner {
  std::string name;
  std::vector<Target> targets;
  std::function<ParamStore(std::uint64_t seed)> init;
  std::function<Predictions(Tape&, ParamStore&, const Tensor2D&)> predict;
};

Learner msis_learner(const MsisConfig& config, std::string name = "msis");

/// Probabilities for every example, chunked, without recording a tape.
/// Inactive targets yield empty vectors.
std::array<std::vector<double>, kNumTargets> predict_all(const Learner& learner, ParamStore& params,
                                                         const Examples& examples);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 256;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t patience = 5;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  /// Disables early stopping (every epoch runs; the best epoch is still returned).
  bool early_stopping = true;

  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TargetEpochStats {
  bool active = false;
  double supervised = 0.0;  // mean over batches
  double entropy = 0.0;     // mean over batches
  std::size_t labeled = 0;
  std::size_t unlabeled = 0;
  std::optional<double> val_auc;
  /// Mean prediction entropy over training rows where this target is unobserved.
  std::optional<double> unlabeled_entropy;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double train_loss = 0.0;
  std::optional<double> selection_metric;
  std::array<TargetEpochStats, kNumTargets> targets;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;

  const EpochRecord& best() const { return epochs.at(best_epoch - 1); }
};

struct TrainResult {
  ParamStore params;  // checkpoint of the best validation epoch
  TrainHistory history;
};

/// Validation metric used for early stopping: mean validation AUC over the
/// learner's GB targets, or over all its targets when it has none.
std::optional<double> selection_metric(const TargetMetrics& val_auc, const std::vector<Target>& targets);

/// Mini-batch Adam on the stage-weighted loss with early stopping on the
/// validation metric. Deterministic given `seed`.
/// Called after every epoch with its record and the current parameters.
using EpochCallback = std::function<void(const EpochRecord&, const ParamStore&)>;

TrainResult train(const Learner& learner, const LossConfig& loss, const TrainConfig& config, const Split& data,
                  std::uint64_t seed, const EpochCallback& on_epoch = {});

TrainResult train_run(const MsisConfig& model, const LossConfig& loss, const TrainConfig& config,
                      const Split& data, std::uint64_t seed);

/// CSV: epoch,target,supervised,entropy,labeled,unlabeled,val_auc,unlabeled_entropy,train_loss,best
std::string training_log_csv(const TrainHistory& history);

}  // namespace msis
