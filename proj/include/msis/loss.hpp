#pragma once

#include <array>
#include <cstddef>

#include "msis/autodiff.hpp"
#include "msis/dataset.hpp"
#include "msis/labels.hpp"

namespace msis {

struct ForwardResult;

struct LossConfig {
  /// Indexed by Stage.
  std::array<double, 3> stage_weights{1.0, 1.0, 1.0};
  /// Entropy weight per target. The credit target is always labeled, so its
  /// weight is ignored.
  std::array<double, kNumTargets> gamma{0.0, 6e-4, 6e-4, 6e-4, 6e-4, 6e-4};
  Reduction unlabeled_reduction = Reduction::kMean;

  void validate() const;
  double weight(Stage s) const { return stage_weights[static_cast<std::size_t>(s)]; }
  double gamma_for(Target t) const { return t == Target::kCredit ? 0.0 : gamma[index_of(t)]; }
  /// Copy with every entropy weight set to zero.
  LossConfig supervised_only() const;

  friend bool operator==(const LossConfig&, const LossConfig&) = default;
};

struct TargetLoss {
  bool active = false;
  Var supervised;
  Var entropy;
  std::size_t labeled = 0;
  std::size_t unlabeled = 0;
};

struct LossBreakdown {
  std::array<TargetLoss, kNumTargets> targets;
  std::array<double, 3> stage_subtotal{};
  Var total;

  const TargetLoss& at(Target t) const { return targets[index_of(t)]; }
};

/// Stage-weighted objective: every present target contributes
/// masked BCE + gamma * entropy over its unlabeled rows; targets are averaged
/// within a stage and stages combined with the configured weights.
/// `probs` entries that are not valid() are skipped.
LossBreakdown total_loss(const std::array<Var, kNumTargets>& probs, const Batch& batch, const LossConfig& config);
LossBreakdown total_loss(const ForwardResult& forward, const Batch& batch, const LossConfig& config);

/// Value-only binary entropy, clamped like the loss.
double binary_entropy(double p);

}  // namespace msis
