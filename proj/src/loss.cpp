#include "msis/loss.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "msis/model.hpp"

namespace msis {

void LossConfig::validate() const {
  for (double w : stage_weights) {
    if (!(w >= 0.0)) throw ConfigError("loss.stage_weights: weights must be non-negative");
  }
  for (double g : gamma) {
    if (!(g >= 0.0)) throw ConfigError("loss.gamma: weights must be non-negative");
  }
}

LossConfig LossConfig::supervised_only() const {
  LossConfig c = *this;
  c.gamma.fill(0.0);
  return c;
}

double binary_entropy(double p) {
  p = std::clamp(p, kProbEpsilon, 1.0 - kProbEpsilon);
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

LossBreakdown total_loss(const std::array<Var, kNumTargets>& probs, const Batch& batch, const LossConfig& config) {
  LossBreakdown out;
  std::array<std::vector<Var>, 3> stage_terms;
  Tape* tape = nullptr;
  for (Target t : kAllTargets) {
    const Var& p = probs[index_of(t)];
    if (!p.valid()) continue;
    tape = &p.tape();
    TargetLoss& tl = out.targets[index_of(t)];
    tl.active = true;
    const auto mask = batch.mask_column(t);
    tl.labeled = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), 1.0));
    tl.unlabeled = mask.size() - tl.labeled;
    tl.supervised = masked_bce(p, batch.label_column(t), mask);
    tl.entropy = entropy_regularizer(p, mask, config.unlabeled_reduction);
    const std::array<Var, 2> parts{tl.supervised, tl.entropy};
    const std::array<double, 2> weights{1.0, config.gamma_for(t)};
    stage_terms[static_cast<std::size_t>(stage_of(t))].push_back(weighted_sum(parts, weights));
  }
  if (tape == nullptr) throw ContractError("total_loss: no target predictions");

  std::vector<Var> stage_vars;
  std::vector<double> stage_weights;
  for (std::size_t s = 0; s < 3; ++s) {
    if (stage_terms[s].empty()) continue;
    const std::vector<double> avg(stage_terms[s].size(), 1.0 / static_cast<double>(stage_terms[s].size()));
    const Var subtotal = weighted_sum(stage_terms[s], avg);
    out.stage_subtotal[s] = subtotal.scalar();
    stage_vars.push_back(subtotal);
    stage_weights.push_back(config.stage_weights[s]);
  }
  out.total = weighted_sum(stage_vars, stage_weights);
  return out;
}

LossBreakdown total_loss(const ForwardResult& forward, const Batch& batch, const LossConfig& config) {
  return total_loss(forward.probability, batch, config);
}

}  // namespace msis
