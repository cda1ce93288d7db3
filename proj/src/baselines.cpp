#include "msis/baselines.hpp"

#include <random>

#include "msis/layers.hpp"

namespace msis {

std::string baseline_name(BaselineKind kind) {
  switch (kind) {
    case BaselineKind::kSingleTask: return "single_task";
    case BaselineKind::kSingleTaskEntropy: return "single_task_entropy";
    case BaselineKind::kFlatMultitask: return "flat_multitask";
  }
  return "unknown";
}

std::optional<BaselineKind> parse_baseline(const std::string& name) {
  for (auto k : {BaselineKind::kSingleTask, BaselineKind::kSingleTaskEntropy, BaselineKind::kFlatMultitask}) {
    if (baseline_name(k) == name) return k;
  }
  return std::nullopt;
}

Learner single_task_learner(Target target, std::size_t input_dim, const BaselineConfig& config) {
  std::vector<std::size_t> widths = config.hidden;
  widths.push_back(1);
  const std::string prefix = "mlp." + std::string(target_name(target));
  Learner l;
  l.name = "single_task_" + std::string(target_name(target));
  l.targets = {target};
  l.init = [=](std::uint64_t seed) {
    ParamStore params(seed);
    std::mt19937_64 rng(seed);
    add_mlp(params, prefix, input_dim, widths, rng);
    return params;
  };
  l.predict = [=](Tape& tape, ParamStore& params, const Tensor2D& x) {
    if (x.cols() != input_dim) {
      throw DimensionError("single-task MLP: features " + x.shape_string() + " but input_dim is " +
                           std::to_string(input_dim));
    }
    Predictions p;
    p[index_of(target)] = sigmoid(apply_mlp(tape, params, prefix, widths.size(), tape.constant(x), true));
    return p;
  };
  return l;
}

std::size_t single_task_parameter_count(std::size_t input_dim, const BaselineConfig& config) {
  std::size_t n = 0;
  std::size_t in = input_dim;
  for (std::size_t w : config.hidden) {
    n += in * w + w;
    in = w;
  }
  return n + in + 1;
}

MsisConfig flat_multitask_config(MsisConfig base) {
  base.corridor = false;
  return base;
}

Learner baseline_learner(BaselineKind kind, const std::vector<Target>& targets, const MsisConfig& model,
                         const BaselineConfig& baseline) {
  if (kind == BaselineKind::kFlatMultitask) return msis_learner(flat_multitask_config(model), "flat_multitask");
  if (targets.size() != 1 || stage_of(targets.front()) != Stage::kGB) {
    throw ConfigError("baseline." + baseline_name(kind) + ": takes exactly one GB target");
  }
  Learner l = single_task_learner(targets.front(), model.input_dim, baseline);
  if (kind == BaselineKind::kSingleTaskEntropy) l.name = "single_task_entropy_" + std::string(target_name(targets.front()));
  return l;
}

TrainResult train_baseline(BaselineKind kind, const std::vector<Target>& targets, const MsisConfig& model,
                           const BaselineConfig& baseline, const LossConfig& loss, const TrainConfig& train_config,
                           const Split& data, std::uint64_t seed) {
  const Learner learner = baseline_learner(kind, targets, model, baseline);
  if (kind == BaselineKind::kFlatMultitask) return train(learner, loss, train_config, data, seed);

  const Target target = targets.front();
  bool any_labeled = false;
  for (const Example& e : data.train) any_labeled = any_labeled || e.label(target).has_value();
  if (!any_labeled) {
    throw ConfigError("baseline." + baseline_name(kind) + ": no observed " + std::string(target_name(target)) +
                      " labels in the training split");
  }
  LossConfig single = loss;
  if (kind == BaselineKind::kSingleTask) single = loss.supervised_only();
  if (single.gamma_for(target) > 0.0) return train(learner, single, train_config, data, seed);

  // Without the entropy term unlabeled rows contribute nothing; train on the labeled subset.
  Split labeled{{}, data.validation, data.test};
  for (const Example& e : data.train) {
    if (e.label(target)) labeled.train.push_back(e);
  }
  return train(learner, single, train_config, labeled, seed);
}

}  // namespace msis
