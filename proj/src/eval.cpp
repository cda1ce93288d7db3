#include "msis/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

namespace msis {

ExperimentData prepare_experiment(const Examples& observed, std::span<const Counterfactual> counterfactuals,
                                  int cutoff_timestamp, std::uint64_t split_seed) {
  ExperimentData data;
  data.split = split_oot(observed, cutoff_timestamp, split_seed);
  data.standardizer = Standardizer::fit(data.split.train);
  data.standardizer.apply(data.split.train);
  data.standardizer.apply(data.split.validation);
  data.standardizer.apply(data.split.test);
  data.counterfactuals = index_counterfactuals(counterfactuals);
  return data;
}

ExperimentData prepare_experiment(const Population& population) {
  const auto cf = population.counterfactuals();
  return prepare_experiment(observe(population), cf, population.cutoff_timestamp, population.config.seed);
}

TargetMetrics evaluate_scores(const std::array<std::vector<double>, kNumTargets>& scores, const Examples& examples,
                              EvalScope scope, const CounterfactualTable* counterfactuals) {
  if (scope == EvalScope::kFullPopulation && counterfactuals == nullptr) {
    throw ConfigError("full-population evaluation needs the counterfactual sidecar");
  }
  TargetMetrics out;
  for (Target t : kAllTargets) {
    const auto& s = scores[index_of(t)];
    if (s.empty()) continue;
    if (s.size() != examples.size()) throw DimensionError("evaluate_scores: score/example count mismatch");
    std::vector<double> used_scores;
    std::vector<double> labels;
    for (std::size_t i = 0; i < examples.size(); ++i) {
      if (scope == EvalScope::kObservedOnly) {
        const auto& l = examples[i].label(t);
        if (!l) continue;
        labels.push_back(*l ? 1.0 : 0.0);
      } else {
        const auto it = counterfactuals->find(examples[i].id);
        if (it == counterfactuals->end()) {
          throw ConfigError("no counterfactual record for example id " + std::to_string(examples[i].id));
        }
        labels.push_back(it->second.labels[index_of(t)] ? 1.0 : 0.0);
      }
      used_scores.push_back(s[i]);
    }
    try {
      out[index_of(t)] = auc(used_scores, labels);
    } catch (const UndefinedMetric&) {
    }
  }
  return out;
}

TargetMetrics evaluate(const Learner& learner, ParamStore& params, const Examples& examples, EvalScope scope,
                       const CounterfactualTable* counterfactuals) {
  return evaluate_scores(predict_all(learner, params, examples), examples, scope, counterfactuals);
}

namespace {

void merge(TargetMetrics& into, const TargetMetrics& from, const std::vector<Target>& targets) {
  for (Target t : targets) into[index_of(t)] = from[index_of(t)];
}

}  // namespace

std::vector<RunResult> repeat_experiment(const MsisConfig& model, const LossConfig& loss, const TrainConfig& train,
                                         const ExperimentData& data, std::span<const std::uint64_t> seeds,
                                         EvalScope scope) {
  const Learner learner = msis_learner(model);
  std::vector<RunResult> out;
  for (std::uint64_t seed : seeds) {
    try {
      TrainResult r = msis::train(learner, loss, train, data.split, seed);
      out.push_back(RunResult{seed, evaluate(learner, r.params, data.split.test, scope, &data.counterfactuals),
                              r.history.best_epoch});
    } catch (const std::exception& e) {
      throw TrainingError("seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  return out;
}

std::vector<RunResult> repeat_baseline(BaselineKind kind, const MsisConfig& model, const BaselineConfig& baseline,
                                       const LossConfig& loss, const TrainConfig& train, const ExperimentData& data,
                                       std::span<const std::uint64_t> seeds, EvalScope scope) {
  std::vector<std::vector<Target>> groups;
  if (kind == BaselineKind::kFlatMultitask) {
    groups.push_back(model.targets());
  } else {
    for (Target t : model.targets()) {
      if (stage_of(t) == Stage::kGB) groups.push_back({t});
    }
  }
  std::vector<RunResult> out;
  for (std::uint64_t seed : seeds) {
    RunResult run{seed, {}, 0};
    for (const auto& targets : groups) {
      try {
        const Learner learner = baseline_learner(kind, targets, model, baseline);
        TrainResult r = train_baseline(kind, targets, model, baseline, loss, train, data.split, seed);
        merge(run.metrics, evaluate(learner, r.params, data.split.test, scope, &data.counterfactuals), targets);
        run.best_epoch = r.history.best_epoch;
      } catch (const TrainingError& e) {
        throw TrainingError("seed " + std::to_string(seed) + ": " + e.what());
      }
    }
    out.push_back(run);
  }
  return out;
}

std::string ablation_name(AblationVariant v) {
  switch (v) {
    case AblationVariant::kFull: return "full";
    case AblationVariant::kSingleIntraTarget: return "single-intra-target";
    case AblationVariant::kNoSemiSupervised: return "no-semi-supervised";
    case AblationVariant::kOneAuxiliaryStage: return "one-auxiliary-stage";
    case AblationVariant::kNoCorridor: return "no-corridor";
  }
  return "unknown";
}

std::optional<AblationVariant> parse_ablation(const std::string& name) {
  for (AblationVariant v : kAllAblations) {
    if (ablation_name(v) == name) return v;
  }
  return std::nullopt;
}

std::vector<AblationModel> ablation_models(AblationVariant variant, const MsisConfig& base, const LossConfig& loss) {
  base.validate();
  std::vector<Target> gb;
  for (Target t : base.targets()) {
    if (stage_of(t) == Stage::kGB) gb.push_back(t);
  }
  switch (variant) {
    case AblationVariant::kFull: return {AblationModel{base, loss, base.targets()}};
    case AblationVariant::kNoSemiSupervised: return {AblationModel{base, loss.supervised_only(), base.targets()}};
    case AblationVariant::kNoCorridor: {
      MsisConfig c = base;
      c.corridor = false;
      return {AblationModel{c, loss, c.targets()}};
    }
    case AblationVariant::kOneAuxiliaryStage: {
      MsisConfig c = base;
      std::erase_if(c.stages, [](const StageTargets& s) { return s.stage == Stage::kWS; });
      return {AblationModel{c, loss, c.targets()}};
    }
    case AblationVariant::kSingleIntraTarget: {
      std::vector<AblationModel> out;
      for (Target t : gb) {
        MsisConfig c = base;
        for (StageTargets& s : c.stages) {
          if (s.stage == Stage::kWS) s.targets = {Target::kDraw90};
          if (s.stage == Stage::kGB) s.targets = {t};
        }
        out.push_back(AblationModel{c, loss, {t}});
      }
      return out;
    }
  }
  return {};
}

AblationResult ablate(AblationVariant variant, const MsisConfig& base, const LossConfig& loss,
                      const TrainConfig& train, const ExperimentData& data, std::span<const std::uint64_t> seeds,
                      EvalScope scope) {
  const auto models = ablation_models(variant, base, loss);
  AblationResult result{variant, {}, {}};
  for (std::uint64_t seed : seeds) {
    RunResult run{seed, {}, 0};
    for (const AblationModel& m : models) {
      const Learner learner = msis_learner(m.model, ablation_name(variant));
      try {
        TrainResult r = msis::train(learner, m.loss, train, data.split, seed);
        merge(run.metrics, evaluate(learner, r.params, data.split.test, scope, &data.counterfactuals), m.evaluated);
        run.best_epoch = r.history.best_epoch;
      } catch (const TrainingError& e) {
        throw TrainingError("seed " + std::to_string(seed) + ": " + e.what());
      }
    }
    result.runs.push_back(run);
  }
  const auto metrics = metrics_of(result.runs);
  if (metrics.size() >= 2) result.report = report(ablation_name(variant), metrics, scope);
  return result;
}

Batch mixed_batch(const Examples& examples, std::size_t size, std::uint64_t seed) {
  if (size == 0 || size > examples.size()) throw ConfigError("mixed_batch: size must lie in [1, example count]");
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const bool has_gb = std::any_of(kGbTargets.begin(), kGbTargets.end(),
                                    [&](Target t) { return examples[i].label(t).has_value(); });
    (has_gb ? labeled : unlabeled).push_back(i);
  }
  std::mt19937_64 rng(seed);
  std::shuffle(labeled.begin(), labeled.end(), rng);
  std::shuffle(unlabeled.begin(), unlabeled.end(), rng);
  std::size_t n_labeled = std::min(labeled.size(), size / 2);
  if (size - n_labeled > unlabeled.size()) n_labeled = size - unlabeled.size();
  std::vector<std::size_t> rows(labeled.begin(), labeled.begin() + static_cast<std::ptrdiff_t>(n_labeled));
  rows.insert(rows.end(), unlabeled.begin(), unlabeled.begin() + static_cast<std::ptrdiff_t>(size - n_labeled));
  std::sort(rows.begin(), rows.end());
  return make_batch(examples, rows);
}

GradCheckReport msis_gradcheck(const MsisConfig& model, const LossConfig& loss, const Batch& batch,
                               std::uint64_t init_seed, double step, double tol) {
  ParamStore params = init_params(model, init_seed);
  const LossFn fn = [&](Tape& tape, ParamStore& p) {
    return total_loss(forward(tape, p, model, batch.features), batch, loss).total;
  };
  return finite_diff_check(params, fn, step, tol);
}

std::vector<TargetMetrics> metrics_of(std::span<const RunResult> runs) {
  std::vector<TargetMetrics> out;
  for (const auto& r : runs) out.push_back(r.metrics);
  return out;
}

std::string runs_csv(const std::string& model, std::span<const RunResult> runs) {
  std::string out = "model,seed,target,auc\n";
  for (const auto& r : runs) {
    for (Target t : kAllTargets) {
      if (!r.metrics[index_of(t)]) continue;
      char buf[40];
      std::snprintf(buf, sizeof(buf), "%.10f", *r.metrics[index_of(t)]);
      out += model + "," + std::to_string(r.seed) + "," + std::string(target_name(t)) + "," + buf + "\n";
    }
  }
  return out;
}

}  // namespace msis
