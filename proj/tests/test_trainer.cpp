#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "msis/baselines.hpp"
#include "msis/eval.hpp"
#include "msis/trainer.hpp"
#include "support.hpp"

namespace msis {
namespace {

bool same_history(const TrainHistory& a, const TrainHistory& b) {
  return training_log_csv(a) == training_log_csv(b) && a.best_epoch == b.best_epoch;
}

// AR-only data whose credit label is the sign of the first feature.
Split separable_ar(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Examples ex(n);
  for (std::size_t i = 0; i < n; ++i) {
    ex[i].id = static_cast<std::int64_t>(i);
    ex[i].features = {normal(rng), normal(rng), normal(rng)};
    ex[i].labels[index_of(Target::kCredit)] = ex[i].features[0] > 0.0;
  }
  Split s;
  s.train.assign(ex.begin(), ex.begin() + static_cast<std::ptrdiff_t>(n * 3 / 4));
  s.validation.assign(ex.begin() + static_cast<std::ptrdiff_t>(n * 3 / 4), ex.end());
  return s;
}

MsisConfig ar_only(std::size_t input_dim) {
  MsisConfig c = test::small_model(input_dim, 3);
  c.stages = {{Stage::kAR, {Target::kCredit}}};
  return c;
}

TEST(Trainer, SeparableLossDecreases) {
  const Split data = separable_ar(400, 1);
  TrainConfig tc;
  tc.epochs = 5;
  tc.early_stopping = false;
  tc.batch_size = 32;
  tc.learning_rate = 1e-2;
  const TrainResult r = train_run(ar_only(3), LossConfig{}, tc, data, 3);
  ASSERT_EQ(r.history.epochs.size(), 5u);
  for (std::size_t e = 1; e < 5; ++e) {
    EXPECT_LT(r.history.epochs[e].train_loss, r.history.epochs[e - 1].train_loss) << "epoch " << e + 1;
  }
  EXPECT_GT(*r.history.best().selection_metric, 0.95);
}

TEST(Trainer, SameSeedSameHistory) {
  const Population pop = generate(test::small_sim(3000, 4));
  const ExperimentData data = prepare_experiment(pop);
  TrainConfig tc;
  tc.epochs = 4;
  tc.patience = 2;
  const MsisConfig model;
  const TrainResult a = train_run(model, LossConfig{}, tc, data.split, 11);
  const TrainResult b = train_run(model, LossConfig{}, tc, data.split, 11);
  EXPECT_TRUE(same_history(a.history, b.history));
  EXPECT_TRUE(a.params == b.params);
  const TrainResult c = train_run(model, LossConfig{}, tc, data.split, 12);
  EXPECT_FALSE(a.params == c.params);
}

TEST(Trainer, OverfitsSmallDataset) {
  Examples ex = test::random_examples(64, 32, 17);
  Split data{ex, ex, {}};
  TrainConfig tc;
  tc.epochs = 200;
  tc.early_stopping = false;
  tc.batch_size = 16;
  tc.learning_rate = 3e-3;
  const Learner learner = msis_learner(MsisConfig{});
  const TrainResult r = train(learner, LossConfig{}, tc, data, 1);
  ParamStore params = r.params;
  const TargetMetrics m = evaluate(learner, params, ex, EvalScope::kObservedOnly, nullptr);
  for (Target t : kAllTargets) {
    ASSERT_TRUE(m[index_of(t)]);
    EXPECT_GE(*m[index_of(t)], 0.99) << target_name(t);
  }
}

TEST(Trainer, EarlyStoppingAndCallback) {
  const Population pop = generate(test::small_sim(3000, 6));
  const ExperimentData data = prepare_experiment(pop);
  TrainConfig tc;
  tc.epochs = 30;
  tc.patience = 2;
  std::size_t calls = 0;
  const TrainResult r = train(msis_learner(test::small_model(32, 4)), LossConfig{}, tc, data.split, 2,
                              [&](const EpochRecord& rec, const ParamStore&) { EXPECT_EQ(rec.epoch, ++calls); });
  EXPECT_EQ(calls, r.history.epochs.size());
  const std::size_t last = r.history.epochs.size();
  EXPECT_GE(r.history.best_epoch, 1u);
  if (last < tc.epochs) EXPECT_EQ(last - r.history.best_epoch, tc.patience);
  for (const auto& rec : r.history.epochs) {
    if (rec.epoch == r.history.best_epoch) continue;
    EXPECT_LE(rec.selection_metric.value_or(0.0), *r.history.best().selection_metric);
  }
}

TEST(Trainer, LogHasRowPerActiveTarget) {
  const Split data = separable_ar(80, 2);
  TrainConfig tc;
  tc.epochs = 3;
  tc.early_stopping = false;
  const TrainResult r = train_run(ar_only(3), LossConfig{}, tc, data, 1);
  const std::string csv = training_log_csv(r.history);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_EQ(csv.rfind("epoch,target,", 0), 0u);
}

TEST(Trainer, ConfigValidation) {
  TrainConfig tc;
  tc.patience = tc.epochs;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.learning_rate = 0.0;
  EXPECT_THROW(tc.validate(), ConfigError);
  tc = TrainConfig{};
  tc.batch_size = 0;
  EXPECT_THROW(tc.validate(), ConfigError);
}

TEST(SelectionMetric, GbPreferred) {
  TargetMetrics m;
  m[index_of(Target::kCredit)] = 0.9;
  m[index_of(Target::kMob1)] = 0.6;
  m[index_of(Target::kMob6)] = 0.7;
  EXPECT_NEAR(*selection_metric(m, {Target::kCredit, Target::kMob1, Target::kMob6}), 0.65, 1e-15);
  EXPECT_NEAR(*selection_metric(m, {Target::kCredit}), 0.9, 1e-15);
  EXPECT_FALSE(selection_metric(m, {Target::kDraw30}));
}

TEST(Baselines, ParameterBudgetNearMsis) {
  const double single = static_cast<double>(single_task_parameter_count(32, BaselineConfig{}));
  const double msis = static_cast<double>(parameter_count(MsisConfig{}));
  EXPECT_LT(std::abs(single - msis) / msis, 0.10);
  const Learner l = single_task_learner(Target::kMob3, 32, BaselineConfig{});
  EXPECT_EQ(l.init(1).scalar_count(), single_task_parameter_count(32, BaselineConfig{}));
}

TEST(Baselines, Names) {
  for (BaselineKind k : {BaselineKind::kSingleTask, BaselineKind::kSingleTaskEntropy, BaselineKind::kFlatMultitask}) {
    EXPECT_EQ(parse_baseline(baseline_name(k)), k);
  }
  EXPECT_FALSE(parse_baseline("xgboost"));
  EXPECT_FALSE(flat_multitask_config(MsisConfig{}).corridor);
}

TEST(Baselines, SingleTaskNeedsObservedLabels) {
  Examples ex = test::random_examples(40, 32, 3, false);
  const Split data{ex, ex, {}};
  TrainConfig tc;
  tc.epochs = 2;
  tc.patience = 1;
  EXPECT_THROW(train_baseline(BaselineKind::kSingleTask, {Target::kMob1}, MsisConfig{}, BaselineConfig{},
                              LossConfig{}, tc, data, 1),
               ConfigError);
  EXPECT_THROW(baseline_learner(BaselineKind::kSingleTask, {Target::kDraw30}, MsisConfig{}, BaselineConfig{}),
               ConfigError);
}

TEST(Baselines, EntropyVariantWithZeroGammaMatchesSingleTask) {
  const ExperimentData data = prepare_experiment(generate(test::small_sim(3000, 9)));
  TrainConfig tc;
  tc.epochs = 3;
  tc.patience = 1;
  LossConfig loss;
  loss.gamma.fill(0.0);
  const TrainResult a = train_baseline(BaselineKind::kSingleTask, {Target::kMob3}, MsisConfig{}, BaselineConfig{},
                                       loss, tc, data.split, 4);
  const TrainResult b = train_baseline(BaselineKind::kSingleTaskEntropy, {Target::kMob3}, MsisConfig{},
                                       BaselineConfig{}, loss, tc, data.split, 4);
  EXPECT_TRUE(a.params == b.params);
  EXPECT_TRUE(same_history(a.history, b.history));
}

TEST(Repeat, SeedsGiveDistinctRowsAndRepeatsMatch) {
  const ExperimentData data = prepare_experiment(generate(test::small_sim(3000, 10)));
  TrainConfig tc;
  tc.epochs = 2;
  tc.patience = 1;
  const std::vector<std::uint64_t> seeds{1, 2, 1};
  const auto runs = repeat_experiment(test::small_model(32, 4), LossConfig{}, tc, data, seeds,
                                      EvalScope::kFullPopulation);
  ASSERT_EQ(runs.size(), 3u);
  EXPECT_EQ(runs[0], runs[2]);
  EXPECT_NE(runs[0].metrics, runs[1].metrics);
  for (Target t : kAllTargets) EXPECT_TRUE(runs[0].metrics[index_of(t)]) << target_name(t);

  const auto single = repeat_baseline(BaselineKind::kSingleTask, MsisConfig{}, BaselineConfig{}, LossConfig{}, tc,
                                      data, std::vector<std::uint64_t>{3}, EvalScope::kFullPopulation);
  ASSERT_EQ(single.size(), 1u);
  for (Target t : kGbTargets) EXPECT_TRUE(single[0].metrics[index_of(t)]);
  EXPECT_FALSE(single[0].metrics[index_of(Target::kCredit)]);
  const std::string csv = runs_csv("single_task", single);
  EXPECT_EQ(csv.rfind("model,seed,target,auc\n", 0), 0u);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(Ablation, VariantWiring) {
  const MsisConfig base;
  const LossConfig loss;
  EXPECT_EQ(parse_ablation("no-corridor"), AblationVariant::kNoCorridor);
  for (AblationVariant v : kAllAblations) EXPECT_EQ(parse_ablation(ablation_name(v)), v);

  const auto full = ablation_models(AblationVariant::kFull, base, loss);
  ASSERT_EQ(full.size(), 1u);
  EXPECT_EQ(full[0].model, base);

  const auto semi = ablation_models(AblationVariant::kNoSemiSupervised, base, loss);
  for (double g : semi[0].loss.gamma) EXPECT_EQ(g, 0.0);

  const auto flat = ablation_models(AblationVariant::kNoCorridor, base, loss);
  EXPECT_FALSE(flat[0].model.corridor);

  const auto one = ablation_models(AblationVariant::kOneAuxiliaryStage, base, loss);
  EXPECT_FALSE(one[0].model.has_stage(Stage::kWS));
  EXPECT_TRUE(one[0].model.corridor);
  EXPECT_EQ(one[0].model.stages.size(), 2u);

  const auto single = ablation_models(AblationVariant::kSingleIntraTarget, base, loss);
  ASSERT_EQ(single.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(single[i].evaluated, std::vector<Target>{kGbTargets[i]});
    EXPECT_EQ(single[i].model.stages[1].targets, std::vector<Target>{Target::kDraw90});
    EXPECT_EQ(single[i].model.stages[2].targets, std::vector<Target>{kGbTargets[i]});
  }
}

TEST(Ablation, ReportsEveryGbTarget) {
  const ExperimentData data = prepare_experiment(generate(test::small_sim(3000, 12)));
  TrainConfig tc;
  tc.epochs = 2;
  tc.patience = 1;
  const std::vector<std::uint64_t> seeds{1, 2};
  const AblationResult r = ablate(AblationVariant::kSingleIntraTarget, test::small_model(32, 4), LossConfig{}, tc,
                                  data, seeds, EvalScope::kFullPopulation);
  ASSERT_EQ(r.runs.size(), 2u);
  for (Target t : kGbTargets) {
    EXPECT_TRUE(r.runs[0].metrics[index_of(t)]);
    ASSERT_TRUE(r.report.at(t));
    EXPECT_EQ(r.report.at(t)->runs, 2u);
  }
  EXPECT_EQ(r.report.model, "single-intra-target");
}

TEST(MixedBatch, HalfLabeled) {
  const ExperimentData data = prepare_experiment(generate(test::small_sim(5000, 13)));
  const Batch b = mixed_batch(data.split.train, 64, 3);
  ASSERT_EQ(b.size(), 64u);
  const auto mask = b.mask_column(Target::kMob6);
  EXPECT_EQ(std::count(mask.begin(), mask.end(), 1.0), 32);
  EXPECT_EQ(mixed_batch(data.split.train, 64, 3).ids, b.ids);
  EXPECT_THROW(mixed_batch(data.split.train, 0, 3), ConfigError);
}

}  // namespace
}  // namespace msis
