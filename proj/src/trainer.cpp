#include "msis/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace msis {

namespace {

constexpr std::size_t kPredictChunk = 4096;

class Adam {
 public:
  Adam(const ParamStore& params, const TrainConfig& c) : cfg_(c) {
    for (const auto& [name, p] : params) {
      m_.emplace_back(p.value.rows(), p.value.cols());
      v_.emplace_back(p.value.rows(), p.value.cols());
    }
  }

  void step(ParamStore& params) {
    ++t_;
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    std::size_t k = 0;
    for (auto& [name, p] : params) {
      auto w = p.value.values();
      auto g = p.grad.values();
      auto m = m_[k].values();
      auto v = v_[k].values();
      for (std::size_t i = 0; i < w.size(); ++i) {
        m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
        v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
        w[i] -= cfg_.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + cfg_.epsilon);
      }
      ++k;
    }
  }

 private:
  TrainConfig cfg_;
  std::vector<Tensor2D> m_;
  std::vector<Tensor2D> v_;
  std::uint64_t t_ = 0;
};

std::optional<double> observed_auc(std::span<const double> probs, const Examples& examples, Target t) {
  std::vector<double> scores;
  std::vector<double> labels;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& l = examples[i].label(t);
    if (!l) continue;
    scores.push_back(probs[i]);
    labels.push_back(*l ? 1.0 : 0.0);
  }
  try {
    return auc(scores, labels);
  } catch (const UndefinedMetric&) {
    return std::nullopt;
  }
}

std::uint64_t shuffle_seed(std::uint64_t seed) { return seed * 0x9E3779B97F4A7C15ULL + 0x5851F42D4C957F2DULL; }

}  // namespace

Learner msis_learner(const MsisConfig& config, std::string name) {
  config.validate();
  Learner l;
  l.name = std::move(name);
  l.targets = config.targets();
  l.init = [config](std::uint64_t seed) { return init_params(config, seed); };
  l.predict = [config](Tape& tape, ParamStore& params, const Tensor2D& x) {
    return forward(tape, params, config, x).probability;
  };
  return l;
}

std::array<std::vector<double>, kNumTargets> predict_all(const Learner& learner, ParamStore& params,
                                                         const Examples& examples) {
  std::array<std::vector<double>, kNumTargets> out;
  for (Target t : learner.targets) out[index_of(t)].reserve(examples.size());
  std::vector<std::size_t> rows;
  for (std::size_t start = 0; start < examples.size(); start += kPredictChunk) {
    const std::size_t len = std::min(kPredictChunk, examples.size() - start);
    rows.resize(len);
    std::iota(rows.begin(), rows.end(), start);
    const Batch batch = make_batch(examples, rows);
    Tape tape(false);
    const Predictions preds = learner.predict(tape, params, batch.features);
    for (Target t : learner.targets) {
      const auto v = preds[index_of(t)].value().values();
      out[index_of(t)].insert(out[index_of(t)].end(), v.begin(), v.end());
    }
  }
  return out;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("train.epochs: must be positive");
  if (batch_size == 0) throw ConfigError("train.batch_size: must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("train.learning_rate: must be positive");
  if (early_stopping && patience >= epochs) throw ConfigError("train.patience: must be below epochs");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("train.beta: moment decays must lie in [0,1)");
  }
}

std::optional<double> selection_metric(const TargetMetrics& val_auc, const std::vector<Target>& targets) {
  const bool has_gb = std::any_of(targets.begin(), targets.end(), [](Target t) { return stage_of(t) == Stage::kGB; });
  double total = 0.0;
  int count = 0;
  for (Target t : targets) {
    if (has_gb && stage_of(t) != Stage::kGB) continue;
    if (val_auc[index_of(t)]) {
      total += *val_auc[index_of(t)];
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return total / count;
}

TrainResult train(const Learner& learner, const LossConfig& loss, const TrainConfig& config, const Split& data,
                  std::uint64_t seed, const EpochCallback& on_epoch) {
  config.validate();
  loss.validate();
  if (data.train.empty()) throw ConfigError("train: empty training set");

  TrainResult result{learner.init(seed), {}};
  ParamStore params = result.params;
  Adam adam(params, config);
  std::optional<double> best_metric;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    const auto order = epoch_order(data.train.size(), shuffle_seed(seed), epoch);
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t len = std::min(config.batch_size, order.size() - start);
      const Batch batch = make_batch(data.train, std::span<const std::size_t>(order).subspan(start, len));
      params.zero_grad();
      Tape tape;
      const Predictions preds = learner.predict(tape, params, batch.features);
      const LossBreakdown lb = total_loss(preds, batch, loss);
      const double value = lb.total.scalar();
      if (!std::isfinite(value)) {
        throw TrainingError(learner.name + ": non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                            std::to_string(n_batches + 1));
      }
      tape.backward(lb.total);
      adam.step(params);

      rec.train_loss += value;
      for (Target t : learner.targets) {
        const TargetLoss& tl = lb.at(t);
        TargetEpochStats& s = rec.targets[index_of(t)];
        s.active = true;
        s.supervised += tl.supervised.scalar();
        s.entropy += tl.entropy.scalar();
        s.labeled += tl.labeled;
        s.unlabeled += tl.unlabeled;
      }
      ++n_batches;
    }
    rec.train_loss /= static_cast<double>(n_batches);

    const auto val_probs = predict_all(learner, params, data.validation);
    const auto train_probs = predict_all(learner, params, data.train);
    TargetMetrics val_auc;
    for (Target t : learner.targets) {
      TargetEpochStats& s = rec.targets[index_of(t)];
      s.supervised /= static_cast<double>(n_batches);
      s.entropy /= static_cast<double>(n_batches);
      s.val_auc = observed_auc(val_probs[index_of(t)], data.validation, t);
      val_auc[index_of(t)] = s.val_auc;
      double h = 0.0;
      std::size_t n = 0;
      for (std::size_t i = 0; i < data.train.size(); ++i) {
        if (data.train[i].label(t)) continue;
        h += binary_entropy(train_probs[index_of(t)][i]);
        ++n;
      }
      if (n > 0) s.unlabeled_entropy = h / static_cast<double>(n);
    }
    rec.selection_metric = selection_metric(val_auc, learner.targets);
    result.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec, params);

    const bool improved =
        result.history.best_epoch == 0 || (rec.selection_metric && (!best_metric || *rec.selection_metric > *best_metric));
    if (improved) {
      result.history.best_epoch = epoch;
      best_metric = rec.selection_metric;
      result.params = params;
    } else if (config.early_stopping && epoch - result.history.best_epoch >= config.patience) {
      break;
    }
  }
  return result;
}

TrainResult train_run(const MsisConfig& model, const LossConfig& loss, const TrainConfig& config, const Split& data,
                      std::uint64_t seed) {
  return train(msis_learner(model), loss, config, data, seed);
}

std::string training_log_csv(const TrainHistory& history) {
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  auto opt = [&](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  std::string out = "epoch,target,supervised,entropy,labeled,unlabeled,val_auc,unlabeled_entropy,train_loss,best\n";
  for (const EpochRecord& rec : history.epochs) {
    for (Target t : kAllTargets) {
      const TargetEpochStats& s = rec.targets[index_of(t)];
      if (!s.active) continue;
      out += std::to_string(rec.epoch) + "," + std::string(target_name(t)) + "," + num(s.supervised) + "," +
             num(s.entropy) + "," + std::to_string(s.labeled) + "," + std::to_string(s.unlabeled) + "," +
             opt(s.val_auc) + "," + opt(s.unlabeled_entropy) + "," + num(rec.train_loss) + "," +
             (rec.epoch == history.best_epoch ? "1" : "0") + "\n";
    }
  }
  return out;
}

}  // namespace msis
