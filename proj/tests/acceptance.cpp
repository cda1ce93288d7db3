// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any fails. Pass criterion numbers as arguments to run a
// subset, e.g. `msis_acceptance 1 2 3`.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "msis/config_io.hpp"
#include "msis/digest.hpp"
#include "msis/eval.hpp"
#include "oracles.hpp"
#include "support.hpp"

namespace msis {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Default experiment data, built once and shared by the training criteria.
class Shared {
 public:
  const ExperimentConfig& config() const { return config_; }
  const ExperimentData& data() {
    if (!data_) {
      std::fprintf(stderr, "simulating %zu applications\n", config_.sim.n);
      data_ = prepare_experiment(generate(config_.sim));
    }
    return *data_;
  }
  const std::vector<RunResult>& msis_runs() {
    if (!msis_) {
      const auto t0 = Clock::now();
      msis_ = repeat_experiment(config_.model, config_.loss, config_.train, data(), config_.train.seeds,
                                EvalScope::kFullPopulation);
      msis_seconds_ = seconds_since(t0);
    }
    return *msis_;
  }
  double msis_seconds() const { return msis_seconds_; }

 private:
  ExperimentConfig config_;
  std::optional<ExperimentData> data_;
  std::optional<std::vector<RunResult>> msis_;
  double msis_seconds_ = 0.0;
};

Outcome gradient_check(Shared& shared) {
  const auto t0 = Clock::now();
  ExperimentConfig c = shared.config();
  c.sim.n = 2000;
  const ExperimentData data = prepare_experiment(generate(c.sim));
  double worst = 0.0;
  std::string where;
  for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
    const Batch batch = mixed_batch(data.split.train, 64, seed);
    const GradCheckReport r = msis_gradcheck(c.model, c.loss, batch, seed, 1e-8, 1e-4);
    if (r.worst_relative_error >= worst) {
      worst = r.worst_relative_error;
      where = r.worst_name;
    }
  }
  const double t = seconds_since(t0);
  return {worst < 1e-4 && t < 30.0, "worst relative error " + fmt("%.2e", worst) + " (" + where + ") over 5 seeds, " +
                                        fmt("%.1f", t) + " s"};
}

Outcome auc_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  std::size_t tied = 0;
  for (int i = 0; i < 200; ++i) {
    const auto inst = oracle::random_auc_instance(rng, 500);
    std::set<double> distinct(inst.scores.begin(), inst.scores.end());
    tied += distinct.size() < inst.scores.size();
    worst = std::max(worst, std::abs(auc(inst.scores, inst.labels) - oracle::pairwise_auc(inst.scores, inst.labels)));
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 5.0 && tied > 0, "max |rank - pairwise| " + fmt("%.1e", worst) + " on 200 instances (" +
                                                     std::to_string(tied) + " with ties), " + fmt("%.2f", t) + " s"};
}

std::string population_digest(const Population& pop, const std::filesystem::path& dir) {
  save_csv(observe(pop), dir / "dataset.csv");
  save_counterfactual_csv(pop.counterfactuals(), dir / "counterfactuals.csv");
  return sha256_file(dir / "dataset.csv") + sha256_file(dir / "counterfactuals.csv");
}

Outcome simulator_invariants() {
  const SimConfig c;
  const Population pop = generate(c);
  double pre = 0.0;
  double accepted_pre = 0.0;
  double z_acc = 0.0;
  double z_rej = 0.0;
  double n_acc = 0.0;
  std::size_t nested = 0;
  for (const auto& r : pop.records) {
    const auto& l = r.labels;
    const bool acc = l[index_of(Target::kCredit)];
    if (r.timestamp < pop.cutoff_timestamp) {
      pre += 1.0;
      accepted_pre += acc;
    }
    (acc ? z_acc : z_rej) += r.quality;
    n_acc += acc;
    nested += l[index_of(Target::kDraw30)] <= l[index_of(Target::kDraw90)] &&
              l[index_of(Target::kMob1)] <= l[index_of(Target::kMob3)] &&
              l[index_of(Target::kMob3)] <= l[index_of(Target::kMob6)];
  }
  const double n = static_cast<double>(pop.records.size());
  const double rate = accepted_pre / pre;
  const double mean_acc = z_acc / n_acc;
  const double mean_rej = z_rej / (n - n_acc);

  test::TempDir a("acc-sim-a");
  test::TempDir b("acc-sim-b");
  const bool identical = population_digest(pop, a.path()) == population_digest(generate(c), b.path());

  const bool pass = std::abs(rate - 0.3) <= 0.01 && nested == pop.records.size() && mean_rej < mean_acc && identical;
  return {pass, "acceptance " + fmt("%.4f", rate) + ", nesting " + std::to_string(nested) + "/" +
                    std::to_string(pop.records.size()) + ", mean z rejected " + fmt("%.4f", mean_rej) +
                    " < accepted " + fmt("%.4f", mean_acc) + ", regeneration " + (identical ? "identical" : "DIFFERS")};
}

Outcome attention_contracts(Shared& shared) {
  const ExperimentConfig& c = shared.config();
  SimConfig sc = c.sim;
  sc.n = 5000;
  const ExperimentData data = prepare_experiment(generate(sc));
  double worst = 0.0;
  bool single_exact = true;
  std::size_t passes = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (const AblationModel& m : ablation_models(kAllAblations[seed % kAllAblations.size()], c.model, c.loss)) {
      ParamStore params = init_params(m.model, seed);
      Batch batch = make_batch(data.split.test, epoch_order(data.split.test.size(), seed, 0));
      for (double& v : batch.features.values()) v *= 1.0 + static_cast<double>(seed % 5);
      Tape tape(false);
      const ForwardResult f = forward(tape, params, m.model, batch.features);
      ++passes;
      auto check_rows = [&](const Tensor2D& w) {
        for (std::size_t i = 0; i < w.rows(); ++i) {
          double total = 0.0;
          for (double v : w.row(i)) {
            if (v < 0.0) worst = std::max(worst, -v);
            total += v;
          }
          worst = std::max(worst, std::abs(total - 1.0));
        }
      };
      for (const CorridorLink& link : f.links) {
        check_rows(link.alpha.value());
        if (link.alpha.cols() == 1) {
          for (double v : link.alpha.value().values()) single_exact = single_exact && v == 1.0;
        }
      }
      for (Target t : m.model.targets()) {
        if (f.beta[index_of(t)].valid()) check_rows(f.beta[index_of(t)].value());
      }
    }
  }
  return {worst <= 1e-12 && single_exact, "max simplex deviation " + fmt("%.1e", worst) + " over " +
                                              std::to_string(passes) + " forward passes, single-target alpha " +
                                              (single_exact ? "exactly 1" : "NOT 1")};
}

Outcome bias_remediation(Shared& shared) {
  const ExperimentConfig& c = shared.config();
  const auto& msis = shared.msis_runs();
  const auto t0 = Clock::now();
  const auto single = repeat_baseline(BaselineKind::kSingleTask, c.model, c.baseline, c.loss, c.train, shared.data(),
                                      c.train.seeds, EvalScope::kFullPopulation);
  const double t = shared.msis_seconds() + seconds_since(t0);
  double m = 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < msis.size(); ++i) {
    m += *mean_gb(msis[i].metrics) / static_cast<double>(msis.size());
    s += *mean_gb(single[i].metrics) / static_cast<double>(single.size());
  }
  return {m - s >= 0.005 && t < 600.0, "full-population mean GB AUC msis " + fmt("%.4f", m) + " vs single_task " +
                                           fmt("%.4f", s) + " (gain " + fmt("%+.4f", m - s) + ", need >= +0.005), " +
                                           fmt("%.0f", t) + " s"};
}

Outcome ablation_direction(Shared& shared) {
  const ExperimentConfig& c = shared.config();
  const auto& full = shared.msis_runs();
  bool pass = true;
  std::string detail;
  for (AblationVariant v : {AblationVariant::kNoSemiSupervised, AblationVariant::kSingleIntraTarget,
                            AblationVariant::kOneAuxiliaryStage, AblationVariant::kNoCorridor}) {
    std::fprintf(stderr, "ablation %s\n", ablation_name(v).c_str());
    const AblationResult r = ablate(v, c.model, c.loss, c.train, shared.data(), c.train.seeds,
                                    EvalScope::kFullPopulation);
    int wins = 0;
    for (std::size_t i = 0; i < full.size(); ++i) wins += *mean_gb(full[i].metrics) >= *mean_gb(r.runs[i].metrics);
    pass = pass && wins >= 3;
    detail += (detail.empty() ? "" : ", ") + ablation_name(v) + " " + std::to_string(wins) + "/5";
  }
  return {pass, "seeds where full >= variant: " + detail};
}

Outcome entropy_effect(Shared& shared, std::string& seed1_log) {
  ExperimentConfig c = shared.config();
  c.loss.gamma.fill(6e-4);
  c.loss.gamma[index_of(Target::kCredit)] = 0.0;
  c.loss.unlabeled_reduction = Reduction::kSum;
  std::array<int, kNumTargets> seeds_with_drop{};
  int all_targets_seeds = 0;
  std::string detail;
  for (std::uint64_t seed : c.train.seeds) {
    const TrainResult r = train_run(c.model, c.loss, c.train, shared.data().split, seed);
    if (seed == c.train.seeds.front()) seed1_log = training_log_csv(r.history);
    bool all = true;
    std::string drops;
    for (Target t : kGbTargets) {
      const double first = *r.history.epochs.front().targets[index_of(t)].unlabeled_entropy;
      const double best = *r.history.best().targets[index_of(t)].unlabeled_entropy;
      const double drop = 1.0 - best / first;
      seeds_with_drop[index_of(t)] += drop >= 0.10;
      all = all && drop >= 0.10;
      drops += (drops.empty() ? "" : "/") + fmt("%.0f%%", 100.0 * drop);
    }
    all_targets_seeds += all;
    detail += (detail.empty() ? "" : ", ") + std::string("seed ") + std::to_string(seed) + " " + drops;
  }
  bool pass = true;
  std::string counts;
  for (Target t : kGbTargets) {
    pass = pass && seeds_with_drop[index_of(t)] >= 4;
    counts += (counts.empty() ? "" : ", ") + std::string(target_name(t)) + " " +
              std::to_string(seeds_with_drop[index_of(t)]) + "/5";
  }
  return {pass, "seeds with >= 10% drop: " + counts + "; all three at once on " + std::to_string(all_targets_seeds) +
                    "/5 (" + detail + ")"};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility(Shared& shared, const std::string& seed1_log) {
  test::TempDir dir("acc-repro");
  std::vector<std::string> files;
  bool same = true;
  for (const char* sub : {"evaluate", "ablate"}) {
    std::map<std::string, std::string> first;
    for (const char* rep : {"a", "b"}) {
      const std::string out = (dir / (std::string(sub) + rep)).string();
      const std::vector<std::string> args{"msis", sub, "--out", out, "--n", "20000", "--seeds", "1,2",
                                          "--epochs", "6", "--patience", "2"};
      std::vector<const char*> argv;
      for (const auto& a : args) argv.push_back(a.c_str());
      std::ostringstream sink;
      if (cli::run(static_cast<int>(argv.size()), argv.data(), sink, sink) != cli::kOk) return {false, sink.str()};
      for (const auto& entry : std::filesystem::directory_iterator(out)) {
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() != ".csv" && entry.path().extension() != ".txt" &&
            entry.path().extension() != ".dat") {
          continue;
        }
        const std::string text = read_file(entry.path());
        if (*rep == 'a') {
          first[name] = text;
          files.push_back(std::string(sub) + "/" + name);
        } else {
          same = same && first.count(name) && first[name] == text;
        }
      }
    }
  }
  if (!seed1_log.empty()) {
    ExperimentConfig c = shared.config();
    c.loss.gamma.fill(6e-4);
    c.loss.gamma[index_of(Target::kCredit)] = 0.0;
    c.loss.unlabeled_reduction = Reduction::kSum;
    const TrainResult r = train_run(c.model, c.loss, c.train, shared.data().split, c.train.seeds.front());
    same = same && training_log_csv(r.history) == seed1_log;
    files.push_back("training log (n=100k, seed 1)");
  }
  std::string list;
  for (const auto& f : files) list += (list.empty() ? "" : ", ") + f;
  return {same && !files.empty(), std::string(same ? "identical" : "DIFFERENT") + " on re-run: " + list};
}

}  // namespace
}  // namespace msis

int main(int argc, char** argv) {
  using namespace msis;
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  auto want = [&](int k) { return wanted.empty() || wanted.count(k) != 0; };

  Shared shared;
  std::string seed1_log;
  const std::vector<std::pair<int, std::string>> names{
      {1, "gradient correctness"},  {2, "AUC oracle equivalence"}, {3, "simulator invariants"},
      {4, "attention contracts"},   {5, "bias remediation"},       {6, "ablation direction"},
      {7, "entropy minimization"},  {8, "reproducibility"}};
  const std::map<int, std::function<Outcome()>> checks{
      {1, [&] { return gradient_check(shared); }},
      {2, [&] { return auc_oracle(); }},
      {3, [&] { return simulator_invariants(); }},
      {4, [&] { return attention_contracts(shared); }},
      {5, [&] { return bias_remediation(shared); }},
      {6, [&] { return ablation_direction(shared); }},
      {7, [&] { return entropy_effect(shared, seed1_log); }},
      {8, [&] { return reproducibility(shared, seed1_log); }},
  };

  int failures = 0;
  for (const auto& [k, name] : names) {
    if (!want(k)) continue;
    Outcome o;
    try {
      o = checks.at(k)();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  criterion %d  %-24s %s\n", o.pass ? "PASS" : "FAIL", k, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
