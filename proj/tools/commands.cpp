#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "msis/checkpoint.hpp"
#include "msis/config_io.hpp"
#include "msis/digest.hpp"
#include "msis/eval.hpp"

namespace msis::cli {

namespace fs = std::filesystem;

namespace {

class CheckFailed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flag values layered over the config file.
struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::string> data;
  std::optional<std::size_t> n;
  std::optional<std::uint64_t> sim_seed;
  std::optional<double> rho;
  std::optional<double> drift;
  std::vector<std::uint64_t> seeds;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> patience;
  std::optional<double> gamma;
  std::optional<std::string> reduction;
  std::optional<std::size_t> corridor_dim;
  std::optional<std::string> scope;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "JSON config file")->envname("MSIS_CONFIG");
  cmd->add_option("-o,--out", o.out, "output directory (default: runs/<timestamp>-<config hash>)");
  cmd->add_option("--data", o.data, "directory with dataset.csv and counterfactuals.csv");
  cmd->add_option("--n", o.n, "number of simulated applications");
  cmd->add_option("--sim-seed", o.sim_seed, "simulator seed");
  cmd->add_option("--rho", o.rho, "policy alignment");
  cmd->add_option("--drift", o.drift, "feature shift after the OOT cutoff");
  cmd->add_option("--seeds", o.seeds, "training seeds")->delimiter(',');
  cmd->add_option("--epochs", o.epochs, "maximum training epochs");
  cmd->add_option("--patience", o.patience, "early-stopping patience in epochs");
  cmd->add_option("--gamma", o.gamma, "entropy weight for every non-credit target");
  cmd->add_option("--reduction", o.reduction, "unlabeled entropy reduction")->check(CLI::IsMember({"mean", "sum"}));
  cmd->add_option("--corridor-dim", o.corridor_dim, "corridor / tower top width d");
  cmd->add_option("--scope", o.scope, "evaluation scope")
      ->check(CLI::IsMember({"observed-only", "full-population"}));
}

ExperimentConfig resolve(const Overrides& o) {
  ExperimentConfig c = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.data) c.data_dir = *o.data;
  if (o.n) c.sim.n = *o.n;
  if (o.sim_seed) c.sim.seed = *o.sim_seed;
  if (o.rho) c.sim.policy_alignment = *o.rho;
  if (o.drift) c.sim.drift_shift = *o.drift;
  if (!o.seeds.empty()) c.train.seeds = o.seeds;
  if (o.epochs) c.train.epochs = *o.epochs;
  if (o.patience) c.train.patience = *o.patience;
  if (o.gamma) {
    c.loss.gamma.fill(*o.gamma);
    c.loss.gamma[index_of(Target::kCredit)] = 0.0;
  }
  if (o.reduction) c.loss.unlabeled_reduction = *o.reduction == "sum" ? Reduction::kSum : Reduction::kMean;
  if (o.corridor_dim) c.model.corridor_dim = *o.corridor_dim;
  if (o.scope) c.scope = *parse_scope(*o.scope);
  c.validate();
  return c;
}

std::string utc_stamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
  return buf;
}

// Collects the files a command writes so the manifest can list their digests.
class Run {
 public:
  Run(std::string command, const ExperimentConfig& config, const std::string& out)
      : command_(std::move(command)), config_(config), hash_(sha256_hex(canonical_text(config))) {
    dir_ = out.empty() ? fs::path("runs") / (utc_stamp() + "-" + hash_.substr(0, 12)) : fs::path(out);
    fs::create_directories(dir_);
  }

  const fs::path& dir() const { return dir_; }

  fs::path path(const std::string& name) {
    const fs::path p = dir_ / name;
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    return p;
  }

  void write(const std::string& name, const std::string& text) {
    std::ofstream f(path(name), std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir_ / name).string());
    f << text;
    f.close();
    record(name);
  }

  void record(const std::string& name) { artifacts_.push_back(name); }

  void finish() {
    save_config(config_, dir_ / "config.json");
    Json artifacts = Json::object();
    for (const std::string& a : artifacts_) artifacts[a] = sha256_file(dir_ / a);
    artifacts["config.json"] = sha256_file(dir_ / "config.json");
    const Json manifest{{"command", command_},
                        {"config_hash", hash_},
                        {"seeds", config_.train.seeds},
                        {"sim_seed", config_.sim.seed},
                        {"artifacts", artifacts}};
    std::ofstream f(dir_ / "manifest.json");
    f << manifest.dump(2) << "\n";
  }

 private:
  std::string command_;
  ExperimentConfig config_;
  std::string hash_;
  fs::path dir_;
  std::vector<std::string> artifacts_;
};

ExperimentData load_data(const ExperimentConfig& c, std::ostream& err) {
  ExperimentData data;
  if (c.data_dir.empty()) {
    err << "simulating " << c.sim.n << " applications (seed " << c.sim.seed << ")\n";
    data = prepare_experiment(generate(c.sim));
  } else {
    err << "loading " << c.data_dir.string() << "\n";
    const Examples examples = load_csv(c.data_dir / "dataset.csv");
    const auto cf = load_counterfactual_csv(c.data_dir / "counterfactuals.csv");
    if (!examples.empty() && feature_dim(examples) != c.model.input_dim) {
      throw ConfigError("model.input_dim: dataset has " + std::to_string(feature_dim(examples)) + " features");
    }
    data = prepare_experiment(examples, cf, oot_cutoff(c.sim), c.sim.seed);
  }
  err << "split: train " << data.split.train.size() << ", validation " << data.split.validation.size()
      << ", test " << data.split.test.size() << "\n";
  return data;
}

std::string fmt(double v, const char* spec = "%.10f") {
  char buf[48];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::vector<Target> gb_targets(const MsisConfig& m) {
  std::vector<Target> out;
  for (Target t : m.targets()) {
    if (stage_of(t) == Stage::kGB) out.push_back(t);
  }
  return out;
}

std::string learner_file(const std::string& kind, std::optional<Target> t, std::uint64_t seed) {
  std::string s = kind;
  if (t) s += "_" + std::string(target_name(*t));
  return s + "_seed" + std::to_string(seed);
}

std::vector<MetricsReport> with_gains(std::vector<MetricsReport> reports, const std::string& baseline) {
  for (const MetricsReport& b : reports) {
    if (b.model != baseline) continue;
    for (MetricsReport& r : reports) attach_gain(r, b);
    break;
  }
  return reports;
}

void write_reports(Run& run, const std::vector<MetricsReport>& reports, std::ostream& out) {
  run.write("report.csv", reports_csv(reports));
  const std::string table = reports_table(reports);
  run.write("report.txt", table);
  out << table;
}

std::optional<MetricsReport> maybe_report(const std::string& model, const std::vector<RunResult>& runs,
                                          EvalScope scope) {
  if (runs.size() < 2) return std::nullopt;
  return report(model, metrics_of(runs), scope);
}

// --- commands ---

int cmd_simulate(const Overrides& o, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = resolve(o);
  Run run("simulate", c, o.out);
  err << "simulating " << c.sim.n << " applications (seed " << c.sim.seed << ")\n";
  const Population pop = generate(c.sim);
  save_csv(observe(pop), run.path("dataset.csv"));
  run.record("dataset.csv");
  save_counterfactual_csv(pop.counterfactuals(), run.path("counterfactuals.csv"));
  run.record("counterfactuals.csv");

  std::size_t accepted = 0, labeled = 0;
  for (const PopulationRecord& r : pop.records) {
    accepted += r.labels[index_of(Target::kCredit)];
    labeled += r.labels[index_of(Target::kCredit)] && r.labels[index_of(Target::kDraw90)];
  }
  out << "records " << pop.records.size() << ", accepted " << accepted << ", repayment-labelled " << labeled
      << ", OOT cutoff day " << pop.cutoff_timestamp << "\n"
      << "wrote " << run.dir().string() << "\n";
  run.finish();
  return kOk;
}

int cmd_train(const Overrides& o, const std::string& model_kind, const std::vector<std::string>& target_names,
              std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = resolve(o);
  const ExperimentData data = load_data(c, err);
  Run run("train", c, o.out);

  std::vector<std::vector<Target>> groups;
  std::optional<BaselineKind> kind;
  if (model_kind != "msis") {
    kind = parse_baseline(model_kind);
    if (!kind) throw ConfigError("model: unknown learner '" + model_kind + "'");
  }
  if (!kind || *kind == BaselineKind::kFlatMultitask) {
    groups.push_back(c.model.targets());
  } else {
    std::vector<Target> wanted;
    for (const std::string& n : target_names) {
      const auto t = parse_target(n);
      if (!t) throw ConfigError("target: unknown target '" + n + "'");
      wanted.push_back(*t);
    }
    if (wanted.empty()) wanted = gb_targets(c.model);
    for (Target t : wanted) groups.push_back({t});
  }

  for (std::uint64_t seed : c.train.seeds) {
    for (const auto& targets : groups) {
      Checkpoint ckpt;
      ckpt.kind = model_kind;
      ckpt.targets = targets;
      ckpt.model = c.model;
      ckpt.baseline = c.baseline;
      TrainResult r = kind ? train_baseline(*kind, targets, c.model, c.baseline, c.loss, c.train, data.split, seed)
                           : train_run(c.model, c.loss, c.train, data.split, seed);
      ckpt.params = std::move(r.params);
      const std::optional<Target> single =
          kind && *kind != BaselineKind::kFlatMultitask ? std::optional<Target>(targets.front()) : std::nullopt;
      const std::string stem = learner_file(model_kind, single, seed);
      save_checkpoint(ckpt, run.path("checkpoints/" + stem + ".json"));
      run.record("checkpoints/" + stem + ".json");
      run.write("logs/" + stem + ".csv", training_log_csv(r.history));
      const auto& best = r.history.best();
      out << stem << ": best epoch " << r.history.best_epoch << " of " << r.history.epochs.size()
          << ", validation metric " << (best.selection_metric ? fmt(*best.selection_metric, "%.4f") : "-") << "\n";
    }
  }
  out << "wrote " << run.dir().string() << "\n";
  run.finish();
  return kOk;
}

int cmd_evaluate(const Overrides& o, const std::vector<std::string>& checkpoints, std::ostream& out,
                 std::ostream& err) {
  const ExperimentConfig c = resolve(o);
  const ExperimentData data = load_data(c, err);
  Run run("evaluate", c, o.out);

  std::vector<MetricsReport> reports;
  std::string runs = "model,seed,target,auc\n";
  auto add_runs = [&](const std::string& model, const std::vector<RunResult>& rs) {
    const std::string csv = runs_csv(model, rs);
    runs += csv.substr(csv.find('\n') + 1);
    if (auto rep = maybe_report(model, rs, c.scope)) reports.push_back(*rep);
  };

  if (!checkpoints.empty()) {
    // Checkpoints of the same kind are treated as repeats of one model.
    std::map<std::string, std::map<std::uint64_t, RunResult>> by_kind;
    for (const std::string& path : checkpoints) {
      Checkpoint ckpt = load_checkpoint(path);
      const Learner learner = checkpoint_learner(ckpt);
      RunResult& r = by_kind[ckpt.kind][ckpt.params.seed()];
      r.seed = ckpt.params.seed();
      const TargetMetrics m = evaluate(learner, ckpt.params, data.split.test, c.scope, &data.counterfactuals);
      for (Target t : ckpt.targets) {
        if (m[index_of(t)]) r.metrics[index_of(t)] = m[index_of(t)];
      }
    }
    for (const auto& [kind, seeds] : by_kind) {
      std::vector<RunResult> rs;
      for (const auto& [seed, r] : seeds) rs.push_back(r);
      add_runs(kind, rs);
    }
  } else {
    err << "msis over " << c.train.seeds.size() << " seeds\n";
    add_runs("msis", repeat_experiment(c.model, c.loss, c.train, data, c.train.seeds, c.scope));
    for (BaselineKind k : c.baselines) {
      err << baseline_name(k) << " over " << c.train.seeds.size() << " seeds\n";
      add_runs(baseline_name(k),
               repeat_baseline(k, c.model, c.baseline, c.loss, c.train, data, c.train.seeds, c.scope));
    }
  }
  run.write("runs.csv", runs);
  const std::string baseline = c.baselines.empty() ? std::string() : baseline_name(c.baselines.front());
  write_reports(run, with_gains(reports, baseline), out);
  run.finish();
  return kOk;
}

int cmd_ablate(const Overrides& o, const std::vector<std::string>& variant_names, std::ostream& out,
               std::ostream& err) {
  const ExperimentConfig c = resolve(o);
  std::vector<AblationVariant> variants;
  for (const std::string& n : variant_names) {
    const auto v = parse_ablation(n);
    if (!v) throw ConfigError("variant: unknown ablation '" + n + "'");
    variants.push_back(*v);
  }
  if (variants.empty()) variants.assign(kAllAblations.begin(), kAllAblations.end());
  if (std::find(variants.begin(), variants.end(), AblationVariant::kFull) == variants.end()) {
    variants.insert(variants.begin(), AblationVariant::kFull);
  }
  const ExperimentData data = load_data(c, err);
  Run run("ablate", c, o.out);

  std::vector<MetricsReport> reports;
  std::string runs = "model,seed,target,auc\n";
  std::string dat = "# index mean_gb_auc  (";
  std::string points;
  for (std::size_t i = 0; i < variants.size(); ++i) {
    err << "ablation " << ablation_name(variants[i]) << "\n";
    const AblationResult r = ablate(variants[i], c.model, c.loss, c.train, data, c.train.seeds, c.scope);
    const std::string csv = runs_csv(ablation_name(variants[i]), r.runs);
    runs += csv.substr(csv.find('\n') + 1);
    double total = 0.0;
    for (const RunResult& rr : r.runs) total += mean_gb(rr.metrics).value_or(0.0);
    dat += (i ? ", " : "") + std::to_string(i) + "=" + ablation_name(variants[i]);
    points += std::to_string(i) + " " + fmt(total / static_cast<double>(r.runs.size())) + "\n";
    if (r.runs.size() >= 2) reports.push_back(r.report);
  }
  run.write("runs.csv", runs);
  run.write("ablation.dat", dat + ")\n" + points);
  write_reports(run, with_gains(reports, ablation_name(AblationVariant::kFull)), out);
  run.finish();
  return kOk;
}

int cmd_sweep(const Overrides& o, const std::string& param, std::ostream& out, std::ostream& err) {
  const ExperimentConfig c = resolve(o);
  const ExperimentData data = load_data(c, err);
  Run run("sweep", c, o.out);

  std::vector<double> values;
  if (param == "d") {
    for (std::size_t d : c.sweep.corridor_dims) values.push_back(static_cast<double>(d));
  } else {
    values = c.sweep.gammas;
  }
  std::string csv = "param,value,target,runs,mean,std\n";
  std::string dat = "# " + param + " mean_gb_auc\n";
  std::ostringstream table;
  table << param << "\tmean_gb_auc\n";
  for (double v : values) {
    ExperimentConfig point = c;
    if (param == "d") {
      point.model.corridor_dim = static_cast<std::size_t>(v);
    } else {
      point.loss.gamma.fill(v);
      point.loss.gamma[index_of(Target::kCredit)] = 0.0;
    }
    point.validate();
    const std::string label = param == "d" ? std::to_string(static_cast<std::size_t>(v)) : fmt(v, "%g");
    err << "sweep " << param << "=" << label << "\n";
    const auto rs = repeat_experiment(point.model, point.loss, point.train, data, point.train.seeds, c.scope);
    double gb_total = 0.0;
    for (const RunResult& r : rs) gb_total += mean_gb(r.metrics).value_or(0.0);
    const double gb_mean = gb_total / static_cast<double>(rs.size());
    for (Target t : point.model.targets()) {
      std::vector<double> xs;
      for (const RunResult& r : rs) {
        if (r.metrics[index_of(t)]) xs.push_back(*r.metrics[index_of(t)]);
      }
      if (xs.empty()) continue;
      const Summary s = xs.size() >= 2 ? mean_std(xs) : Summary{xs.front(), 0.0};
      csv += param + "," + label + "," + std::string(target_name(t)) + "," + std::to_string(xs.size()) + "," +
             fmt(s.mean) + "," + fmt(s.stddev) + "\n";
    }
    dat += label + " " + fmt(gb_mean) + "\n";
    table << label << "\t" << fmt(gb_mean, "%.4f") << "\n";
  }
  run.write("sweep_" + param + ".csv", csv);
  run.write("sweep_" + param + ".dat", dat);
  run.write("sweep_" + param + ".txt", table.str());
  out << table.str();
  run.finish();
  return kOk;
}

int cmd_gradcheck(const Overrides& o, std::size_t batch_size, std::size_t pool, double step, double tol,
                  std::ostream& out, std::ostream& err) {
  ExperimentConfig c = resolve(o);
  if (!o.n) c.sim.n = pool;
  Run run("gradcheck", c, o.out);
  const ExperimentData data = load_data(c, err);
  std::string csv = "seed,worst_relative_error,parameter,index,analytic,numeric,checked,passed\n";
  bool all_passed = true;
  for (std::uint64_t seed : c.train.seeds) {
    const Batch batch = mixed_batch(data.split.train, batch_size, seed);
    const GradCheckReport r = msis_gradcheck(c.model, c.loss, batch, seed, step, tol);
    all_passed = all_passed && r.passed;
    csv += std::to_string(seed) + "," + fmt(r.worst_relative_error, "%.6e") + "," + r.worst_name + "," +
           std::to_string(r.worst_index) + "," + fmt(r.worst_analytic, "%.10e") + "," +
           fmt(r.worst_numeric, "%.10e") + "," + std::to_string(r.checked) + "," + (r.passed ? "1" : "0") + "\n";
    out << "seed " << seed << ": worst relative error " << fmt(r.worst_relative_error, "%.3e") << " at "
        << r.worst_name << "[" << r.worst_index << "] over " << r.checked << " parameters "
        << (r.passed ? "ok" : "FAILED") << "\n";
  }
  run.write("gradcheck.csv", csv);
  run.finish();
  if (!all_passed) throw CheckFailed("gradient check exceeded tolerance " + fmt(tol, "%g"));
  return kOk;
}

// Reads model,seed,target,auc rows written by evaluate/ablate.
std::map<std::string, std::map<std::uint64_t, TargetMetrics>> read_runs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("runs: cannot open " + path);
  std::map<std::string, std::map<std::uint64_t, TargetMetrics>> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (lineno == 1) {
      if (line != "model,seed,target,auc") throw ParseError(path + ":1: expected header model,seed,target,auc");
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    if (f.size() != 4) throw ParseError(where + "expected 4 fields");
    const auto t = parse_target(f[2]);
    if (!t) throw ParseError(where + "unknown target " + f[2]);
    try {
      out[f[0]][std::stoull(f[1])][index_of(*t)] = std::stod(f[3]);
    } catch (const std::logic_error&) {
      throw ParseError(where + "non-numeric seed or auc");
    }
  }
  return out;
}

int cmd_report(const Overrides& o, const std::vector<std::string>& run_files, const std::string& baseline,
               std::ostream& out) {
  const ExperimentConfig c = resolve(o);
  Run run("report", c, o.out);
  std::map<std::string, std::map<std::uint64_t, TargetMetrics>> merged;
  std::vector<std::string> order;
  for (const std::string& path : run_files) {
    for (auto& [model, seeds] : read_runs(path)) {
      if (!merged.contains(model)) order.push_back(model);
      for (auto& [seed, m] : seeds) merged[model][seed] = m;
    }
  }
  std::vector<MetricsReport> reports;
  for (const std::string& model : order) {
    std::vector<TargetMetrics> ms;
    for (const auto& [seed, m] : merged[model]) ms.push_back(m);
    if (ms.size() < 2) throw ConfigError("report: model " + model + " has fewer than two runs");
    reports.push_back(report(model, ms, c.scope));
  }
  write_reports(run, with_gains(reports, baseline), out);
  run.finish();
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-stage credit risk experiments: simulate, train, evaluate, ablate, sweep, gradcheck, report",
               "msis"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  Overrides o;

  auto* simulate = app.add_subcommand("simulate", "generate a synthetic loan funnel");
  add_common(simulate, o);

  std::string model_kind = "msis";
  std::vector<std::string> targets;
  auto* train = app.add_subcommand("train", "train a model per seed and write checkpoints and logs");
  add_common(train, o);
  train->add_option("--model", model_kind, "msis, single_task, single_task_entropy or flat_multitask")
      ->check(CLI::IsMember({"msis", "single_task", "single_task_entropy", "flat_multitask"}));
  train->add_option("--target", targets, "GB targets for single-task models (default: all)");

  std::vector<std::string> checkpoints;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "compare MSIS with the configured baselines");
  add_common(evaluate_cmd, o);
  evaluate_cmd->add_option("--checkpoint", checkpoints, "evaluate saved checkpoints instead of training");

  std::vector<std::string> variants;
  auto* ablate_cmd = app.add_subcommand("ablate", "run ablation variants");
  add_common(ablate_cmd, o);
  ablate_cmd->add_option("--variant", variants, "variants to run (default: all)");

  std::string param;
  auto* sweep = app.add_subcommand("sweep", "sweep corridor width d or entropy weight gamma");
  add_common(sweep, o);
  sweep->add_option("--param", param, "d or gamma")->required()->check(CLI::IsMember({"d", "gamma"}));

  std::size_t batch_size = 64;
  std::size_t pool = 2000;
  double step = 1e-8;
  double tol = 1e-4;
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the full loss");
  add_common(gradcheck, o);
  gradcheck->add_option("--batch", batch_size, "batch size")->check(CLI::PositiveNumber);
  gradcheck->add_option("--pool", pool, "applications simulated to draw the batch from (unless --n)")
      ->check(CLI::PositiveNumber);
  gradcheck->add_option("--step", step, "central-difference step")->check(CLI::PositiveNumber);
  gradcheck->add_option("--tol", tol, "relative error tolerance")->check(CLI::PositiveNumber);

  std::vector<std::string> run_files;
  std::string baseline = "single_task";
  auto* report_cmd = app.add_subcommand("report", "aggregate runs.csv files into one comparison table");
  add_common(report_cmd, o);
  report_cmd->add_option("--runs", run_files, "runs.csv files")->required();
  report_cmd->add_option("--baseline", baseline, "model the gains are measured against");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(o, out, err);
    if (train->parsed()) return cmd_train(o, model_kind, targets, out, err);
    if (evaluate_cmd->parsed()) return cmd_evaluate(o, checkpoints, out, err);
    if (ablate_cmd->parsed()) return cmd_ablate(o, variants, out, err);
    if (sweep->parsed()) return cmd_sweep(o, param, out, err);
    if (gradcheck->parsed()) return cmd_gradcheck(o, batch_size, pool, step, tol, out, err);
    if (report_cmd->parsed()) return cmd_report(o, run_files, baseline, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const CheckFailed& e) {
    err << e.what() << "\n";
    return kCheckFailed;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kUsageError;
}

}  // namespace msis::cli
