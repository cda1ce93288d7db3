#include "msis/config_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace msis {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& why) { throw ConfigError(path + ": " + why); }

// Walks one JSON object, remembering which keys were consumed so leftovers
// can be reported.
class Section {
 public:
  Section(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "expected an object");
  }

  const Json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }
  std::string at(const std::string& key) const { return path_ + "." + key; }

  void read(const std::string& key, double& out) {
    if (const Json* v = find(key)) out = as_double(*v, at(key));
  }
  void read(const std::string& key, std::size_t& out) {
    if (const Json* v = find(key)) out = as_count(*v, at(key));
  }
  void read(const std::string& key, bool& out) {
    if (const Json* v = find(key)) {
      if (!v->is_boolean()) fail(at(key), "expected true or false");
      out = v->get<bool>();
    }
  }
  void read(const std::string& key, std::vector<std::size_t>& out) {
    if (const Json* v = find(key)) {
      out.clear();
      for (std::size_t i = 0; i < array(*v, at(key)).size(); ++i) {
        out.push_back(as_count((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
      }
    }
  }
  void read(const std::string& key, std::vector<double>& out) {
    if (const Json* v = find(key)) {
      out.clear();
      for (std::size_t i = 0; i < array(*v, at(key)).size(); ++i) {
        out.push_back(as_double((*v)[i], at(key) + "[" + std::to_string(i) + "]"));
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.contains(key)) fail(at(key), "unknown field");
    }
  }

  static double as_double(const Json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }
  static std::size_t as_count(const Json& v, const std::string& path) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) fail(path, "expected a non-negative integer");
    return v.get<std::size_t>();
  }
  static const Json& array(const Json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array");
    return v;
  }
  static std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Target target_at(const Json& v, const std::string& path) {
  const auto t = parse_target(Section::as_string(v, path));
  if (!t) fail(path, "unknown target '" + v.get<std::string>() + "'");
  return *t;
}

}  // namespace

Json to_json(const SimConfig& c) {
  return Json{{"n", c.n},
              {"feature_dim", c.feature_dim},
              {"acceptance_rate", c.acceptance_rate},
              {"policy_alignment", c.policy_alignment},
              {"n_terms", c.n_terms},
              {"drift_shift", c.drift_shift},
              {"oot_fraction", c.oot_fraction},
              {"seed", c.seed},
              {"quality_signal", c.quality_signal},
              {"quality_noise", c.quality_noise},
              {"platform_signal", c.platform_signal},
              {"platform_noise", c.platform_noise},
              {"noise_correlation", c.noise_correlation},
              {"draw_quality_loading", c.draw_quality_loading},
              {"draw_signal", c.draw_signal},
              {"draw_intercept", c.draw_intercept},
              {"hazard_intercept", c.hazard_intercept},
              {"hazard_slope", c.hazard_slope}};
}

SimConfig sim_from_json(const Json& j, SimConfig c) {
  Section s(j, "sim");
  s.read("n", c.n);
  s.read("feature_dim", c.feature_dim);
  s.read("acceptance_rate", c.acceptance_rate);
  s.read("policy_alignment", c.policy_alignment);
  s.read("n_terms", c.n_terms);
  s.read("drift_shift", c.drift_shift);
  s.read("oot_fraction", c.oot_fraction);
  std::size_t seed = c.seed;
  s.read("seed", seed);
  c.seed = seed;
  s.read("quality_signal", c.quality_signal);
  s.read("quality_noise", c.quality_noise);
  s.read("platform_signal", c.platform_signal);
  s.read("platform_noise", c.platform_noise);
  s.read("noise_correlation", c.noise_correlation);
  s.read("draw_quality_loading", c.draw_quality_loading);
  s.read("draw_signal", c.draw_signal);
  s.read("draw_intercept", c.draw_intercept);
  s.read("hazard_intercept", c.hazard_intercept);
  s.read("hazard_slope", c.hazard_slope);
  s.finish();
  return c;
}

Json to_json(const MsisConfig& c) {
  Json stages = Json::object();
  for (const StageTargets& st : c.stages) {
    Json names = Json::array();
    for (Target t : st.targets) names.push_back(std::string(target_name(t)));
    stages[std::string(stage_name(st.stage))] = names;
  }
  return Json{{"input_dim", c.input_dim},
              {"shared_widths", c.shared_widths},
              {"tower_hidden", c.tower_hidden},
              {"corridor_dim", c.corridor_dim},
              {"stages", stages},
              {"corridor", c.corridor},
              {"attention_input", c.attention_input == AttentionInput::kPostFusion ? "post_fusion" : "pre_fusion"}};
}

MsisConfig model_from_json(const Json& j, MsisConfig c) {
  Section s(j, "model");
  s.read("input_dim", c.input_dim);
  s.read("shared_widths", c.shared_widths);
  s.read("tower_hidden", c.tower_hidden);
  s.read("corridor_dim", c.corridor_dim);
  s.read("corridor", c.corridor);
  if (const Json* v = s.find("attention_input")) {
    const std::string name = Section::as_string(*v, "model.attention_input");
    if (name == "post_fusion") {
      c.attention_input = AttentionInput::kPostFusion;
    } else if (name == "pre_fusion") {
      c.attention_input = AttentionInput::kPreFusion;
    } else {
      fail("model.attention_input", "expected post_fusion or pre_fusion");
    }
  }
  if (const Json* v = s.find("stages")) {
    Section st(*v, "model.stages");
    c.stages.clear();
    for (Stage stage : {Stage::kAR, Stage::kWS, Stage::kGB}) {
      const std::string key(stage_name(stage));
      const Json* list = st.find(key);
      if (list == nullptr) continue;
      StageTargets entry{stage, {}};
      const std::string path = st.at(key);
      for (std::size_t i = 0; i < Section::array(*list, path).size(); ++i) {
        entry.targets.push_back(target_at((*list)[i], path + "[" + std::to_string(i) + "]"));
      }
      c.stages.push_back(entry);
    }
    st.finish();
  }
  s.finish();
  return c;
}

Json to_json(const LossConfig& c) {
  Json weights = Json::object();
  for (Stage st : {Stage::kAR, Stage::kWS, Stage::kGB}) weights[std::string(stage_name(st))] = c.weight(st);
  Json gamma = Json::object();
  for (Target t : kAllTargets) {
    if (t != Target::kCredit) gamma[std::string(target_name(t))] = c.gamma[index_of(t)];
  }
  return Json{{"stage_weights", weights},
              {"gamma", gamma},
              {"unlabeled_reduction", c.unlabeled_reduction == Reduction::kMean ? "mean" : "sum"}};
}

LossConfig loss_from_json(const Json& j, LossConfig c) {
  Section s(j, "loss");
  if (const Json* v = s.find("stage_weights")) {
    Section w(*v, "loss.stage_weights");
    for (Stage st : {Stage::kAR, Stage::kWS, Stage::kGB}) {
      w.read(std::string(stage_name(st)), c.stage_weights[static_cast<std::size_t>(st)]);
    }
    w.finish();
  }
  if (const Json* v = s.find("gamma")) {
    if (v->is_number()) {
      const double g = Section::as_double(*v, "loss.gamma");
      c.gamma.fill(g);
      c.gamma[index_of(Target::kCredit)] = 0.0;
    } else {
      Section g(*v, "loss.gamma");
      for (Target t : kAllTargets) {
        if (t != Target::kCredit) g.read(std::string(target_name(t)), c.gamma[index_of(t)]);
      }
      g.finish();
    }
  }
  if (const Json* v = s.find("unlabeled_reduction")) {
    const std::string name = Section::as_string(*v, "loss.unlabeled_reduction");
    if (name == "mean") {
      c.unlabeled_reduction = Reduction::kMean;
    } else if (name == "sum") {
      c.unlabeled_reduction = Reduction::kSum;
    } else {
      fail("loss.unlabeled_reduction", "expected mean or sum");
    }
  }
  s.finish();
  return c;
}

Json to_json(const TrainConfig& c) {
  return Json{{"epochs", c.epochs},         {"batch_size", c.batch_size}, {"learning_rate", c.learning_rate},
              {"beta1", c.beta1},           {"beta2", c.beta2},           {"epsilon", c.epsilon},
              {"patience", c.patience},     {"seeds", c.seeds},           {"early_stopping", c.early_stopping}};
}

TrainConfig train_from_json(const Json& j, TrainConfig c) {
  Section s(j, "train");
  s.read("epochs", c.epochs);
  s.read("batch_size", c.batch_size);
  s.read("learning_rate", c.learning_rate);
  s.read("beta1", c.beta1);
  s.read("beta2", c.beta2);
  s.read("epsilon", c.epsilon);
  s.read("patience", c.patience);
  s.read("early_stopping", c.early_stopping);
  std::vector<std::size_t> seeds(c.seeds.begin(), c.seeds.end());
  s.read("seeds", seeds);
  c.seeds.assign(seeds.begin(), seeds.end());
  s.finish();
  return c;
}

Json to_json(const BaselineConfig& c) { return Json{{"hidden", c.hidden}}; }

BaselineConfig baseline_from_json(const Json& j, BaselineConfig c) {
  Section s(j, "baseline");
  s.read("hidden", c.hidden);
  s.finish();
  return c;
}

void ExperimentConfig::validate() const {
  sim.validate();
  model.validate();
  loss.validate();
  train.validate();
  if (train.seeds.empty()) throw ConfigError("train.seeds: at least one seed is required");
  if (model.input_dim != sim.feature_dim) throw ConfigError("model.input_dim: must equal sim.feature_dim");
  for (std::size_t w : baseline.hidden) {
    if (w == 0) throw ConfigError("baseline.hidden: layer widths must be positive");
  }
  for (std::size_t d : sweep.corridor_dims) {
    if (d == 0) throw ConfigError("sweep.corridor_dims: dimensions must be positive");
  }
  for (double g : sweep.gammas) {
    if (!(g >= 0.0)) throw ConfigError("sweep.gammas: weights must be non-negative");
  }
}

Json to_json(const ExperimentConfig& c) {
  Json baselines = Json::array();
  for (BaselineKind k : c.baselines) baselines.push_back(baseline_name(k));
  return Json{{"sim", to_json(c.sim)},
              {"model", to_json(c.model)},
              {"loss", to_json(c.loss)},
              {"train", to_json(c.train)},
              {"baseline", to_json(c.baseline)},
              {"baselines", baselines},
              {"sweep", Json{{"corridor_dims", c.sweep.corridor_dims}, {"gammas", c.sweep.gammas}}},
              {"scope", scope_name(c.scope)},
              {"data_dir", c.data_dir.string()}};
}

ExperimentConfig experiment_from_json(const Json& j, ExperimentConfig c) {
  Section s(j, "config");
  if (const Json* v = s.find("sim")) c.sim = sim_from_json(*v, c.sim);
  if (const Json* v = s.find("model")) c.model = model_from_json(*v, c.model);
  if (const Json* v = s.find("loss")) c.loss = loss_from_json(*v, c.loss);
  if (const Json* v = s.find("train")) c.train = train_from_json(*v, c.train);
  if (const Json* v = s.find("baseline")) c.baseline = baseline_from_json(*v, c.baseline);
  if (const Json* v = s.find("baselines")) {
    c.baselines.clear();
    for (std::size_t i = 0; i < Section::array(*v, "baselines").size(); ++i) {
      const std::string path = "baselines[" + std::to_string(i) + "]";
      const auto kind = parse_baseline(Section::as_string((*v)[i], path));
      if (!kind) fail(path, "unknown baseline '" + (*v)[i].get<std::string>() + "'");
      c.baselines.push_back(*kind);
    }
  }
  if (const Json* v = s.find("sweep")) {
    Section sw(*v, "sweep");
    sw.read("corridor_dims", c.sweep.corridor_dims);
    sw.read("gammas", c.sweep.gammas);
    sw.finish();
  }
  if (const Json* v = s.find("scope")) {
    const auto scope = parse_scope(Section::as_string(*v, "scope"));
    if (!scope) fail("scope", "expected observed-only or full-population");
    c.scope = *scope;
  }
  if (const Json* v = s.find("data_dir")) c.data_dir = Section::as_string(*v, "data_dir");
  s.finish();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return experiment_from_json(j);
}

void save_config(const ExperimentConfig& config, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << to_json(config).dump(2) << "\n";
}

std::string canonical_text(const ExperimentConfig& config) { return to_json(config).dump(); }

}  // namespace msis
