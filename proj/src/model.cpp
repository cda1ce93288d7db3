#include "msis/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "msis/dataset.hpp"

namespace msis {

namespace {

std::string target_prefix(Target t) {
  return std::string(stage_name(stage_of(t))) + "." + std::string(target_name(t));
}

std::string tower_prefix(Target t) { return target_prefix(t) + ".tower"; }
std::string head_prefix(Target t) { return target_prefix(t) + ".head"; }
std::string source_prefix(Stage s) { return "corridor." + std::string(stage_name(s)); }
std::string link_prefix(Stage src, Stage dst) {
  return "corridor." + std::string(stage_name(src)) + "_" + std::string(stage_name(dst)) + ".f";
}
std::string fusion_prefix(Target t) { return "corridor." + target_prefix(t); }

std::vector<std::size_t> tower_widths(const MsisConfig& c) {
  std::vector<std::size_t> w = c.tower_hidden;
  w.push_back(c.corridor_dim);
  return w;
}

ScoringPair bind_scoring(Tape& tape, ParamStore& params, const std::string& prefix, const std::string& suffix) {
  return ScoringPair{DenseVars::bind(tape, params, prefix + ".g1" + suffix),
                     DenseVars::bind(tape, params, prefix + ".g2" + suffix)};
}

Var self_score(const ScoringPair& pair, Var v) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(v.cols()));
  return scale(row_dot(pair.query.rectified(v), pair.key.rectified(v)), inv_sqrt_d);
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw ConfigError("model." + field + ": " + why);
}

}  // namespace

void MsisConfig::validate() const {
  if (input_dim == 0) invalid("input_dim", "must be positive");
  if (corridor_dim == 0) invalid("corridor_dim", "must be at least 1");
  if (std::find(shared_widths.begin(), shared_widths.end(), 0u) != shared_widths.end() ||
      std::find(tower_hidden.begin(), tower_hidden.end(), 0u) != tower_hidden.end()) {
    invalid("widths", "layer widths must be positive");
  }
  if (stages.empty()) invalid("stages", "at least one stage is required");
  for (std::size_t i = 0; i < stages.size(); ++i) {
    if (i > 0 && static_cast<int>(stages[i].stage) <= static_cast<int>(stages[i - 1].stage)) {
      invalid("stages", "stages must appear once each, in AR, WS, GB order");
    }
    if (stages[i].targets.empty()) invalid("stages", "stage without targets");
    for (Target t : stages[i].targets) {
      if (stage_of(t) != stages[i].stage) {
        invalid("stages", std::string(target_name(t)) + " does not belong to stage " +
                              std::string(stage_name(stages[i].stage)));
      }
      if (std::count(stages[i].targets.begin(), stages[i].targets.end(), t) != 1) {
        invalid("stages", "duplicate target " + std::string(target_name(t)));
      }
    }
  }
}

std::vector<Target> MsisConfig::targets() const {
  std::vector<Target> out;
  for (const auto& s : stages) out.insert(out.end(), s.targets.begin(), s.targets.end());
  return out;
}

bool MsisConfig::has_target(Target t) const {
  const auto all = targets();
  return std::find(all.begin(), all.end(), t) != all.end();
}

bool MsisConfig::has_stage(Stage s) const {
  return std::any_of(stages.begin(), stages.end(), [s](const StageTargets& st) { return st.stage == s; });
}

ParamStore init_params(const MsisConfig& config, std::uint64_t seed) {
  config.validate();
  ParamStore params(seed);
  std::mt19937_64 rng(seed);
  const std::size_t d = config.corridor_dim;

  add_mlp(params, "shared", config.input_dim, config.shared_widths, rng);
  const std::size_t shared_out = config.shared_widths.empty() ? config.input_dim : config.shared_widths.back();
  const auto towers = tower_widths(config);

  for (std::size_t k = 0; k < config.stages.size(); ++k) {
    const StageTargets& stage = config.stages[k];
    for (Target t : stage.targets) {
      add_mlp(params, tower_prefix(t), shared_out, towers, rng);
      add_dense(params, head_prefix(t), d, 1, rng);
      if (config.corridor && k > 0) {
        const std::string p = fusion_prefix(t);
        for (const char* name : {".g1_in", ".g2_in", ".g1_tower", ".g2_tower", ".g3_in", ".g3_tower"}) {
          add_dense(params, p + name, d, d, rng);
        }
      }
    }
    if (config.corridor && k + 1 < config.stages.size()) {
      const std::string p = source_prefix(stage.stage);
      if (stage.targets.size() > 1) {
        add_dense(params, p + ".g1", d, d, rng);
        add_dense(params, p + ".g2", d, d, rng);
      }
      add_dense(params, p + ".g3", d, d, rng);
      add_dense(params, link_prefix(stage.stage, config.stages[k + 1].stage), d, d, rng);
    }
  }
  return params;
}

std::size_t parameter_count(const MsisConfig& config) {
  auto dense_size = [](std::size_t in, std::size_t out) { return in * out + out; };
  std::size_t n = 0;
  std::size_t in = config.input_dim;
  for (std::size_t w : config.shared_widths) {
    n += dense_size(in, w);
    in = w;
  }
  const std::size_t d = config.corridor_dim;
  std::size_t tower = 0;
  std::size_t tin = in;
  for (std::size_t w : tower_widths(config)) {
    tower += dense_size(tin, w);
    tin = w;
  }
  for (std::size_t k = 0; k < config.stages.size(); ++k) {
    const std::size_t m = config.stages[k].targets.size();
    n += m * (tower + dense_size(d, 1));
    if (!config.corridor) continue;
    if (k > 0) n += m * 6 * dense_size(d, d);
    if (k + 1 < config.stages.size()) n += ((m > 1 ? 3 : 1) + 1) * dense_size(d, d);
  }
  return n;
}

AttentionOutput intra_stage_attention(std::span<const Var> reps, const ScoringPair* scoring,
                                      const DenseVars& g3) {
  if (reps.empty()) throw DimensionError("intra_stage_attention: no representations");
  Tape& tape = reps.front().tape();
  const std::size_t b = reps.front().rows();
  if (reps.size() == 1) {
    return AttentionOutput{g3.rectified(reps.front()), tape.constant(Tensor2D(b, 1, 1.0))};
  }
  if (scoring == nullptr) throw ContractError("intra_stage_attention: scoring projections required");
  std::vector<Var> scores;
  scores.reserve(reps.size());
  for (const Var& h : reps) scores.push_back(self_score(*scoring, h));
  const Var alpha = row_softmax(concat_cols(scores));
  Var e_ou;
  for (std::size_t m = 0; m < reps.size(); ++m) {
    const Var term = scale_rows(g3.rectified(reps[m]), column(alpha, m));
    e_ou = m == 0 ? term : add(e_ou, term);
  }
  return AttentionOutput{e_ou, alpha};
}

AttentionOutput inter_stage_fusion(Var corridor_in, Var tower, const FusionProjections& proj,
                                   std::optional<std::array<double, 2>> forced_beta) {
  if (!corridor_in.value().same_shape(tower.value())) {
    throw DimensionError("inter_stage_fusion: " + corridor_in.value().shape_string() + " vs " +
                         tower.value().shape_string());
  }
  Tape& tape = tower.tape();
  Var beta;
  if (forced_beta) {
    Tensor2D fixed(tower.rows(), 2);
    for (std::size_t i = 0; i < fixed.rows(); ++i) {
      fixed(i, 0) = (*forced_beta)[0];
      fixed(i, 1) = (*forced_beta)[1];
    }
    beta = tape.constant(std::move(fixed));
  } else {
    const std::array<Var, 2> scores{self_score(proj.corridor_scoring, corridor_in),
                                    self_score(proj.tower_scoring, tower)};
    beta = row_softmax(concat_cols(scores));
  }
  const Var fused = add(scale_rows(proj.corridor_value.rectified(corridor_in), column(beta, 0)),
                        scale_rows(proj.tower_value.rectified(tower), column(beta, 1)));
  return AttentionOutput{fused, beta};
}

ForwardResult forward(Tape& tape, ParamStore& params, const MsisConfig& config, const Tensor2D& features) {
  if (features.cols() != config.input_dim) {
    throw DimensionError("forward: features " + features.shape_string() + " but input_dim is " +
                         std::to_string(config.input_dim));
  }
  ForwardResult out;
  const Var x = tape.constant(features);
  const Var shared = apply_mlp(tape, params, "shared", config.shared_widths.size(), x, false);
  const std::size_t tower_depth = config.tower_hidden.size() + 1;

  std::optional<Var> carried;  // e_ou of the previous stage
  for (std::size_t k = 0; k < config.stages.size(); ++k) {
    const StageTargets& stage = config.stages[k];
    std::optional<Var> e_in;
    if (config.corridor && carried) {
      const Stage src = config.stages[k - 1].stage;
      e_in = DenseVars::bind(tape, params, link_prefix(src, stage.stage)).rectified(*carried);
      out.links.back().e_in = *e_in;
      out.links.back().dest = stage.stage;
    }

    std::vector<Var> reps;
    for (Target t : stage.targets) {
      const std::size_t i = index_of(t);
      out.tower[i] = apply_mlp(tape, params, tower_prefix(t), tower_depth, shared, true);
      if (e_in) {
        const std::string p = fusion_prefix(t);
        const FusionProjections proj{bind_scoring(tape, params, p, "_in"), bind_scoring(tape, params, p, "_tower"),
                                     DenseVars::bind(tape, params, p + ".g3_in"),
                                     DenseVars::bind(tape, params, p + ".g3_tower")};
        const AttentionOutput fused = inter_stage_fusion(*e_in, out.tower[i], proj);
        out.top[i] = fused.aggregate;
        out.beta[i] = fused.weights;
      } else {
        out.top[i] = out.tower[i];
      }
      out.probability[i] = sigmoid(DenseVars::bind(tape, params, head_prefix(t)).linear(out.top[i]));
      reps.push_back(config.attention_input == AttentionInput::kPostFusion ? out.top[i] : out.tower[i]);
    }

    if (config.corridor && k + 1 < config.stages.size()) {
      const std::string p = source_prefix(stage.stage);
      std::optional<ScoringPair> scoring;
      if (reps.size() > 1) scoring = bind_scoring(tape, params, p, "");
      const AttentionOutput agg =
          intra_stage_attention(reps, scoring ? &*scoring : nullptr, DenseVars::bind(tape, params, p + ".g3"));
      carried = agg.aggregate;
      out.links.push_back(CorridorLink{stage.stage, stage.stage, agg.aggregate, Var{}, agg.weights});
    }
  }
  return out;
}

}  // namespace msis
