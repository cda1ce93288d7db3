#pragma once

// Three-stage multi-task network. A shared bottom feeds one tower per target;
// the Information Corridor carries each stage's aggregated representation
// (intra-stage attention) into the next stage, where every target fuses it
// with its own tower (inter-stage attention) before its sigmoid head.

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "msis/autodiff.hpp"
#include "msis/labels.hpp"
#include "msis/layers.hpp"

namespace msis {

/// Which representations feed a stage's intra-stage attention.
enum class AttentionInput { kPostFusion, kPreFusion };

struct StageTargets {
  Stage stage;
  std::vector<Target> targets;

  friend bool operator==(const StageTargets&, const StageTargets&) = default;
};

struct MsisConfig {
  std::size_t input_dim = 32;
  std::vector<std::size_t> shared_widths{64, 32};
  /// Hidden tower widths; every tower ends in a linear layer of width corridor_dim.
  std::vector<std::size_t> tower_hidden{16};
  std::size_t corridor_dim = 8;
  std::vector<StageTargets> stages{
      {Stage::kAR, {Target::kCredit}},
      {Stage::kWS, {Target::kDraw30, Target::kDraw90}},
      {Stage::kGB, {Target::kMob1, Target::kMob3, Target::kMob6}},
  };
  /// false severs the corridor: heads read towers directly (flat multi-task).
  bool corridor = true;
  AttentionInput attention_input = AttentionInput::kPostFusion;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  std::vector<Target> targets() const;
  bool has_target(Target t) const;
  bool has_stage(Stage s) const;

  friend bool operator==(const MsisConfig&, const MsisConfig&) = default;
};

/// The d -> d rectified projections used by one attention block.
struct ScoringPair {
  DenseVars query;  // g1
  DenseVars key;    // g2
};

struct AttentionOutput {
  Var aggregate;  // [b x d]
  Var weights;    // [b x M], rows on the simplex
};

/// Aggregates the tower representations of one stage into e_ou:
/// scores <g1(h_m), g2(h_m)> / sqrt(d), weights = softmax(scores),
/// e_ou = sum_m weights_m * g3(h_m). A single representation gets weight 1
/// and needs no scoring pair.
AttentionOutput intra_stage_attention(std::span<const Var> reps, const ScoringPair* scoring,
                                      const DenseVars& g3);

struct FusionProjections {
  ScoringPair corridor_scoring;  // scores e_in
  ScoringPair tower_scoring;     // scores h
  DenseVars corridor_value;      // g3' applied to e_in
  DenseVars tower_value;         // g3' applied to h
};

/// Fuses the corridor input with one target's tower:
/// h_hat = beta_1 * g3'(e_in) + beta_2 * g3'(h), beta from self-scores of both
/// candidates. `forced_beta` replaces the learned weights (test hook).
AttentionOutput inter_stage_fusion(Var corridor_in, Var tower, const FusionProjections& proj,
                                   std::optional<std::array<double, 2>> forced_beta = std::nullopt);

struct CorridorLink {
  Stage source;
  Stage dest;
  Var e_ou;   // [b x d]
  Var e_in;   // [b x d]
  Var alpha;  // [b x |source targets|]
};

struct ForwardResult {
  std::array<Var, kNumTargets> probability;  // [b x 1]
  std::array<Var, kNumTargets> tower;        // h, [b x d]
  std::array<Var, kNumTargets> top;          // h_hat (or h without fusion), [b x d]
  std::array<Var, kNumTargets> beta;         // [b x 2], fused targets only
  std::vector<CorridorLink> links;

  bool has(Target t) const { return probability[index_of(t)].valid(); }
  const Var& prob(Target t) const { return probability[index_of(t)]; }
};

ParamStore init_params(const MsisConfig& config, std::uint64_t seed);

/// Closed-form count of trainable scalars for `config`.
std::size_t parameter_count(const MsisConfig& config);

ForwardResult forward(Tape& tape, ParamStore& params, const MsisConfig& config, const Tensor2D& features);

}  // namespace msis
