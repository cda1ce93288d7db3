#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "msis/labels.hpp"
#include "msis/tensor.hpp"

namespace msis {

/// Malformed input file; the message carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid experiment setup (empty split, missing sidecar, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LabelSlots = std::array<std::optional<bool>, kNumTargets>;

/// One credit application as the platform sees it.
struct Example {
  std::int64_t id = 0;
  int timestamp = 0;
  std::vector<double> features;
  LabelSlots labels;

  const std::optional<bool>& label(Target t) const { return labels[index_of(t)]; }
  friend bool operator==(const Example&, const Example&) = default;
};

using Examples = std::vector<Example>;

/// Always-known outcomes kept by the simulator for full-population scoring.
struct Counterfactual {
  std::int64_t id = 0;
  double quality = 0.0;
  std::optional<int> draw_day;
  std::optional<int> default_term;
  std::array<bool, kNumTargets> labels{};

  friend bool operator==(const Counterfactual&, const Counterfactual&) = default;
};

using CounterfactualTable = std::unordered_map<std::int64_t, Counterfactual>;

// CSV interchange. Doubles are written in shortest round-trip form.
void save_csv(const Examples& examples, const std::filesystem::path& path);
Examples load_csv(const std::filesystem::path& path);
void save_counterfactual_csv(std::span<const Counterfactual> rows, const std::filesystem::path& path);
std::vector<Counterfactual> load_counterfactual_csv(const std::filesystem::path& path);
CounterfactualTable index_counterfactuals(std::span<const Counterfactual> rows);

struct Split {
  Examples train;
  Examples validation;
  Examples test;
};

/// Out-of-time split: test holds timestamp >= cutoff, the rest is shuffled
/// with `seed` and divided 80/20 into train/validation.
Split split_oot(const Examples& examples, int cutoff_timestamp, std::uint64_t seed);

class Standardizer {
 public:
  static constexpr double kStdFloor = 1e-8;

  static Standardizer fit(const Examples& train);
  void apply(Examples& examples) const;
  Examples transform(Examples examples) const {
    apply(examples);
    return examples;
  }

  std::span<const double> mean() const { return mean_; }
  std::span<const double> stddev() const { return std_; }

 private:
  std::vector<double> mean_;
  std::vector<double> std_;
};

/// Features plus per-target label and mask columns. Unobserved label slots
/// hold a poison value that must never be read.
struct Batch {
  Tensor2D features;
  std::vector<std::int64_t> ids;
  std::array<std::vector<double>, kNumTargets> labels;
  std::array<std::vector<double>, kNumTargets> masks;

  std::size_t size() const { return ids.size(); }
  std::span<const double> label_column(Target t) const { return labels[index_of(t)]; }
  std::span<const double> mask_column(Target t) const { return masks[index_of(t)]; }
  /// Checked access; throws ContractError on an unobserved slot.
  double label(Target t, std::size_t row) const;
};

Batch make_batch(const Examples& examples, std::span<const std::size_t> rows);
Batch make_batch(const Examples& examples);

/// Visiting order for one epoch; a pure function of (n, seed, epoch).
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch);

/// Shuffled mini-batches covering every example exactly once.
std::vector<Batch> batches(const Examples& examples, std::size_t batch_size, std::uint64_t seed,
                           std::uint64_t epoch = 0);

std::size_t feature_dim(const Examples& examples);

}  // namespace msis
