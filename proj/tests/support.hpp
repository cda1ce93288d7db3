#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "msis/dataset.hpp"
#include "msis/funnel_sim.hpp"
#include "msis/model.hpp"

namespace msis::test {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("msis-" + tag + "-" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline SimConfig small_sim(std::size_t n, std::uint64_t seed = 7) {
  SimConfig c;
  c.n = n;
  c.seed = seed;
  return c;
}

/// A small MSIS config that keeps every structural feature of the default.
inline MsisConfig small_model(std::size_t input_dim = 6, std::size_t d = 3) {
  MsisConfig c;
  c.input_dim = input_dim;
  c.shared_widths = {5};
  c.tower_hidden = {4};
  c.corridor_dim = d;
  return c;
}

/// Examples with random features; every label observed unless `gb_observed` is false.
inline Examples random_examples(std::size_t n, std::size_t dim, std::uint64_t seed, bool gb_observed = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::bernoulli_distribution coin(0.4);
  Examples out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Example& e = out[i];
    e.id = static_cast<std::int64_t>(i);
    e.timestamp = static_cast<int>(i);
    e.features.resize(dim);
    for (double& x : e.features) x = normal(rng);
    for (Target t : kAllTargets) {
      if (stage_of(t) == Stage::kGB && !gb_observed) continue;
      e.labels[index_of(t)] = coin(rng);
    }
  }
  return out;
}

inline Tensor2D random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Tensor2D t(rows, cols);
  for (double& v : t.values()) v = normal(rng);
  return t;
}

}  // namespace msis::test
