#include "msis/layers.hpp"

#include <cmath>

namespace msis {

Tensor2D glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Tensor2D w(fan_in, fan_out);
  for (double& v : w.values()) v = dist(rng);
  return w;
}

void add_dense(ParamStore& params, const std::string& prefix, std::size_t in, std::size_t out,
               std::mt19937_64& rng) {
  params.add(prefix + ".weight", glorot_uniform(in, out, rng));
  params.add(prefix + ".bias", Tensor2D(1, out));
}

DenseVars DenseVars::bind(Tape& tape, ParamStore& params, const std::string& prefix) {
  return DenseVars{tape.param(params.at(prefix + ".weight")), tape.param(params.at(prefix + ".bias"))};
}

Var apply_mlp(Tape& tape, ParamStore& params, const std::string& prefix, std::size_t depth, Var x,
              bool linear_output) {
  for (std::size_t i = 0; i < depth; ++i) {
    const auto layer = DenseVars::bind(tape, params, prefix + ".layer" + std::to_string(i));
    const bool last = i + 1 == depth;
    x = (last && linear_output) ? layer.linear(x) : layer.rectified(x);
  }
  return x;
}

void add_mlp(ParamStore& params, const std::string& prefix, std::size_t in,
             std::span<const std::size_t> widths, std::mt19937_64& rng) {
  for (std::size_t i = 0; i < widths.size(); ++i) {
    add_dense(params, prefix + ".layer" + std::to_string(i), in, widths[i], rng);
    in = widths[i];
  }
}

}  // namespace msis
