#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>

#include "msis/autodiff.hpp"

namespace msis {

/// Glorot-uniform weight in [-sqrt(6/(in+out)), +sqrt(6/(in+out))].
Tensor2D glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

/// Registers `<prefix>.weight` [in x out] and `<prefix>.bias` [1 x out] (zeros).
void add_dense(ParamStore& params, const std::string& prefix, std::size_t in, std::size_t out,
               std::mt19937_64& rng);

/// Weight and bias of one dense layer, bound to a tape.
struct DenseVars {
  Var weight;
  Var bias;

  static DenseVars bind(Tape& tape, ParamStore& params, const std::string& prefix);
  Var linear(Var x) const { return dense(x, weight, bias); }
  Var rectified(Var x) const { return relu(dense(x, weight, bias)); }
};

/// Stack of dense layers `<prefix>.layer<i>`; ReLU after every layer except,
/// when `linear_output` is set, the last.
Var apply_mlp(Tape& tape, ParamStore& params, const std::string& prefix, std::size_t depth, Var x,
              bool linear_output);

void add_mlp(ParamStore& params, const std::string& prefix, std::size_t in,
             std::span<const std::size_t> widths, std::mt19937_64& rng);

}  // namespace msis
