#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "msis/autodiff.hpp"

namespace msis {

/// Builds a scalar loss on the given tape from the current parameter values.
using LossFn = std::function<Var(Tape&, ParamStore&)>;

struct GradCheckReport {
  double worst_relative_error = 0.0;
  std::string worst_name;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
  bool passed = true;
};

/// Compares backward-sweep gradients against central differences for every
/// scalar parameter. Error is |analytic - numeric| / max(1, |analytic|).
/// Throws ContractError if two evaluations of `loss` disagree.
GradCheckReport finite_diff_check(ParamStore& params, const LossFn& loss, double step, double tol);

}  // namespace msis
