#include "msis/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace msis {

namespace {

double evaluate(ParamStore& params, const LossFn& loss) {
  Tape tape(false);
  return loss(tape, params).scalar();
}

}  // namespace

GradCheckReport finite_diff_check(ParamStore& params, const LossFn& loss, double step, double tol) {
  params.zero_grad();
  {
    Tape tape;
    Var root = loss(tape, params);
    tape.backward(root);
  }
  const double base = evaluate(params, loss);
  if (evaluate(params, loss) != base) {
    throw ContractError("finite_diff_check: loss function is not deterministic");
  }

  GradCheckReport report;
  report.worst_relative_error = -1.0;
  for (auto& [name, p] : params) {
    auto values = p.value.values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + step;
      const double up = evaluate(params, loss);
      values[i] = saved - step;
      const double down = evaluate(params, loss);
      values[i] = saved;

      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad[i];
      const double err = std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
      if (err > report.worst_relative_error) {
        report.worst_relative_error = err;
        report.worst_name = name;
        report.worst_index = i;
        report.worst_analytic = analytic;
        report.worst_numeric = numeric;
      }
      ++report.checked;
    }
  }
  report.worst_relative_error = std::max(report.worst_relative_error, 0.0);
  report.passed = report.worst_relative_error < tol;
  return report;
}

}  // namespace msis
