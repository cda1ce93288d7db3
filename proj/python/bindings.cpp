#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "commands.hpp"
#include "msis/config_io.hpp"
#include "msis/eval.hpp"

namespace py = pybind11;
using namespace msis;

namespace {

ExperimentConfig parse_config(const std::string& json_text) {
  ExperimentConfig c;
  if (!json_text.empty()) {
    try {
      c = experiment_from_json(Json::parse(json_text));
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
  }
  c.validate();
  return c;
}

py::dict simulate(const std::string& config_json) {
  const ExperimentConfig c = parse_config(config_json);
  const Population pop = generate(c.sim);
  const Examples seen = observe(pop);
  const auto n = static_cast<py::ssize_t>(pop.records.size());
  const auto d = static_cast<py::ssize_t>(c.sim.feature_dim);
  const auto k = static_cast<py::ssize_t>(kNumTargets);

  py::array_t<double> features({n, d});
  py::array_t<double> observed({n, k});
  py::array_t<bool> counterfactual({n, k});
  py::array_t<double> quality(n);
  py::array_t<std::int64_t> ids(n);
  py::array_t<int> timestamps(n);
  auto f = features.mutable_unchecked<2>();
  auto o = observed.mutable_unchecked<2>();
  auto cf = counterfactual.mutable_unchecked<2>();
  auto q = quality.mutable_unchecked<1>();
  auto id = ids.mutable_unchecked<1>();
  auto ts = timestamps.mutable_unchecked<1>();
  for (py::ssize_t i = 0; i < n; ++i) {
    const PopulationRecord& r = pop.records[static_cast<std::size_t>(i)];
    for (py::ssize_t j = 0; j < d; ++j) f(i, j) = r.features[static_cast<std::size_t>(j)];
    for (py::ssize_t t = 0; t < k; ++t) {
      const auto& label = seen[static_cast<std::size_t>(i)].labels[static_cast<std::size_t>(t)];
      o(i, t) = label ? (*label ? 1.0 : 0.0) : std::numeric_limits<double>::quiet_NaN();
      cf(i, t) = r.labels[static_cast<std::size_t>(t)];
    }
    q(i) = r.quality;
    id(i) = r.id;
    ts(i) = r.timestamp;
  }
  py::dict out;
  out["ids"] = ids;
  out["timestamps"] = timestamps;
  out["features"] = features;
  out["observed"] = observed;
  out["counterfactual"] = counterfactual;
  out["quality"] = quality;
  out["cutoff_timestamp"] = pop.cutoff_timestamp;
  return out;
}

py::list target_names() {
  py::list out;
  for (Target t : kAllTargets) out.append(std::string(target_name(t)));
  return out;
}

py::dict metrics_dict(const TargetMetrics& m) {
  py::dict out;
  for (Target t : kAllTargets) {
    if (m[index_of(t)]) out[py::str(std::string(target_name(t)))] = *m[index_of(t)];
  }
  return out;
}

// Trains MSIS or a baseline on the configured simulation and returns per-seed
// metrics on the out-of-time test split.
py::list run_model(const std::string& config_json, const std::string& model) {
  const ExperimentConfig c = parse_config(config_json);
  const ExperimentData data = prepare_experiment(generate(c.sim));
  std::vector<RunResult> runs;
  {
    py::gil_scoped_release release;
    if (model == "msis") {
      runs = repeat_experiment(c.model, c.loss, c.train, data, c.train.seeds, c.scope);
    } else {
      const auto kind = parse_baseline(model);
      if (!kind) throw ConfigError("model: unknown learner '" + model + "'");
      runs = repeat_baseline(*kind, c.model, c.baseline, c.loss, c.train, data, c.train.seeds, c.scope);
    }
  }
  py::list out;
  for (const RunResult& r : runs) {
    py::dict d;
    d["seed"] = r.seed;
    d["best_epoch"] = r.best_epoch;
    d["auc"] = metrics_dict(r.metrics);
    out.append(d);
  }
  return out;
}

py::dict gradcheck(const std::string& config_json, std::uint64_t seed, std::size_t batch_size, double step,
                   double tol) {
  const ExperimentConfig c = parse_config(config_json);
  const ExperimentData data = prepare_experiment(generate(c.sim));
  const Batch batch = mixed_batch(data.split.train, batch_size, seed);
  const GradCheckReport r = msis_gradcheck(c.model, c.loss, batch, seed, step, tol);
  py::dict out;
  out["worst_relative_error"] = r.worst_relative_error;
  out["worst_name"] = r.worst_name;
  out["worst_index"] = r.worst_index;
  out["checked"] = r.checked;
  out["passed"] = r.passed;
  return out;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"msis"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  py::print(out.str(), py::arg("end") = "");
  py::print(err.str(), py::arg("end") = "", py::arg("file") = py::module_::import("sys").attr("stderr"));
  return code;
}

}  // namespace

PYBIND11_MODULE(_msis, m) {
  m.doc() = "Multi-stage credit risk model with a synthetic loan funnel";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UndefinedMetric>(m, "UndefinedMetric", PyExc_ValueError);

  m.def("default_config", [] { return to_json(ExperimentConfig{}).dump(); },
        "Default experiment configuration as JSON text.");
  m.def("normalize_config", [](const std::string& text) { return to_json(parse_config(text)).dump(); },
        py::arg("config_json"), "Validates a JSON config and fills in defaults.");
  m.def("target_names", &target_names);
  m.def(
      "auc",
      [](const std::vector<double>& scores, const std::vector<double>& labels) {
        if (scores.size() != labels.size()) throw ConfigError("auc: scores and labels differ in length");
        return auc(scores, labels);
      },
      py::arg("scores"), py::arg("labels"), "Rank AUC with average ranks for ties.");
  m.def("parameter_count",
        [](const std::string& text) { return parameter_count(parse_config(text).model); },
        py::arg("config_json") = "");
  m.def("simulate", &simulate, py::arg("config_json") = "",
        "Simulates the funnel. Unobserved labels are NaN in 'observed'.");
  m.def("run_model", &run_model, py::arg("config_json"), py::arg("model") = "msis");
  m.def("gradcheck", &gradcheck, py::arg("config_json") = "", py::arg("seed") = 1, py::arg("batch_size") = 64,
        py::arg("step") = 1e-8, py::arg("tol") = 1e-4);
  m.def("cli", &run_cli, py::arg("args"), "Runs one msis command; returns its exit status.");
}
