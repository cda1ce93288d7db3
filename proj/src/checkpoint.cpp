#include "msis/checkpoint.hpp"

#include <fstream>

#include "msis/config_io.hpp"

namespace msis {

namespace {

constexpr const char* kFormat = "msis-checkpoint/1";

void check_structure(const ParamStore& expected, const ParamStore& loaded) {
  for (const auto& [name, p] : expected) {
    if (!loaded.contains(name)) throw ConfigError("checkpoint: missing parameter " + name);
    const Tensor2D& v = loaded.at(name).value;
    if (!v.same_shape(p.value)) {
      throw ConfigError("checkpoint: parameter " + name + " has shape " + v.shape_string() + ", expected " +
                        p.value.shape_string());
    }
  }
  for (const auto& [name, p] : loaded) {
    if (!expected.contains(name)) throw ConfigError("checkpoint: unexpected parameter " + name);
  }
}

}  // namespace

Learner checkpoint_learner(const Checkpoint& ckpt) {
  if (ckpt.kind == "msis") return msis_learner(ckpt.model);
  const auto kind = parse_baseline(ckpt.kind);
  if (!kind) throw ConfigError("checkpoint: unknown learner kind '" + ckpt.kind + "'");
  return baseline_learner(*kind, ckpt.targets, ckpt.model, ckpt.baseline);
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  Json targets = Json::array();
  for (Target t : ckpt.targets) targets.push_back(std::string(target_name(t)));
  Json params = Json::array();
  for (const auto& [name, p] : ckpt.params) {
    const auto v = p.value.values();
    params.push_back(Json{{"name", name},
                          {"shape", {p.value.rows(), p.value.cols()}},
                          {"values", std::vector<double>(v.begin(), v.end())}});
  }
  const Json j{{"format", kFormat},
               {"kind", ckpt.kind},
               {"targets", targets},
               {"model", to_json(ckpt.model)},
               {"baseline", to_json(ckpt.baseline)},
               {"init_seed", ckpt.params.seed()},
               {"params", params}};
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump() << "\n";
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != kFormat) throw ParseError(path.string() + ": not an msis checkpoint");
    Checkpoint c;
    c.kind = j.at("kind").get<std::string>();
    for (const auto& t : j.at("targets")) {
      const auto target = parse_target(t.get<std::string>());
      if (!target) throw ParseError(path.string() + ": unknown target " + t.get<std::string>());
      c.targets.push_back(*target);
    }
    c.model = model_from_json(j.at("model"));
    c.baseline = baseline_from_json(j.at("baseline"));
    c.params = ParamStore(j.at("init_seed").get<std::uint64_t>());
    for (const auto& p : j.at("params")) {
      const auto rows = p.at("shape").at(0).get<std::size_t>();
      const auto cols = p.at("shape").at(1).get<std::size_t>();
      auto values = p.at("values").get<std::vector<double>>();
      if (values.size() != rows * cols) {
        throw ParseError(path.string() + ": value count of " + p.at("name").get<std::string>() +
                         " does not match its shape");
      }
      c.params.add(p.at("name").get<std::string>(), Tensor2D(rows, cols, std::move(values)));
    }
    check_structure(checkpoint_learner(c).init(0), c.params);
    return c;
  } catch (const Json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace msis
