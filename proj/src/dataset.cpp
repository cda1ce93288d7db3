#include "msis/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "msis/autodiff.hpp"

namespace msis {

namespace {

void append_double(std::string& out, double v) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, end);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

template <typename T>
T parse_number(std::string_view field, const std::filesystem::path& path, std::size_t line,
               const char* what) {
  T v{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    fail(path, line, std::string("non-numeric ") + what + " '" + std::string(field) + "'");
  }
  return v;
}

std::optional<bool> parse_label(std::string_view field, const std::filesystem::path& path,
                                std::size_t line) {
  if (field.empty()) return std::nullopt;
  if (field == "0") return false;
  if (field == "1") return true;
  fail(path, line, "label must be 0, 1 or empty, got '" + std::string(field) + "'");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

constexpr std::string_view kCounterfactualHeader =
    "id,z,draw_day,default_term,cf_credit,cf_draw_30,cf_draw_90,cf_mob1,cf_mob3,cf_mob6";

}  // namespace

std::size_t feature_dim(const Examples& examples) {
  return examples.empty() ? 0 : examples.front().features.size();
}

void save_csv(const Examples& examples, const std::filesystem::path& path) {
  const std::size_t d = feature_dim(examples);
  std::string text = "id,timestamp";
  for (std::size_t j = 0; j < d; ++j) text += ",f" + std::to_string(j);
  for (Target t : kAllTargets) text += ",label_" + std::string(target_name(t));
  text += '\n';
  for (const Example& e : examples) {
    if (e.features.size() != d) throw DimensionError("save_csv: ragged feature vectors");
    text += std::to_string(e.id);
    text += ',';
    text += std::to_string(e.timestamp);
    for (double v : e.features) {
      text += ',';
      append_double(text, v);
    }
    for (const auto& l : e.labels) {
      text += ',';
      if (l) text += *l ? '1' : '0';
    }
    text += '\n';
  }
  auto out = open_output(path);
  out << text;
}

Examples load_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "missing header");
  strip_cr(line);
  const auto header = split_fields(line);
  if (header.size() < 2 + kNumTargets || header[0] != "id" || header[1] != "timestamp") {
    fail(path, 1, "header must start with id,timestamp and end with the six label columns");
  }
  const std::size_t d = header.size() - 2 - kNumTargets;
  for (std::size_t j = 0; j < d; ++j) {
    if (header[2 + j] != "f" + std::to_string(j)) {
      fail(path, 1, "expected column f" + std::to_string(j) + ", got '" + std::string(header[2 + j]) + "'");
    }
  }
  for (std::size_t k = 0; k < kNumTargets; ++k) {
    const std::string expected = "label_" + std::string(target_name(kAllTargets[k]));
    if (header[2 + d + k] != expected) fail(path, 1, "missing column " + expected);
  }

  Examples examples;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      fail(path, lineno, "expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(fields.size()));
    }
    Example e;
    e.id = parse_number<std::int64_t>(fields[0], path, lineno, "id");
    e.timestamp = parse_number<int>(fields[1], path, lineno, "timestamp");
    e.features.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      e.features[j] = parse_number<double>(fields[2 + j], path, lineno, "feature");
    }
    for (std::size_t k = 0; k < kNumTargets; ++k) e.labels[k] = parse_label(fields[2 + d + k], path, lineno);
    if (!e.labels[index_of(Target::kCredit)]) fail(path, lineno, "label_credit is absent");
    examples.push_back(std::move(e));
  }
  return examples;
}

void save_counterfactual_csv(std::span<const Counterfactual> rows, const std::filesystem::path& path) {
  std::string text(kCounterfactualHeader);
  text += '\n';
  for (const Counterfactual& c : rows) {
    text += std::to_string(c.id);
    text += ',';
    append_double(text, c.quality);
    text += ',';
    if (c.draw_day) text += std::to_string(*c.draw_day);
    text += ',';
    if (c.default_term) text += std::to_string(*c.default_term);
    for (bool l : c.labels) {
      text += ',';
      text += l ? '1' : '0';
    }
    text += '\n';
  }
  auto out = open_output(path);
  out << text;
}

std::vector<Counterfactual> load_counterfactual_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line)) fail(path, 1, "missing header");
  strip_cr(line);
  if (line != kCounterfactualHeader) fail(path, 1, "unexpected counterfactual header");
  std::vector<Counterfactual> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 4 + kNumTargets) fail(path, lineno, "expected 10 fields");
    Counterfactual c;
    c.id = parse_number<std::int64_t>(f[0], path, lineno, "id");
    c.quality = parse_number<double>(f[1], path, lineno, "z");
    if (!f[2].empty()) c.draw_day = parse_number<int>(f[2], path, lineno, "draw_day");
    if (!f[3].empty()) c.default_term = parse_number<int>(f[3], path, lineno, "default_term");
    for (std::size_t k = 0; k < kNumTargets; ++k) {
      const auto l = parse_label(f[4 + k], path, lineno);
      if (!l) fail(path, lineno, "counterfactual labels are never absent");
      c.labels[k] = *l;
    }
    rows.push_back(c);
  }
  return rows;
}

CounterfactualTable index_counterfactuals(std::span<const Counterfactual> rows) {
  CounterfactualTable table;
  table.reserve(rows.size());
  for (const Counterfactual& c : rows) table.emplace(c.id, c);
  return table;
}

Split split_oot(const Examples& examples, int cutoff_timestamp, std::uint64_t seed) {
  Split split;
  Examples pre;
  for (const Example& e : examples) {
    (e.timestamp >= cutoff_timestamp ? split.test : pre).push_back(e);
  }
  if (split.test.empty()) throw ConfigError("split_oot: no examples at or after the cutoff");
  std::vector<std::size_t> order(pre.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t n_val = pre.size() / 5;
  const std::size_t n_train = pre.size() - n_val;
  if (n_train == 0) throw ConfigError("split_oot: no training examples before the cutoff");
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_train ? split.train : split.validation).push_back(std::move(pre[order[i]]));
  }
  return split;
}

Standardizer Standardizer::fit(const Examples& train) {
  if (train.empty()) throw ConfigError("Standardizer::fit: empty training set");
  const std::size_t d = feature_dim(train);
  Standardizer s;
  s.mean_.assign(d, 0.0);
  s.std_.assign(d, 0.0);
  for (const Example& e : train) {
    for (std::size_t j = 0; j < d; ++j) s.mean_[j] += e.features[j];
  }
  const double n = static_cast<double>(train.size());
  for (double& m : s.mean_) m /= n;
  for (const Example& e : train) {
    for (std::size_t j = 0; j < d; ++j) {
      const double c = e.features[j] - s.mean_[j];
      s.std_[j] += c * c;
    }
  }
  for (double& v : s.std_) v = std::max(std::sqrt(v / n), kStdFloor);
  return s;
}

void Standardizer::apply(Examples& examples) const {
  for (Example& e : examples) {
    if (e.features.size() != mean_.size()) {
      throw DimensionError("Standardizer: feature width " + std::to_string(e.features.size()) +
                           " vs fitted " + std::to_string(mean_.size()));
    }
    for (std::size_t j = 0; j < mean_.size(); ++j) e.features[j] = (e.features[j] - mean_[j]) / std_[j];
  }
}

double Batch::label(Target t, std::size_t row) const {
  if (masks[index_of(t)].at(row) == 0.0) {
    throw ContractError("unobserved label " + std::string(target_name(t)) + " read at row " +
                        std::to_string(row));
  }
  return labels[index_of(t)][row];
}

Batch make_batch(const Examples& examples, std::span<const std::size_t> rows) {
  const std::size_t d = feature_dim(examples);
  Batch b;
  b.features = Tensor2D(rows.size(), d);
  b.ids.reserve(rows.size());
  for (auto& l : b.labels) l.assign(rows.size(), label_poison());
  for (auto& m : b.masks) m.assign(rows.size(), 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Example& e = examples[rows[i]];
    if (e.features.size() != d) throw DimensionError("make_batch: ragged feature vectors");
    std::copy(e.features.begin(), e.features.end(), &b.features(i, 0));
    b.ids.push_back(e.id);
    for (std::size_t k = 0; k < kNumTargets; ++k) {
      if (e.labels[k]) {
        b.labels[k][i] = *e.labels[k] ? 1.0 : 0.0;
        b.masks[k][i] = 1.0;
      }
    }
  }
  return b;
}

Batch make_batch(const Examples& examples) {
  std::vector<std::size_t> rows(examples.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return make_batch(examples, rows);
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(epoch >> 32)};
  std::mt19937_64 rng(seq);
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

std::vector<Batch> batches(const Examples& examples, std::size_t batch_size, std::uint64_t seed,
                           std::uint64_t epoch) {
  if (batch_size == 0) throw ConfigError("batch_size must be >= 1");
  const auto order = epoch_order(examples.size(), seed, epoch);
  std::vector<Batch> out;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t len = std::min(batch_size, order.size() - start);
    out.push_back(make_batch(examples, std::span<const std::size_t>(order).subspan(start, len)));
  }
  return out;
}

}  // namespace msis
