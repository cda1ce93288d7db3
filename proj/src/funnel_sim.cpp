#include "msis/funnel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace msis {

namespace {

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(a),    static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b),    static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void normalize(std::vector<double>& v) {
  const double n = std::sqrt(dot(v, v));
  for (double& x : v) x /= n;
}

/// Random unit vector orthogonal to every vector in `basis` (Gram-Schmidt).
std::vector<double> random_direction(std::mt19937_64& rng, std::size_t d,
                                     const std::vector<std::vector<double>>& basis) {
  std::normal_distribution<double> normal;
  std::vector<double> v(d);
  for (double& x : v) x = normal(rng);
  for (const auto& b : basis) {
    const double p = dot(v, b);
    for (std::size_t i = 0; i < d; ++i) v[i] -= p * b[i];
  }
  normalize(v);
  return v;
}

std::vector<double> mix(double a, const std::vector<double>& u, double b, const std::vector<double>& v) {
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = a * u[i] + b * v[i];
  return out;
}

struct Directions {
  std::vector<double> quality;
  std::vector<double> platform;
  std::vector<double> draw;
};

Directions make_directions(const SimConfig& c) {
  auto rng = stream(c.seed, 0xD1EC7105ULL, 0);
  const auto u = random_direction(rng, c.feature_dim, {});
  const auto v = random_direction(rng, c.feature_dim, {u});
  const auto w = random_direction(rng, c.feature_dim, {u, v});
  const double rho = c.policy_alignment;
  const double lam = c.draw_quality_loading;
  Directions dirs;
  dirs.quality = mix(c.quality_signal, u, 0.0, u);
  dirs.platform = mix(c.platform_signal * rho, u, c.platform_signal * std::sqrt(1.0 - rho * rho), v);
  dirs.draw = mix(-c.draw_signal * lam, u, c.draw_signal * std::sqrt(1.0 - lam * lam), w);
  return dirs;
}

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw ConfigError("sim." + field + ": " + why);
}

}  // namespace

void SimConfig::validate() const {
  if (n == 0) invalid("n", "must be positive");
  if (feature_dim < 2) invalid("feature_dim", "must be at least 2");
  if (!(acceptance_rate > 0.0 && acceptance_rate < 1.0)) invalid("acceptance_rate", "must lie in (0,1)");
  if (!(policy_alignment >= 0.0 && policy_alignment <= 1.0)) invalid("policy_alignment", "must lie in [0,1]");
  if (n_terms < 6) invalid("n_terms", "must be at least 6 (mob6 label)");
  if (!(oot_fraction > 0.0 && oot_fraction < 1.0)) invalid("oot_fraction", "must lie in (0,1)");
  if (!(draw_quality_loading >= -1.0 && draw_quality_loading <= 1.0)) {
    invalid("draw_quality_loading", "must lie in [-1,1]");
  }
  if (!(hazard_slope > 0.0)) invalid("hazard_slope", "must be positive");
  if (quality_noise < 0.0 || platform_noise < 0.0) invalid("noise", "must be non-negative");
  if (!(noise_correlation >= -1.0 && noise_correlation <= 1.0)) invalid("noise_correlation", "must lie in [-1,1]");
  if (!std::isfinite(drift_shift)) invalid("drift_shift", "must be finite");
}

Counterfactual PopulationRecord::counterfactual() const {
  return Counterfactual{id, quality, draw_day, default_term, labels};
}

std::vector<Counterfactual> Population::counterfactuals() const {
  std::vector<Counterfactual> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.counterfactual());
  return out;
}

int oot_cutoff(const SimConfig& config) {
  return static_cast<int>(std::lround((1.0 - config.oot_fraction) * kSimulationDays));
}

Population generate(const SimConfig& config) {
  config.validate();
  const Directions dirs = make_directions(config);
  const std::size_t d = config.feature_dim;

  Population pop;
  pop.config = config;
  pop.cutoff_timestamp = oot_cutoff(config);
  pop.records.resize(config.n);

  for (std::size_t i = 0; i < config.n; ++i) {
    PopulationRecord& r = pop.records[i];
    r.id = static_cast<std::int64_t>(i);
    r.timestamp = static_cast<int>((i * kSimulationDays) / config.n);

    auto rng = stream(config.seed, i, 1);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> uniform;

    r.features.resize(d);
    for (double& x : r.features) x = normal(rng);
    if (r.timestamp >= pop.cutoff_timestamp) {
      for (std::size_t j = 0; j < d / 2; ++j) r.features[j] += config.drift_shift;
    }
    const double quality_noise = normal(rng);
    const double platform_noise = config.noise_correlation * quality_noise +
                                  std::sqrt(1.0 - config.noise_correlation * config.noise_correlation) * normal(rng);
    r.quality = sigmoid(dot(dirs.quality, r.features) + config.quality_noise * quality_noise);
    r.platform_score = sigmoid(dot(dirs.platform, r.features) + config.platform_noise * platform_noise);

    const double q = sigmoid(dot(dirs.draw, r.features) + config.draw_intercept);
    const double u_draw = 1.0 - uniform(rng);
    const double draw = 1.0 + std::floor(std::log(u_draw) / std::log1p(-q));
    if (draw <= kDrawObservationDays) r.draw_day = static_cast<int>(draw);

    const double hazard = sigmoid(config.hazard_intercept - config.hazard_slope * r.quality);
    for (std::size_t k = 1; k <= config.n_terms; ++k) {
      const double u = uniform(rng);
      if (!r.default_term && u < hazard) r.default_term = static_cast<int>(k);
    }
  }

  std::vector<double> pre_scores;
  for (const auto& r : pop.records) {
    if (r.timestamp < pop.cutoff_timestamp) pre_scores.push_back(r.platform_score);
  }
  if (pre_scores.empty()) throw ConfigError("sim: no records before the OOT cutoff");
  const auto n_accept = static_cast<std::size_t>(
      std::max<long>(1, std::lround(config.acceptance_rate * static_cast<double>(pre_scores.size()))));
  std::nth_element(pre_scores.begin(), pre_scores.begin() + (n_accept - 1), pre_scores.end(),
                   std::greater<>());
  pop.acceptance_threshold = pre_scores[n_accept - 1];

  for (auto& r : pop.records) {
    auto& l = r.labels;
    l[index_of(Target::kCredit)] = r.platform_score >= pop.acceptance_threshold;
    l[index_of(Target::kDraw30)] = r.draw_day && *r.draw_day <= kShortDrawWindow;
    l[index_of(Target::kDraw90)] = r.draw_day && *r.draw_day <= kLongDrawWindow;
    l[index_of(Target::kMob1)] = r.default_term && *r.default_term <= 1;
    l[index_of(Target::kMob3)] = r.default_term && *r.default_term <= 3;
    l[index_of(Target::kMob6)] = r.default_term && *r.default_term <= 6;
  }
  return pop;
}

Examples observe(const Population& population) {
  Examples out;
  out.reserve(population.records.size());
  for (const auto& r : population.records) {
    Example e;
    e.id = r.id;
    e.timestamp = r.timestamp;
    e.features = r.features;
    const bool accepted = r.labels[index_of(Target::kCredit)];
    const bool drew = r.labels[index_of(Target::kDraw90)];
    for (Target t : kAllTargets) {
      const bool visible = stage_of(t) == Stage::kAR || (stage_of(t) == Stage::kWS && accepted) ||
                           (stage_of(t) == Stage::kGB && accepted && drew);
      if (visible) e.labels[index_of(t)] = r.labels[index_of(t)];
    }
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace msis
