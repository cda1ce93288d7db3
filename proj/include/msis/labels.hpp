#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>

namespace msis {

/// Business stages of the loan funnel, in causal order.
enum class Stage { kAR = 0, kWS = 1, kGB = 2 };

/// The six label slots carried by every application.
enum class Target { kCredit = 0, kDraw30 = 1, kDraw90 = 2, kMob1 = 3, kMob3 = 4, kMob6 = 5 };

inline constexpr std::size_t kNumTargets = 6;
inline constexpr std::array<Target, kNumTargets> kAllTargets = {
    Target::kCredit, Target::kDraw30, Target::kDraw90, Target::kMob1, Target::kMob3, Target::kMob6};
inline constexpr std::array<Target, 3> kGbTargets = {Target::kMob1, Target::kMob3, Target::kMob6};

constexpr std::size_t index_of(Target t) { return static_cast<std::size_t>(t); }

constexpr Stage stage_of(Target t) {
  switch (t) {
    case Target::kCredit: return Stage::kAR;
    case Target::kDraw30:
    case Target::kDraw90: return Stage::kWS;
    default: return Stage::kGB;
  }
}

constexpr std::string_view target_name(Target t) {
  constexpr std::array<std::string_view, kNumTargets> names = {"credit", "draw_30", "draw_90",
                                                               "mob1",   "mob3",    "mob6"};
  return names[index_of(t)];
}

constexpr std::string_view stage_name(Stage s) {
  constexpr std::array<std::string_view, 3> names = {"ar", "ws", "gb"};
  return names[static_cast<std::size_t>(s)];
}

inline std::optional<Target> parse_target(std::string_view name) {
  for (Target t : kAllTargets) {
    if (target_name(t) == name) return t;
  }
  return std::nullopt;
}

inline std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : {Stage::kAR, Stage::kWS, Stage::kGB}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

}  // namespace msis
