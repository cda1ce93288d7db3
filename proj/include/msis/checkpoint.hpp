#pragma once

// Model checkpoints: the learner description (kind, targets, architecture)
// followed by every parameter as a (name, shape, values) triple.

#include <filesystem>
#include <string>
#include <vector>

#include "msis/baselines.hpp"
#include "msis/model.hpp"

namespace msis {

struct Checkpoint {
  /// "msis" or a baseline name.
  std::string kind = "msis";
  std::vector<Target> targets;
  MsisConfig model;
  BaselineConfig baseline;
  ParamStore params;
};

/// The learner a checkpoint describes; throws ConfigError on an unknown kind.
Learner checkpoint_learner(const Checkpoint& ckpt);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Parses a checkpoint and checks its parameters against the structure its
/// learner expects: every expected name present with the same shape, no
/// extra names. Throws ParseError on malformed files and ConfigError on
/// mismatches.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace msis
