#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "poseconsist/evaluation.h"
#include "poseconsist/objective.h"
#include "poseconsist/synthetic_world.h"

namespace poseconsist {

struct NoiseParams {
  double pose_std = 0.01;   // per twist component
  double scale_std = 0.1;   // per-frame log-scale
};

// One optimization run per seed: which constraints are enabled.
struct Variant {
  std::string name;  // "baseline", "fb", "cyc", "id", or a '+'-joined combination
  bool fb = false;
  bool id = false;
  bool cyc = false;
  bool operator==(const Variant&) const = default;
};

// Throws UsageError on an unknown constraint name.
Variant parse_variant(const std::string& name);

struct EvaluationParams {
  DepthEvalOptions depth;
  int snippet = 5;
  // Required relative reduction of the median CoV against the baseline.
  double cov_reduction_bar = 0.2;
};

struct ExperimentConfig {
  std::string name = "default";
  SceneParams scene;
  RenderOptions render;
  TrajectoryParams trajectory;
  NoiseParams noise;
  ObjectiveConfig objective;
  std::vector<Variant> variants;
  EvaluationParams evaluation;
  std::vector<std::uint64_t> seeds;
  std::string output_dir = "out";

  ExperimentConfig();
  // Objective configuration for one variant.
  ObjectiveConfig variant_objective(const Variant& v) const;
  bool operator==(const ExperimentConfig& o) const;
};

// Strict JSON parsing: unknown keys, wrong types and invariant violations
// throw UsageError with the dotted path of the field, e.g. "objective.lambda".
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config(const std::string& path);
// Pretty-printed JSON containing every field.
std::string serialize_config(const ExperimentConfig& cfg);
// FNV-1a of the serialized config, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace poseconsist
