#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "poseconsist/config.h"

namespace poseconsist {

// Output layout under cfg.output_dir:
//   seed_<s>/dataset/                  generate
//   seed_<s>/<variant>/trace.csv ...   optimize
//   seed_<s>/<variant>/metrics.csv     eval-depth (plus scales.csv)
//   seed_<s>/<variant>/ate.csv         eval-pose (plus ate_windows.csv)
//   report.csv, summary.csv, scale_curves/seed_<s>.csv   report
//   manifest.json                      every command
std::filesystem::path seed_dir(const ExperimentConfig& cfg, std::uint64_t seed);
std::filesystem::path dataset_dir(const ExperimentConfig& cfg, std::uint64_t seed);
std::filesystem::path variant_dir(const ExperimentConfig& cfg, std::uint64_t seed, const Variant& v);

// Each command returns the files it wrote and records them, with its
// wall-clock time, in manifest.json. Missing inputs throw DataError.
std::vector<std::filesystem::path> cmd_generate(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_optimize(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_eval_depth(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_eval_pose(const ExperimentConfig& cfg);
std::vector<std::filesystem::path> cmd_report(const ExperimentConfig& cfg);

inline constexpr const char* kToolVersion = "1.0.0";

}  // namespace poseconsist
