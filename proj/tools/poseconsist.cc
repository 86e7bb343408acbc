#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>

#include "poseconsist/commands.h"
#include "poseconsist/config.h"
#include "poseconsist/errors.h"

using namespace poseconsist;

namespace {

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (item.empty() || item.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("--seeds: expected comma-separated non-negative integers, got '" + text + "'");
    }
    try {
      seeds.push_back(std::stoull(item));
    } catch (const std::out_of_range&) {
      throw UsageError("--seeds: value out of range: " + item);
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return seeds;
}

void apply_thread_cap() {
  const char* env = std::getenv("POSECONSIST_THREADS");
  if (!env || !*env) return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 0) throw UsageError("POSECONSIST_THREADS must be a non-negative integer");
  if (n > 0) omp_set_num_threads(static_cast<int>(n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pose-consistency experiments on synthetic sequences"};
  app.require_subcommand(1, 1);
  std::string config_path;
  std::string out_dir;
  std::string seeds;

  struct Command {
    const char* name;
    const char* help;
    std::vector<std::filesystem::path> (*run)(const ExperimentConfig&);
  };
  const Command commands[] = {
      {"generate", "Render the synthetic dataset for every seed", cmd_generate},
      {"optimize", "Optimize every configured variant on the datasets", cmd_optimize},
      {"eval-depth", "Depth metrics and scale series for every variant", cmd_eval_depth},
      {"eval-pose", "5-frame snippet ATE for every variant", cmd_eval_pose},
      {"report", "Merge per-seed results into report.csv and summary.csv", cmd_report},
  };
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "Experiment configuration (JSON)")->required();
    sub->add_option("--out", out_dir, "Output directory (overrides the config)");
    sub->add_option("--seeds", seeds, "Comma-separated seeds (overrides the config)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    apply_thread_cap();
    ExperimentConfig cfg = parse_config(config_path);
    if (!out_dir.empty()) cfg.output_dir = out_dir;
    if (!seeds.empty()) cfg.seeds = parse_seeds(seeds);
    for (const auto& c : commands) {
      if (app.got_subcommand(c.name)) {
        const auto files = c.run(cfg);
        std::printf("%s: wrote %zu files under %s\n", c.name, files.size(), cfg.output_dir.c_str());
      }
    }
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
