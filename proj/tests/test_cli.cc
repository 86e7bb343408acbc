#include <doctest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "poseconsist/io.h"

using namespace poseconsist;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "poseconsist_cli";

int run(const std::string& args) {
  fs::create_directories(kRoot);
  const std::string cmd = std::string(POSECONSIST_CLI) + " " + args + " >" + (kRoot / "stdout.txt").string() +
                          " 2>" + (kRoot / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& body) {
  fs::create_directories(kRoot);
  const fs::path p = kRoot / name;
  write_text(p, body);
  return p;
}

std::string small_config(const fs::path& out) {
  return R"({"scene": {"height": 24, "width": 32}, "trajectory": {"n_frames": 6},
             "objective": {"iterations": 2}, "seeds": [3], "output_dir": ")" +
         out.string() + "\"}";
}

}  // namespace

TEST_CASE("usage errors exit with 2") {
  fs::remove_all(kRoot);
  CHECK(run("") == 2);
  CHECK(run("frobnicate") == 2);
  CHECK(run("generate") == 2);
  CHECK(run("generate --config " + (kRoot / "absent.json").string()) == 2);
  const fs::path bad = write_config("bad.json", R"({"objective": {"lambda": -1}})");
  CHECK(run("generate --config " + bad.string()) == 2);
  CHECK(read_text(kRoot / "stderr.txt").find("objective.lambda") != std::string::npos);
  const fs::path ok = write_config("ok.json", small_config(kRoot / "out_usage"));
  CHECK(run("generate --config " + ok.string() + " --seeds x,1") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("missing inputs exit with 3") {
  const fs::path cfg = write_config("missing.json", small_config(kRoot / "out_missing"));
  CHECK(run("optimize --config " + cfg.string()) == 3);
  CHECK(read_text(kRoot / "stderr.txt").find("dataset") != std::string::npos);
  CHECK(run("generate --config " + cfg.string()) == 0);
  CHECK(run("eval-depth --config " + cfg.string()) == 3);
  CHECK(run("eval-pose --config " + cfg.string()) == 3);
  CHECK(run("report --config " + cfg.string()) == 3);
}

TEST_CASE("ground truth predictions evaluate to zero error") {
  const fs::path out = kRoot / "out_gt";
  const fs::path cfg = write_config("gt.json", small_config(out));
  REQUIRE(run("generate --config " + cfg.string()) == 0);
  const fs::path data = out / "seed_3" / "dataset";
  for (const char* v : {"baseline", "fb", "cyc"}) {
    const fs::path dir = out / "seed_3" / v;
    fs::create_directories(dir);
    for (int t = 0; t < 6; ++t) fs::copy_file(data / depth_name(t), dir / depth_name(t), fs::copy_options::overwrite_existing);
    fs::copy_file(data / "poses.txt", dir / "poses.txt", fs::copy_options::overwrite_existing);
  }
  REQUIRE(run("eval-depth --config " + cfg.string()) == 0);
  REQUIRE(run("eval-pose --config " + cfg.string()) == 0);
  const CsvTable m = read_csv(out / "seed_3" / "fb" / "metrics.csv");
  REQUIRE(m.rows.size() == 3);
  for (const auto& row : m.rows) {
    CHECK(std::stod(row[m.column("abs_rel")]) == 0.0);
    CHECK(std::stod(row[m.column("delta1")]) == 1.0);
    CHECK(std::stod(row[m.column("cov")]) == 0.0);
  }
  const CsvTable a = read_csv(out / "seed_3" / "cyc" / "ate.csv");
  CHECK(std::stod(a.rows[0][a.column("ate_mean")]) < 1e-9);
  CHECK(a.rows[0][a.column("n_windows")] == "2");
}

TEST_CASE("full pipeline is reproducible") {
  const fs::path out = kRoot / "out_pipeline";
  const fs::path cfg = write_config("pipeline.json", small_config(out));
  for (const char* c : {"generate", "optimize", "eval-depth", "eval-pose", "report"}) {
    REQUIRE(run(std::string(c) + " --config " + cfg.string()) == 0);
  }
  const CsvTable summary = read_csv(out / "summary.csv");
  CHECK(summary.rows.size() == 3);
  const CsvTable report = read_csv(out / "report.csv");
  CHECK(report.rows.size() == 6);
  const std::string manifest = read_text(out / "manifest.json");
  CHECK(manifest.find("config_hash") != std::string::npos);
  CHECK(manifest.find("cov_reduction_bar") != std::string::npos);

  const std::string trace = read_text(out / "seed_3" / "cyc" / "trace.csv");
  const std::string rep = read_text(out / "report.csv");
  REQUIRE(run("optimize --config " + cfg.string()) == 0);
  REQUIRE(run("report --config " + cfg.string()) == 0);
  CHECK(read_text(out / "seed_3" / "cyc" / "trace.csv") == trace);
  CHECK(read_text(out / "report.csv") == rep);

  // --out and --seeds override the config.
  const fs::path other = kRoot / "out_override";
  CHECK(run("generate --config " + cfg.string() + " --out " + other.string() + " --seeds 4") == 0);
  CHECK(fs::exists(other / "seed_4" / "dataset" / "poses.txt"));
}
