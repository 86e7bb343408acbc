#include "poseconsist/commands.h"

#include <chrono>
#include <map>

#include <json.hpp>

#include "poseconsist/errors.h"
#include "poseconsist/experiment.h"
#include "poseconsist/format.h"
#include "poseconsist/io.h"

namespace poseconsist {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

std::string fmt(double v) { return format_double(v); }

std::vector<std::string> trace_header() {
  return {"iteration", "photometric", "smoothness", "fb", "id", "cyc", "total", "cov_scales"};
}

CsvTable trace_table(const OptimizeResult& r) {
  CsvTable t;
  t.header = trace_header();
  for (const auto& row : r.trace) {
    const LossBreakdown& l = row.loss;
    t.add({std::to_string(row.iteration), fmt(l.photometric), fmt(l.smoothness), fmt(l.fb), fmt(l.id),
           fmt(l.cyc), fmt(l.total), fmt(row.cov_scales)});
  }
  return t;
}

CsvTable twist_table(const std::vector<FramePair>& pairs, const std::vector<Twist>& twists) {
  CsvTable t;
  t.header = {"from", "to", "rx", "ry", "rz", "tx", "ty", "tz"};
  for (size_t i = 0; i < pairs.size(); ++i) {
    std::vector<std::string> row{std::to_string(pairs[i].from), std::to_string(pairs[i].to)};
    for (int k = 0; k < 6; ++k) row.push_back(fmt(twists[i][k]));
    t.add(std::move(row));
  }
  return t;
}

std::vector<std::string> key(const ExperimentConfig& cfg, std::uint64_t seed, const Variant& v) {
  return {cfg.name, std::to_string(seed), v.name};
}

std::vector<std::string> with_key(std::vector<std::string> k, const std::vector<std::string>& rest) {
  k.insert(k.end(), rest.begin(), rest.end());
  return k;
}

const std::vector<std::string> kKeyHeader = {"experiment", "seed", "config"};

void require_file(const fs::path& p, const std::string& hint) {
  if (!fs::exists(p)) throw DataError(p.string() + ": not found (" + hint + ")");
}

// Reads and merges manifest.json, then records the stage.
void record_stage(const ExperimentConfig& cfg, const std::string& stage, double seconds,
                  const std::vector<fs::path>& files) {
  const fs::path path = fs::path(cfg.output_dir) / "manifest.json";
  const std::string hash = config_hash(cfg);
  json m;
  if (fs::exists(path)) {
    try {
      m = json::parse(read_text(path));
    } catch (const json::exception&) {
      m = json();
    }
    if (!m.is_object() || m.value("config_hash", "") != hash) m = json();
  }
  m["tool"] = "poseconsist";
  m["tool_version"] = kToolVersion;
  m["config_hash"] = hash;
  m["experiment"] = cfg.name;
  m["cov_reduction_bar"] = cfg.evaluation.cov_reduction_bar;
  json list = json::array();
  for (const auto& f : files) list.push_back(fs::relative(f, cfg.output_dir).generic_string());
  m["stages"][stage] = {{"wall_clock_seconds", seconds}, {"files", list}};
  write_text(path, m.dump(2) + "\n");
}

template <typename F>
std::vector<fs::path> timed(const ExperimentConfig& cfg, const std::string& stage, F body) {
  const auto t0 = Clock::now();
  std::vector<fs::path> files = body();
  const double seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  record_stage(cfg, stage, seconds, files);
  return files;
}

}  // namespace

fs::path seed_dir(const ExperimentConfig& cfg, std::uint64_t seed) {
  return fs::path(cfg.output_dir) / ("seed_" + std::to_string(seed));
}

fs::path dataset_dir(const ExperimentConfig& cfg, std::uint64_t seed) { return seed_dir(cfg, seed) / "dataset"; }

fs::path variant_dir(const ExperimentConfig& cfg, std::uint64_t seed, const Variant& v) {
  return seed_dir(cfg, seed) / v.name;
}

std::vector<fs::path> cmd_generate(const ExperimentConfig& cfg) {
  return timed(cfg, "generate", [&] {
    std::vector<fs::path> files;
    for (auto seed : cfg.seeds) {
      const fs::path dir = dataset_dir(cfg, seed);
      const RenderedSequence seq = make_sequence(cfg, seed);
      write_dataset(dir, seq);
      for (int i = 0; i < seq.size(); ++i) {
        files.push_back(dir / frame_name(i, seq.frames[i].channels));
        files.push_back(dir / depth_name(i));
      }
      files.push_back(dir / "poses.txt");
      files.push_back(dir / "intrinsics.txt");
    }
    return files;
  });
}

std::vector<fs::path> cmd_optimize(const ExperimentConfig& cfg) {
  return timed(cfg, "optimize", [&] {
    std::vector<fs::path> files;
    for (auto seed : cfg.seeds) {
      const RenderedSequence seq = read_dataset(dataset_dir(cfg, seed));
      if (seq.size() < cfg.evaluation.snippet) {
        throw DataError(dataset_dir(cfg, seed).string() + ": fewer frames than the ATE snippet length");
      }
      for (const auto& v : cfg.variants) {
        const VariantOutcome o = run_variant(seq, cfg, v, seed);
        const fs::path dir = variant_dir(cfg, seed, v);
        fs::create_directories(dir);
        auto put = [&](const fs::path& p, const CsvTable& t) {
          write_csv(p, t);
          files.push_back(p);
        };
        put(dir / "trace.csv", trace_table(o.result));

        if (cfg.objective.regime == Regime::kDirect) {
          CsvTable ls;
          ls.header = {"frame", "log_scale"};
          for (size_t t = 0; t < o.params_a.log_scales.size(); ++t) {
            ls.add({std::to_string(t), fmt(o.params_a.log_scales[t])});
          }
          put(dir / "log_scales.csv", ls);
          put(dir / "twists.csv", twist_table(o.params_a.pairs, o.params_a.twists));
        } else {
          const RegressorProblem problem(seq, cfg.variant_objective(v));
          put(dir / "twists.csv", twist_table(problem.objective().pairs(),
                                              problem.pair_twists(o.params_b.regressor)));
          CsvTable reg;
          reg.header = {"output", "bias"};
          for (int j = 0; j < o.params_b.regressor.feature_dim; ++j) reg.header.push_back("w" + std::to_string(j));
          for (int k = 0; k < 6; ++k) {
            std::vector<std::string> row{std::to_string(k), fmt(o.params_b.regressor.bias[k])};
            for (int j = 0; j < o.params_b.regressor.feature_dim; ++j) {
              row.push_back(fmt(o.params_b.regressor.weights[static_cast<size_t>(k) * o.params_b.regressor.feature_dim + j]));
            }
            reg.add(std::move(row));
          }
          put(dir / "regressor.csv", reg);
        }

        CsvTable run;
        run.header = with_key(kKeyHeader, {"iterations_run", "diverged", "self_motion"});
        run.add(with_key(key(cfg, seed, v), {std::to_string(o.result.trace.size() - 1),
                                             o.result.diverged ? "1" : "0", fmt(o.self_motion)}));
        put(dir / "run.csv", run);

        for (int t = 0; t < seq.size(); ++t) {
          write_depth_pgm(dir / depth_name(t), o.prediction.depths[t]);
          files.push_back(dir / depth_name(t));
        }
        write_pose_file((dir / "poses.txt").string(), chain_poses(o.prediction.relative));
        files.push_back(dir / "poses.txt");
      }
    }
    return files;
  });
}

std::vector<fs::path> cmd_eval_depth(const ExperimentConfig& cfg) {
  return timed(cfg, "eval-depth", [&] {
    std::vector<fs::path> files;
    for (auto seed : cfg.seeds) {
      const RenderedSequence seq = read_dataset(dataset_dir(cfg, seed));
      std::vector<ValidityMask> valid;
      for (const auto& d : seq.gt_depths) valid.push_back(gt_validity(d));
      for (const auto& v : cfg.variants) {
        const fs::path dir = variant_dir(cfg, seed, v);
        require_file(dir / depth_name(0), "run optimize first");
        const std::vector<DepthMap> pred = read_depths(dir, seq.size());
        for (int t = 0; t < seq.size(); ++t) {
          if (!pred[t].same_shape(seq.gt_depths[t].height, seq.gt_depths[t].width)) {
            throw DataError((dir / depth_name(t)).string() + ": size differs from the ground truth");
          }
        }
        const ScaleSeries scales = scale_series(seq.gt_depths, pred, valid, cfg.evaluation.depth);

        CsvTable metrics;
        metrics.header = with_key(kKeyHeader, {"scaling", "abs_rel", "sq_rel", "rmse", "rmse_log",
                                               "delta1", "delta2", "delta3", "cov"});
        for (Scaling s : kAllScalings) {
          const DepthMetrics m = eigen_metrics(seq.gt_depths, pred, valid, s, cfg.evaluation.depth);
          metrics.add(with_key(key(cfg, seed, v),
                               {to_string(s), fmt(m.abs_rel), fmt(m.sq_rel), fmt(m.rmse), fmt(m.rmse_log),
                                fmt(m.delta1), fmt(m.delta2), fmt(m.delta3), fmt(scales.cov)}));
        }
        write_csv(dir / "metrics.csv", metrics);

        CsvTable series;
        series.header = with_key(kKeyHeader, {"frame", "scale"});
        for (size_t t = 0; t < scales.scales.size(); ++t) {
          series.add(with_key(key(cfg, seed, v), {std::to_string(t), fmt(scales.scales[t])}));
        }
        write_csv(dir / "scales.csv", series);
        files.push_back(dir / "metrics.csv");
        files.push_back(dir / "scales.csv");
      }
    }
    return files;
  });
}

std::vector<fs::path> cmd_eval_pose(const ExperimentConfig& cfg) {
  return timed(cfg, "eval-pose", [&] {
    std::vector<fs::path> files;
    for (auto seed : cfg.seeds) {
      const fs::path gt_path = dataset_dir(cfg, seed) / "poses.txt";
      require_file(gt_path, "run generate first");
      const auto gt = adjacent_relative(read_pose_file(gt_path.string()));
      for (const auto& v : cfg.variants) {
        const fs::path dir = variant_dir(cfg, seed, v);
        require_file(dir / "poses.txt", "run optimize first");
        const auto pred = adjacent_relative(read_pose_file((dir / "poses.txt").string()));
        if (pred.size() != gt.size()) {
          throw DataError((dir / "poses.txt").string() + ": pose count differs from " + gt_path.string());
        }
        const SnippetATE ate = snippet_ate(pred, gt, static_cast<int>(gt.size()) + 1, cfg.evaluation.snippet);

        CsvTable summary;
        summary.header = with_key(kKeyHeader, {"n_windows", "ate_mean", "ate_std"});
        summary.add(with_key(key(cfg, seed, v),
                             {std::to_string(ate.per_window.size()), fmt(ate.mean), fmt(ate.std)}));
        write_csv(dir / "ate.csv", summary);

        CsvTable windows;
        windows.header = with_key(kKeyHeader, {"window", "ate"});
        for (size_t w = 0; w < ate.per_window.size(); ++w) {
          windows.add(with_key(key(cfg, seed, v), {std::to_string(w), fmt(ate.per_window[w])}));
        }
        write_csv(dir / "ate_windows.csv", windows);
        files.push_back(dir / "ate.csv");
        files.push_back(dir / "ate_windows.csv");
      }
    }
    return files;
  });
}

std::vector<fs::path> cmd_report(const ExperimentConfig& cfg) {
  return timed(cfg, "report", [&] {
    const std::vector<std::string> value_cols = {
        "cov", "abs_rel_per_frame", "abs_rel_per_sequence", "abs_rel_none", "ate_mean", "ate_std",
        "self_motion", "final_photometric", "final_smoothness", "final_fb", "final_id", "final_cyc",
        "final_total", "diverged"};
    CsvTable report;
    report.header = with_key(kKeyHeader, value_cols);
    std::map<std::string, std::vector<std::vector<double>>> by_variant;
    std::vector<fs::path> files;

    for (auto seed : cfg.seeds) {
      CsvTable curves;
      curves.header = {"frame"};
      std::vector<std::vector<std::string>> curve_cols;
      for (const auto& v : cfg.variants) {
        const fs::path dir = variant_dir(cfg, seed, v);
        for (const char* f : {"metrics.csv", "scales.csv", "ate.csv", "trace.csv", "run.csv"}) {
          require_file(dir / f, "run optimize, eval-depth and eval-pose first");
        }
        const CsvTable metrics = read_csv(dir / "metrics.csv");
        const CsvTable ate = read_csv(dir / "ate.csv");
        const CsvTable trace = read_csv(dir / "trace.csv");
        const CsvTable run = read_csv(dir / "run.csv");
        const CsvTable scales = read_csv(dir / "scales.csv");
        if (metrics.rows.size() != kAllScalings.size() || ate.rows.size() != 1 || trace.rows.empty() ||
            run.rows.size() != 1) {
          throw DataError(dir.string() + ": unexpected row counts in the per-variant CSVs");
        }
        auto number = [&](const CsvTable& t, size_t row, const std::string& col, const fs::path& p) {
          const std::string& cell = t.rows[row][t.column(col)];
          try {
            size_t used = 0;
            const double x = std::stod(cell, &used);
            if (used != cell.size()) throw std::invalid_argument(cell);
            return x;
          } catch (const std::exception&) {
            throw DataError(p.string() + ": column " + col + " is not a number: '" + cell + "'");
          }
        };
        auto abs_rel = [&](Scaling s) {
          for (size_t r = 0; r < metrics.rows.size(); ++r) {
            if (metrics.rows[r][metrics.column("scaling")] == to_string(s)) {
              return number(metrics, r, "abs_rel", dir / "metrics.csv");
            }
          }
          throw DataError((dir / "metrics.csv").string() + ": no row for scaling " + to_string(s));
        };
        const size_t last = trace.rows.size() - 1;
        const fs::path tp = dir / "trace.csv";
        std::vector<double> values = {
            number(metrics, 0, "cov", dir / "metrics.csv"),
            abs_rel(Scaling::kPerFrameMedian),
            abs_rel(Scaling::kPerSequenceMedian),
            abs_rel(Scaling::kNone),
            number(ate, 0, "ate_mean", dir / "ate.csv"),
            number(ate, 0, "ate_std", dir / "ate.csv"),
            number(run, 0, "self_motion", dir / "run.csv"),
            number(trace, last, "photometric", tp),
            number(trace, last, "smoothness", tp),
            number(trace, last, "fb", tp),
            number(trace, last, "id", tp),
            number(trace, last, "cyc", tp),
            number(trace, last, "total", tp),
            number(run, 0, "diverged", dir / "run.csv"),
        };
        std::vector<std::string> cells;
        for (double x : values) cells.push_back(fmt(x));
        report.add(with_key(key(cfg, seed, v), cells));
        by_variant[v.name].push_back(values);

        curves.header.push_back(v.name);
        std::vector<std::string> col;
        for (const auto& r : scales.rows) col.push_back(r[scales.column("scale")]);
        curve_cols.push_back(std::move(col));
      }
      const size_t n_frames = curve_cols.empty() ? 0 : curve_cols.front().size();
      for (size_t t = 0; t < n_frames; ++t) {
        std::vector<std::string> row{std::to_string(t)};
        for (const auto& col : curve_cols) {
          if (col.size() != n_frames) throw DataError(seed_dir(cfg, seed).string() + ": scale series differ in length");
          row.push_back(col[t]);
        }
        curves.add(std::move(row));
      }
      const fs::path cp = fs::path(cfg.output_dir) / "scale_curves" / ("seed_" + std::to_string(seed) + ".csv");
      write_csv(cp, curves);
      files.push_back(cp);
    }

    // Median rows over seeds, then the headline comparison against baseline.
    CsvTable summary;
    summary.header = {"experiment", "config", "n_seeds", "median_cov", "median_ate", "median_self_motion",
                      "cov_reduction", "cov_reduction_bar", "meets_bar"};
    double base_cov = 0.0;
    bool have_base = false;
    if (auto it = by_variant.find("baseline"); it != by_variant.end()) {
      std::vector<double> c;
      for (const auto& r : it->second) c.push_back(r[0]);
      base_cov = median(c);
      have_base = true;
    }
    for (const auto& v : cfg.variants) {
      const auto& rows = by_variant[v.name];
      std::vector<std::string> cells;
      std::vector<double> med(value_cols.size());
      for (size_t c = 0; c < value_cols.size(); ++c) {
        std::vector<double> col;
        for (const auto& r : rows) col.push_back(r[c]);
        med[c] = median(col);
        cells.push_back(fmt(med[c]));
      }
      report.add(with_key({cfg.name, "median", v.name}, cells));

      const bool measurable = have_base && base_cov > 0.0 && v.name != "baseline";
      const double reduction = measurable ? 1.0 - med[0] / base_cov : 0.0;
      summary.add({cfg.name, v.name, std::to_string(rows.size()), fmt(med[0]), fmt(med[4]), fmt(med[6]),
                   measurable ? fmt(reduction) : "", fmt(cfg.evaluation.cov_reduction_bar),
                   measurable ? (reduction >= cfg.evaluation.cov_reduction_bar ? "1" : "0") : ""});
    }
    const fs::path rp = fs::path(cfg.output_dir) / "report.csv";
    const fs::path sp = fs::path(cfg.output_dir) / "summary.csv";
    write_csv(rp, report);
    write_csv(sp, summary);
    files.push_back(rp);
    files.push_back(sp);
    return files;
  });
}

}  // namespace poseconsist
