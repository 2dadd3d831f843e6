#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <optional>
#include <thread>

#include "eyectl/config.hpp"
#include "eyectl/error.hpp"
#include "eyectl/features.hpp"
#include "eyectl/geometry.hpp"
#include "eyectl/harness.hpp"
#include "eyectl/matching.hpp"
#include "eyectl/synth.hpp"

namespace fs = std::filesystem;
using namespace eyectl;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitData = 2;
constexpr int kExitUsage = 64;
constexpr int kExitIo = 74;

struct ConfigFlags {
  std::optional<std::string> ratio, min_matches, cutout_scale, detector, matcher, seed, config;

  void attach(CLI::App* app) {
    app->add_option("--ratio", ratio, "ratio-test threshold in (0, 1]");
    app->add_option("--min-matches", min_matches, "matches required before a message is sent");
    app->add_option("--cutout-scale", cutout_scale, "pictogram cutout enlargement (>= 1)");
    app->add_option("--detector", detector, "orb | akaze");
    app->add_option("--matcher", matcher, "bf | approx");
    app->add_option("--seed", seed, "seed for k-means and the approximate index");
    app->add_option("--config", config, "key=value configuration file; flags override it");
  }

  PipelineConfig resolve() const {
    PipelineConfig cfg = config ? load_config(*config) : PipelineConfig{};
    auto apply = [&](const std::optional<std::string>& v, const char* key) {
      if (v) apply_setting(cfg, key, *v);
    };
    apply(ratio, "ratio");
    apply(min_matches, "min_matches");
    apply(cutout_scale, "cutout_scale");
    apply(detector, "detector");
    apply(matcher, "matcher");
    apply(seed, "seed");
    cfg.validate();
    return cfg;
  }
};

int cmd_run(const std::vector<std::string>& dirs, const PipelineConfig& cfg, int jobs, const std::optional<std::string>& out) {
  struct Job {
    fs::path dir;
    fs::path out;
    RunResult result;
    std::string name;
    std::optional<int> exit_code;
    std::string error;
  };
  std::vector<Job> work;
  for (const auto& d : dirs) {
    Job j;
    j.dir = d;
    j.out = out ? (dirs.size() > 1 ? fs::path(*out) / fs::path(d).filename() : fs::path(*out)) : fs::path(d);
    work.push_back(std::move(j));
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < work.size(); i = next++) {
      auto& j = work[i];
      try {
        const Scenario s = load_scenario(j.dir);
        j.name = s.name;
        j.result = run_scenario(s, cfg);
        write_run_outputs(j.out, s.name, j.result);
        j.exit_code = kExitOk;
      } catch (const IoError& e) {
        j.exit_code = kExitIo;
        j.error = e.what();
      } catch (const ScenarioError& e) {
        j.exit_code = kExitData;
        j.error = e.what();
        if (e.frame() >= 0) j.error += " (frame " + std::to_string(e.frame()) + ")";
      } catch (const Error& e) {
        j.exit_code = kExitData;
        j.error = e.what();
      }
    }
  };
  const int n = std::clamp(jobs, 1, static_cast<int>(work.size()));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int code = kExitOk;
  std::vector<std::pair<std::string, Metrics>> rows;
  for (const auto& j : work) {
    if (*j.exit_code != kExitOk) {
      std::cerr << "eyectl run: " << j.dir.string() << ": " << j.error << '\n';
      code = std::max(code, *j.exit_code);
      continue;
    }
    const auto& m = j.result.metrics;
    std::printf("%s: %zu measurements, %zu sent, success %s, mean %.1f ms\n", j.name.c_str(), m.total_measurements,
                m.messages_sent,
                m.task_selection_success_rate ? std::to_string(*m.task_selection_success_rate).c_str() : "undefined",
                m.mean_selection_time_ms);
    rows.emplace_back(j.name, m);
  }
  if (out && dirs.size() > 1 && !rows.empty()) write_metrics_csv(fs::path(*out) / "summary.csv", rows);
  return code;
}

int cmd_calib_check(const std::string& path) {
  const CameraRig rig = load_calibration(path);
  const CalibrationReport rep = check_calibration(rig);
  std::printf("rotation: orthonormal, det +1\ndepth_scale: %.9g m/unit\nround trip: %zu pixels, max error %.3e px\n",
              rig.depth_scale, rep.samples, rep.max_roundtrip_px);
  if (rep.max_roundtrip_px >= 1e-6) {
    std::fprintf(stderr, "eyectl calib-check: round-trip error %.3e px exceeds 1e-6 px\n", rep.max_roundtrip_px);
    return kExitData;
  }
  return kExitOk;
}

int cmd_viz(const std::string& query, const std::string& train, const PipelineConfig& cfg, const std::string& out,
            const std::optional<std::string>& dump_dir) {
  const GrayImage a = load_gray(query);
  const GrayImage b = load_gray(train);
  const FeatureSet fa = detect_features(a, cfg.detector);
  const FeatureSet fb = detect_features(b, cfg.detector);
  const auto matches = match_and_filter(fa, fb, cfg);
  save_image(out, render_matches(a, fa.keypoints, b, fb.keypoints, matches));
  if (dump_dir) {
    fs::create_directories(*dump_dir);
    dump_features(fs::path(*dump_dir) / "query_features.jsonl", fa);
    dump_features(fs::path(*dump_dir) / "train_features.jsonl", fb);
    write_matches_csv(fs::path(*dump_dir) / "matches.csv", matches);
  }
  std::printf("%zu / %zu keypoints, %zu matches\n", fa.size(), fb.size(), matches.size());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaze-driven object selection: scenario replay, generation, benchmarking and checks"};
  app.require_subcommand(1, 1);

  ConfigFlags flags;
  int jobs = 1;
  std::optional<std::string> out;

  auto* run = app.add_subcommand("run", "replay scenario directories and write metrics");
  std::vector<std::string> run_dirs;
  run->add_option("scenarios", run_dirs, "scenario directories")->required();
  flags.attach(run);
  run->add_option("--jobs", jobs, "scenarios processed in parallel")->check(CLI::PositiveNumber);
  run->add_option("--out", out, "output directory (default: the scenario directory)");

  auto* gen = app.add_subcommand("gen", "generate a synthetic scenario or the benchmark corpus");
  std::string gen_kind;
  std::optional<std::string> gen_dir;
  std::uint64_t gen_seed = 0;
  int measurements = 100;
  gen->add_option("kind", gen_kind, "case1 | case2 | case3-joint | case3-disjoint | corpus")->required();
  gen->add_option("dir", gen_dir, "output directory");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--measurements", measurements, "scripted selections")->check(CLI::PositiveNumber);
  gen->add_option("--out", out, "output directory");

  auto* bench = app.add_subcommand("bench", "time every detector x matcher pair on a corpus");
  std::string corpus;
  int reps = 3;
  bench->add_option("corpus", corpus, "corpus directory")->required();
  bench->add_option("--repetitions", reps, "timed runs per item (median kept)")->check(CLI::PositiveNumber);
  flags.attach(bench);
  bench->add_option("--out", out, "output directory for bench.csv");

  auto* viz = app.add_subcommand("viz", "draw filtered matches between two images");
  std::string viz_query, viz_train;
  std::optional<std::string> dump_dir;
  viz->add_option("query", viz_query, "query image")->required();
  viz->add_option("train", viz_train, "train image")->required();
  flags.attach(viz);
  viz->add_option("--out", out, "output image (default matches.png)");
  viz->add_option("--dump", dump_dir, "also write keypoints (JSON-lines) and matches (CSV) here");

  auto* calib = app.add_subcommand("calib-check", "validate a camera rig and report its round-trip error");
  std::string calib_path;
  calib->add_option("calib", calib_path, "calibration JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*run) return cmd_run(run_dirs, flags.resolve(), jobs, out);
    if (*gen) {
      const auto dir = gen_dir ? *gen_dir : out;
      if (!dir) throw ConfigError("out", 0, "gen needs an output directory");
      if (gen_kind == "corpus") {
        generate_corpus(*dir, gen_seed);
      } else {
        save_scenario(generate_su_case(parse_su_case(gen_kind), gen_seed, measurements), *dir);
      }
      return kExitOk;
    }
    if (*bench) {
      const PipelineConfig cfg = flags.resolve();
      if (!fs::is_directory(corpus)) throw IoError("corpus directory not found: " + corpus);
      const auto rows = bench_detectors(corpus, cfg, reps);
      const fs::path dir = out ? fs::path(*out) : fs::path(".");
      fs::create_directories(dir);
      write_bench_csv(dir / "bench.csv", rows);
      for (const auto& r : rows) {
        std::printf("%-12s total %.3f s  matches %.1f\n", bench_label(r.detector, r.matcher).c_str(), r.total_s_mean,
                    r.matches_mean);
      }
      return kExitOk;
    }
    if (*viz) return cmd_viz(viz_query, viz_train, flags.resolve(), out ? *out : "matches.png", dump_dir);
    if (*calib) return cmd_calib_check(calib_path);
  } catch (const ConfigError& e) {
    std::cerr << "eyectl: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "eyectl: " << e.what() << '\n';
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "eyectl: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "eyectl: " << e.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
