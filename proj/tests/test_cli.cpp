#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "bfn/checkpoint.hpp"
#include "bfn/cli.hpp"

using namespace bfn;
namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small, fast end-to-end configuration: two tight 1-D modes, two tasks.
std::string tiny_config(const std::string& out_dir) {
  json j;
  j["seed"] = 11;
  j["out_dir"] = out_dir;
  j["dataset"] = {
      {"source", "synthetic_mixture"},
      {"n_rows", 80},
      {"modes", json::array({json{{"mean", {-0.5}}, {"stdev", 0.05}},
                             json{{"mean", {0.5}}, {"stdev", 0.05}}})},
      {"weights", {0.5, 0.5}},
      {"split", {{"mode", "class_incremental"}, {"classes_per_task", 1},
                 {"test_fraction", 0.25}}},
  };
  j["schedule"] = {{"kind", "continuous"}, {"sigma1", 0.1}, {"n_steps", 8}};
  j["network"] = {{"hidden", {8}},
                  {"activation", "silu"},
                  {"time_embedding", {{"kind", "scalar-concat"}}}};
  j["optimizer"] = {{"kind", "adam"}, {"lr", 1e-3}, {"steps_per_task", 10},
                    {"batch_size", 8}};
  j["loss"] = {{"kind", "continuous_time"}};
  j["eval"] = {{"probe", "nearest_centroid"},
               {"samples_per_measurement", 20},
               {"mc_samples", 2},
               {"sample_steps", 10},
               {"max_eval_rows", 5}};
  return j.dump(2);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::path("cli_test") / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str(const std::string& leaf = "") const {
    return leaf.empty() ? path.string() : (path / leaf).string();
  }
};

}  // namespace

TEST_CASE("run-scenario produces the full artifact set") {
  TempDir dir("scenario");
  const std::string cfg_path = dir.str("cfg.json");
  write_file_atomic(cfg_path, tiny_config(dir.str("out")));

  CHECK(cmd_run_scenario(cfg_path) == 0);
  CHECK(fs::exists(dir.str("out/metrics.csv")));
  CHECK(fs::exists(dir.str("out/metrics.json")));
  CHECK(fs::exists(dir.str("out/manifest.json")));
  CHECK(fs::exists(dir.str("out/task_0.ckpt")));
  CHECK(fs::exists(dir.str("out/task_1.ckpt")));
  CHECK(fs::exists(dir.str("out/samples_task_0.csv")));
  CHECK(fs::exists(dir.str("out/samples_task_1.csv")));

  // One metrics row per task boundary, plus the header.
  std::istringstream csv(read_file(dir.str("out/metrics.csv")));
  std::string line;
  int lines = 0;
  while (std::getline(csv, line)) ++lines;
  CHECK(lines == 3);

  const json metrics = json::parse(read_file(dir.str("out/metrics.json")));
  CHECK(metrics.at("records").size() == 2);
  CHECK(metrics.at("forgetting").at("per_task").size() == 2);

  // Manifest checksums match the files on disk.
  const json manifest = json::parse(read_file(dir.str("out/manifest.json")));
  for (const auto& [name, sum] : manifest.at("artifacts").items()) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(
                      fnv1a64(read_file(dir.str("out/" + name)))));
    CHECK(sum.get<std::string>() == buf);
  }

  // Reruns with the same config are byte-identical.
  const std::string first = read_file(dir.str("out/metrics.csv"));
  CHECK(cmd_run_scenario(cfg_path) == 0);
  CHECK(read_file(dir.str("out/metrics.csv")) == first);

  // Seed override changes the metrics.
  CHECK(cmd_run_scenario(cfg_path, 12345) == 0);
  CHECK(read_file(dir.str("out/metrics.csv")) != first);

  SUBCASE("export-plots melts the metrics") {
    CHECK(cmd_run_scenario(cfg_path) == 0);
    CHECK(cmd_export_plots(dir.str("out/metrics.json"),
                           dir.str("out/plots.csv")) == 0);
    const std::string plots = read_file(dir.str("out/plots.csv"));
    CHECK(plots.rfind("after_task,measure,index,value\n", 0) == 0);
    CHECK(plots.find(",share,") != std::string::npos);
    CHECK(plots.find(",bpd,") != std::string::npos);
    CHECK(plots.find("-1,forgetting,0,") != std::string::npos);
    CHECK(cmd_export_plots(dir.str("out/nope.json"), dir.str("out/p.csv")) ==
          2);
  }
}

TEST_CASE("generate is deterministic and honours count") {
  TempDir dir("generate");
  const std::string cfg_path = dir.str("cfg.json");
  write_file_atomic(cfg_path, tiny_config(dir.str("out")));
  REQUIRE(cmd_run_scenario(cfg_path) == 0);
  const std::string ckpt = dir.str("out/task_1.ckpt");

  CHECK(cmd_generate(ckpt, 0, dir.str("empty.csv"), 1, 10) == 0);
  std::istringstream empty(read_file(dir.str("empty.csv")));
  std::string line;
  int lines = 0;
  while (std::getline(empty, line)) ++lines;
  CHECK(lines == 1);  // header only

  CHECK(cmd_generate(ckpt, 5, dir.str("a.csv"), 777, 10) == 0);
  CHECK(cmd_generate(ckpt, 5, dir.str("b.csv"), 777, 10) == 0);
  CHECK(read_file(dir.str("a.csv")) == read_file(dir.str("b.csv")));
  CHECK(cmd_generate(ckpt, 5, dir.str("c.csv"), 778, 10) == 0);
  CHECK(read_file(dir.str("a.csv")) != read_file(dir.str("c.csv")));

  std::istringstream a(read_file(dir.str("a.csv")));
  lines = 0;
  while (std::getline(a, line)) ++lines;
  CHECK(lines == 6);

  // Corrupted checkpoint magic -> invalid input.
  std::string bytes = read_file(ckpt);
  bytes[0] = 'X';
  write_file_atomic(dir.str("bad.ckpt"), bytes);
  CHECK(cmd_generate(dir.str("bad.ckpt"), 1, dir.str("d.csv"), 1, 10) == 2);
  CHECK(cmd_generate(dir.str("missing.ckpt"), 1, dir.str("d.csv"), 1, 10) == 2);
}

TEST_CASE("evaluate reports one loss entry per task") {
  TempDir dir("evaluate");
  const std::string cfg_path = dir.str("cfg.json");
  write_file_atomic(cfg_path, tiny_config(dir.str("out")));
  REQUIRE(cmd_run_scenario(cfg_path) == 0);

  CHECK(cmd_evaluate(dir.str("out/task_1.ckpt"), cfg_path,
                     dir.str("eval_out")) == 0);
  const json out = json::parse(read_file(dir.str("eval_out/evaluation.json")));
  CHECK(out.at("after_task") == 1);
  CHECK(out.at("loss_matrix_row").size() == 2);
  CHECK(out.at("class_shares").size() == 2);
  CHECK(out.at("probe_holdout_accuracy").get<double>() > 0.9);
}

TEST_CASE("invalid configs map to exit code 2") {
  TempDir dir("errors");
  CHECK(cmd_run_scenario(dir.str("missing.json")) == 2);

  write_file_atomic(dir.str("broken.json"), "{not json");
  CHECK(cmd_run_scenario(dir.str("broken.json")) == 2);

  json j = json::parse(tiny_config(dir.str("out")));
  j["dataset"] = {{"source", "csv"},
                  {"path", dir.str("no_such.csv")},
                  {"columns", json::array({json{{"name", "x"},
                                                {"kind", "continuous"}}})}};
  write_file_atomic(dir.str("missing_data.json"), j.dump());
  CHECK(cmd_run_scenario(dir.str("missing_data.json")) == 2);

  json bad = json::parse(tiny_config(dir.str("out")));
  bad["strategy"] = {{"kind", "regularize"}, {"p", 3}, {"lambda", 0.1}};
  write_file_atomic(dir.str("bad_strategy.json"), bad.dump());
  CHECK(cmd_run_scenario(dir.str("bad_strategy.json")) == 2);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 123456.789}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
