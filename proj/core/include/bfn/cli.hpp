#ifndef BFN_CLI_HPP
#define BFN_CLI_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "bfn/continual.hpp"
#include "bfn/data.hpp"
#include "bfn/eval.hpp"
#include "bfn/serialize.hpp"

namespace bfn {

// Invalid input (config, paths, file formats) maps to exit code 2;
// runtime failures map to exit code 1.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetConfig {
  std::string source;  // "synthetic_mixture" | "idx" | "csv"
  std::string image_path;
  std::string label_path;
  double binarize_threshold = 0.5;
  int downscale_side = 14;
  std::string csv_path;
  std::vector<ColumnSpec> columns;
  std::size_t n_rows = 2000;
  std::vector<MixtureMode> modes;
  std::vector<double> weights;
  SplitSpec split;
};

struct EvalBlock {
  ClassifierProbe::Kind probe = ClassifierProbe::Kind::NearestCentroid;
  std::size_t samples_per_measurement = 1000;
  int mc_samples = 16;
  int sample_steps = 100;
  std::size_t max_eval_rows = 0;  // 0 = all test rows
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  DatasetConfig dataset;
  AccuracySchedule schedule = AccuracySchedule::continuous(0.02, 20);
  std::vector<int> hidden_widths = {256, 256};
  Activation activation = Activation::Silu;
  TimeEmbedding time_embedding = {TimeEmbedding::Kind::Sinusoidal, 8};
  TrainingConfig training;
  StrategyConfig strategy;
  EvalBlock eval;
  json resolved;  // config with all defaults filled in
};

ExperimentConfig load_config(const std::string& path);

Dataset build_dataset(const ExperimentConfig& cfg);

int cmd_run_scenario(const std::string& config_path,
                     std::optional<std::uint64_t> seed_override = {},
                     std::optional<std::string> out_override = {});

// Single-task training: the whole dataset is one task.
int cmd_train(const std::string& config_path,
              std::optional<std::uint64_t> seed_override = {},
              std::optional<std::string> out_override = {});

int cmd_generate(const std::string& checkpoint_path, std::size_t count,
                 const std::string& out_path, std::uint64_t seed,
                 int sample_steps = 100);

int cmd_evaluate(const std::string& checkpoint_path,
                 const std::string& config_path,
                 std::optional<std::string> out_override = {});

// Melts a metrics JSON file into long-format CSV (record, measure, index,
// value) for external plotting.
int cmd_export_plots(const std::string& metrics_json_path,
                     const std::string& out_csv_path);

// Deterministic float formatting shared by all CSV writers.
std::string format_double(double v);

void write_file_atomic(const std::string& path, const std::string& content);

std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace bfn

#endif
