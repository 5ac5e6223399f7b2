#include "bfn/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "bfn/checkpoint.hpp"

namespace bfn {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + path);
  }
  fs::rename(tmp, path);
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

StrategyConfig parse_strategy(const json& j) {
  StrategyConfig s;
  const std::string kind = j.value("kind", "finetune");
  if (kind == "finetune") {
    s.kind = StrategyConfig::Kind::Finetune;
  } else if (kind == "regularize") {
    s.kind = StrategyConfig::Kind::Regularize;
    s.norm_order = j.value("p", 2);
    s.lambda = j.at("lambda").get<double>();
  } else if (kind == "buffer") {
    s.kind = StrategyConfig::Kind::Buffer;
    s.capacity = j.value("capacity", std::size_t{500});
    const std::string policy = j.value("policy", "reservoir");
    if (policy == "ring") {
      s.policy = StrategyConfig::BufferPolicy::Ring;
    } else if (policy == "reservoir") {
      s.policy = StrategyConfig::BufferPolicy::Reservoir;
    } else {
      throw std::invalid_argument("unknown buffer policy: " + policy);
    }
    s.replay_fraction = j.value("replay_fraction", 0.5);
  } else if (kind == "generative_replay") {
    s.kind = StrategyConfig::Kind::GenerativeReplay;
    s.replay_fraction = j.value("replay_fraction", 0.5);
    s.generator_steps = j.value("generator_steps", 100);
  } else {
    throw std::invalid_argument("unknown strategy kind: " + kind);
  }
  s.validate();
  return s;
}

json strategy_to_json(const StrategyConfig& s) {
  switch (s.kind) {
    case StrategyConfig::Kind::Finetune:
      return json{{"kind", "finetune"}};
    case StrategyConfig::Kind::Regularize:
      return json{{"kind", "regularize"}, {"p", s.norm_order},
                  {"lambda", s.lambda}};
    case StrategyConfig::Kind::Buffer:
      return json{{"kind", "buffer"},
                  {"capacity", s.capacity},
                  {"policy", s.policy == StrategyConfig::BufferPolicy::Ring
                                 ? "ring"
                                 : "reservoir"},
                  {"replay_fraction", s.replay_fraction}};
    case StrategyConfig::Kind::GenerativeReplay:
      return json{{"kind", "generative_replay"},
                  {"replay_fraction", s.replay_fraction},
                  {"generator_steps", s.generator_steps}};
  }
  return {};
}

ExperimentConfig parse_config(const json& j) {
  ExperimentConfig cfg;
  cfg.seed = j.value("seed", std::uint64_t{0});
  cfg.out_dir = j.value("out_dir", std::string("out"));

  const json& d = j.at("dataset");
  cfg.dataset.source = d.at("source").get<std::string>();
  if (cfg.dataset.source == "idx") {
    cfg.dataset.image_path = d.at("images").get<std::string>();
    cfg.dataset.label_path = d.value("labels", std::string{});
    cfg.dataset.binarize_threshold = d.value("threshold", 0.5);
    cfg.dataset.downscale_side = d.value("downscale", 14);
    if (!fs::exists(cfg.dataset.image_path)) {
      throw std::invalid_argument("dataset file not found: " +
                                  cfg.dataset.image_path);
    }
    if (!cfg.dataset.label_path.empty() &&
        !fs::exists(cfg.dataset.label_path)) {
      throw std::invalid_argument("dataset file not found: " +
                                  cfg.dataset.label_path);
    }
  } else if (cfg.dataset.source == "csv") {
    cfg.dataset.csv_path = d.at("path").get<std::string>();
    if (!fs::exists(cfg.dataset.csv_path)) {
      throw std::invalid_argument("dataset file not found: " +
                                  cfg.dataset.csv_path);
    }
    for (const json& col : d.at("columns")) {
      ColumnSpec spec;
      spec.name = col.at("name").get<std::string>();
      const std::string kind = col.at("kind").get<std::string>();
      if (kind == "continuous" || kind == "numeric") {
        spec.kind = VarKind::Continuous;
      } else if (kind == "categorical") {
        spec.kind = VarKind::Categorical;
      } else {
        throw std::invalid_argument("unknown column kind: " + kind);
      }
      cfg.dataset.columns.push_back(std::move(spec));
    }
  } else if (cfg.dataset.source == "synthetic_mixture") {
    cfg.dataset.n_rows = d.value("n_rows", std::size_t{2000});
    for (const json& m : d.at("modes")) {
      MixtureMode mode;
      mode.mean = m.at("mean").get<std::vector<double>>();
      mode.stdev = m.at("stdev").get<double>();
      cfg.dataset.modes.push_back(std::move(mode));
    }
    cfg.dataset.weights = d.at("weights").get<std::vector<double>>();
  } else {
    throw std::invalid_argument("unknown dataset source: " + cfg.dataset.source);
  }

  const json split = d.value("split", json::object());
  const std::string mode = split.value("mode", "class_incremental");
  if (mode == "class_incremental") {
    cfg.dataset.split.mode = SplitSpec::Mode::ClassIncremental;
    cfg.dataset.split.classes_per_task = split.value("classes_per_task", 1);
  } else if (mode == "attribute") {
    cfg.dataset.split.mode = SplitSpec::Mode::Attribute;
    cfg.dataset.split.attribute_column =
        split.at("column").get<std::string>();
  } else {
    throw std::invalid_argument("unknown split mode: " + mode);
  }
  cfg.dataset.split.test_fraction = split.value("test_fraction", 0.2);
  cfg.dataset.split.seed = split.value("seed", cfg.seed);

  if (j.contains("schedule")) {
    cfg.schedule = j.at("schedule").get<AccuracySchedule>();
  }

  const json net = j.value("network", json::object());
  cfg.hidden_widths = net.value("hidden", std::vector<int>{256, 256});
  const std::string act = net.value("activation", "silu");
  if (act == "tanh") {
    cfg.activation = Activation::Tanh;
  } else if (act == "relu") {
    cfg.activation = Activation::Relu;
  } else if (act == "silu") {
    cfg.activation = Activation::Silu;
  } else {
    throw std::invalid_argument("unknown activation: " + act);
  }
  const json emb = net.value("time_embedding", json::object());
  const std::string emb_kind = emb.value("kind", "sinusoidal");
  if (emb_kind == "scalar-concat") {
    cfg.time_embedding = {TimeEmbedding::Kind::ScalarConcat, 0};
  } else if (emb_kind == "sinusoidal") {
    cfg.time_embedding = {TimeEmbedding::Kind::Sinusoidal,
                          emb.value("frequencies", 8)};
  } else {
    throw std::invalid_argument("unknown time embedding: " + emb_kind);
  }

  const json opt = j.value("optimizer", json::object());
  const std::string opt_kind = opt.value("kind", "adam");
  if (opt_kind == "adam") {
    cfg.training.optimizer = OptimizerState::Kind::Adam;
  } else if (opt_kind == "sgd") {
    cfg.training.optimizer = OptimizerState::Kind::Sgd;
  } else {
    throw std::invalid_argument("unknown optimizer: " + opt_kind);
  }
  cfg.training.learning_rate = opt.value("lr", 1e-3);
  cfg.training.steps_per_task = opt.value("steps_per_task", 2000);
  cfg.training.batch_size = opt.value("batch_size", std::size_t{32});

  const json loss = j.value("loss", json::object());
  const std::string loss_kind = loss.value("kind", "discrete");
  if (loss_kind == "discrete") {
    cfg.training.loss_kind = LossKind::DiscreteTime;
  } else if (loss_kind == "continuous_time") {
    cfg.training.loss_kind = LossKind::ContinuousTime;
  } else {
    throw std::invalid_argument("unknown loss kind: " + loss_kind);
  }
  cfg.training.mc_samples = loss.value("mc_samples", 1);
  cfg.training.t_samples = loss.value("t_samples", 1);

  if (j.contains("strategy")) {
    cfg.strategy = parse_strategy(j.at("strategy"));
  }

  const json ev = j.value("eval", json::object());
  const std::string probe = ev.value("probe", "nearest_centroid");
  if (probe == "nearest_centroid") {
    cfg.eval.probe = ClassifierProbe::Kind::NearestCentroid;
  } else if (probe == "mlp_probe") {
    cfg.eval.probe = ClassifierProbe::Kind::MlpProbe;
  } else {
    throw std::invalid_argument("unknown probe kind: " + probe);
  }
  cfg.eval.samples_per_measurement =
      ev.value("samples_per_measurement", std::size_t{1000});
  cfg.eval.mc_samples = ev.value("mc_samples", 16);
  cfg.eval.sample_steps = ev.value("sample_steps", 100);
  cfg.eval.max_eval_rows = ev.value("max_eval_rows", std::size_t{0});

  // Resolved config with every default made explicit.
  json r;
  r["seed"] = cfg.seed;
  r["out_dir"] = cfg.out_dir;
  json rd = d;
  rd["split"] =
      json{{"mode", mode},
           {"classes_per_task", cfg.dataset.split.classes_per_task},
           {"column", cfg.dataset.split.attribute_column},
           {"test_fraction", cfg.dataset.split.test_fraction},
           {"seed", cfg.dataset.split.seed}};
  r["dataset"] = rd;
  r["schedule"] = cfg.schedule;
  r["network"] = json{
      {"hidden", cfg.hidden_widths},
      {"activation", act},
      {"time_embedding",
       json{{"kind", emb_kind},
            {"frequencies", cfg.time_embedding.frequencies}}}};
  r["optimizer"] = json{{"kind", opt_kind},
                        {"lr", cfg.training.learning_rate},
                        {"steps_per_task", cfg.training.steps_per_task},
                        {"batch_size", cfg.training.batch_size}};
  r["loss"] = json{{"kind", loss_kind},
                   {"mc_samples", cfg.training.mc_samples},
                   {"t_samples", cfg.training.t_samples}};
  r["strategy"] = strategy_to_json(cfg.strategy);
  r["eval"] = json{
      {"probe", probe},
      {"samples_per_measurement", cfg.eval.samples_per_measurement},
      {"mc_samples", cfg.eval.mc_samples},
      {"sample_steps", cfg.eval.sample_steps},
      {"max_eval_rows", cfg.eval.max_eval_rows}};
  cfg.resolved = std::move(r);
  return cfg;
}

std::string rows_to_csv(const std::vector<Row>& rows,
                        const std::vector<ColumnCodec>& codecs,
                        std::size_t width) {
  std::ostringstream out;
  for (std::size_t c = 0; c < width; ++c) {
    if (c > 0) out << ",";
    out << (c < codecs.size() ? codecs[c].name : "v" + std::to_string(c));
  }
  out << "\n";
  for (const Row& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c > 0) out << ",";
      if (c < codecs.size()) {
        out << decode_value(codecs[c], row[c]);
      } else {
        out << format_double(row[c]);
      }
    }
    out << "\n";
  }
  return out.str();
}

struct RunArtifacts {
  std::vector<MetricsRecord> records;
  ForgettingSummary forgetting;
  std::vector<std::string> files;
};

void write_metrics(const std::string& out_dir, const json& resolved,
                   RunArtifacts& art) {
  // Flat CSV, one row per task boundary.
  std::ostringstream csv;
  const std::size_t n_shares =
      art.records.empty() ? 0 : art.records[0].class_shares.size();
  const std::size_t n_tasks =
      art.records.empty() ? 0 : art.records[0].loss_matrix_row.size();
  csv << "after_task";
  for (std::size_t c = 0; c < n_shares; ++c) csv << ",share_" << c;
  for (std::size_t t = 0; t < n_tasks; ++t) csv << ",bpd_task_" << t;
  csv << "\n";
  for (const MetricsRecord& rec : art.records) {
    csv << rec.after_task;
    for (double s : rec.class_shares) csv << "," << format_double(s);
    for (double b : rec.loss_matrix_row) csv << "," << format_double(b);
    csv << "\n";
  }
  const std::string csv_path = out_dir + "/metrics.csv";
  write_file_atomic(csv_path, csv.str());
  art.files.push_back(csv_path);

  json jm;
  jm["records"] = json::array();
  for (const MetricsRecord& rec : art.records) {
    jm["records"].push_back(json{{"after_task", rec.after_task},
                                 {"class_shares", rec.class_shares},
                                 {"loss_matrix_row", rec.loss_matrix_row}});
  }
  jm["forgetting"] = json{{"per_task", art.forgetting.per_task},
                          {"mean", art.forgetting.mean}};
  const std::string json_path = out_dir + "/metrics.json";
  write_file_atomic(json_path, jm.dump(2) + "\n");
  art.files.push_back(json_path);

  json manifest;
  manifest["config"] = resolved;
  json checksums = json::object();
  for (const std::string& f : art.files) {
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(read_file(f))));
    checksums[fs::path(f).filename().string()] = buf;
  }
  manifest["artifacts"] = checksums;
  write_file_atomic(out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

int run_experiment(const std::string& config_path,
                   std::optional<std::uint64_t> seed_override,
                   std::optional<std::string> out_override, bool single_task) {
  ExperimentConfig cfg = load_config(config_path);
  if (seed_override) {
    cfg.seed = *seed_override;
    cfg.resolved["seed"] = cfg.seed;
  }
  if (out_override) {
    cfg.out_dir = *out_override;
    cfg.resolved["out_dir"] = cfg.out_dir;
  }
  fs::create_directories(cfg.out_dir);

  const Dataset dataset = build_dataset(cfg);
  TaskStream stream;
  if (single_task) {
    stream.schema = dataset.schema;
    Task task;
    task.id = "all";
    std::vector<std::size_t> idx(dataset.rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    Rng shuffle_rng = make_rng(cfg.dataset.split.seed);
    std::shuffle(idx.begin(), idx.end(), shuffle_rng);
    const std::size_t n_test = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::lround(
               cfg.dataset.split.test_fraction *
               static_cast<double>(idx.size()))));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto& rows = i < n_test ? task.test_rows : task.train_rows;
      rows.push_back(dataset.rows[idx[i]]);
    }
    stream.tasks.push_back(std::move(task));
  } else {
    stream = split_tasks(dataset, cfg.dataset.split);
  }

  std::optional<ClassifierProbe> probe;
  if (!dataset.labels.empty()) {
    std::set<int> distinct(dataset.labels.begin(), dataset.labels.end());
    if (distinct.size() >= 2) {
      Rng probe_rng = make_rng(cfg.seed ^ 0x50524f4245ull);
      probe = train_probe(dataset, cfg.eval.probe, probe_rng);
    }
  }

  const NetworkSpec net_spec = spec_for_schema(
      dataset.schema, cfg.hidden_widths, cfg.activation, cfg.time_embedding);

  RunArtifacts art;
  std::vector<std::vector<double>> loss_matrix;

  EvalHook eval_hook = [&](int task_index, const MlpNet& net) {
    Rng eval_rng = make_rng(cfg.seed ^
                            (0x4556414cull + static_cast<std::uint64_t>(
                                                 task_index + 1) *
                                                 0x9e3779b97f4a7c15ull));
    MetricsRecord rec;
    rec.after_task = task_index;

    std::vector<Row> samples(cfg.eval.samples_per_measurement);
    SampleOptions opts;
    opts.n_steps = cfg.eval.sample_steps;
    for (auto& s : samples) {
      s = sample(net, cfg.schedule, dataset.schema, eval_rng, opts);
    }
    const std::string sample_path =
        cfg.out_dir + "/samples_task_" + std::to_string(task_index) + ".csv";
    write_file_atomic(sample_path, rows_to_csv(samples, dataset.codecs,
                                               dataset.schema.total_vars()));
    art.files.push_back(sample_path);

    if (probe && !samples.empty()) {
      rec.class_shares = class_shares(*probe, samples);
    }
    EvalConfig ec;
    ec.mc_samples = cfg.eval.mc_samples;
    ec.max_rows_per_task = cfg.eval.max_eval_rows;
    rec.loss_matrix_row =
        loss_matrix_row(net, stream, cfg.schedule, ec, eval_rng);
    loss_matrix.push_back(rec.loss_matrix_row);
    return rec;
  };

  CheckpointHook ckpt_hook = [&](int task_index, const MlpNet& net) {
    Checkpoint ckpt;
    ckpt.net_spec = net.spec();
    ckpt.schedule = cfg.schedule;
    ckpt.schema = dataset.schema;
    ckpt.task_index = task_index;
    ckpt.codecs = dataset.codecs;
    ckpt.params = net.params();
    const std::string path =
        cfg.out_dir + "/task_" + std::to_string(task_index) + ".ckpt";
    save_checkpoint(path, ckpt);
    art.files.push_back(path);
  };

  Rng rng = make_rng(cfg.seed);
  ScenarioResult result;
  try {
    result = run_scenario(stream, cfg.strategy, cfg.training, net_spec,
                          cfg.schedule, rng, eval_hook, ckpt_hook);
  } catch (...) {
    // Preserve partial outputs before surfacing the failure.
    art.records = {};
    if (!loss_matrix.empty()) write_metrics(cfg.out_dir, cfg.resolved, art);
    throw;
  }

  art.records = result.records;
  if (loss_matrix.size() >= 2) {
    art.forgetting = forgetting_summary(loss_matrix);
    if (!art.records.empty()) {
      art.records.back().forgetting = art.forgetting.per_task;
    }
  }
  write_metrics(cfg.out_dir, cfg.resolved, art);
  return 0;
}

template <typename Fn>
int guard(Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CheckpointError& e) {
    std::cerr << "checkpoint error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config parse failure: ") + e.what());
  }
  try {
    return parse_config(j);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config validation failure: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config validation failure: ") + e.what());
  }
}

Dataset build_dataset(const ExperimentConfig& cfg) {
  const DatasetConfig& d = cfg.dataset;
  if (d.source == "idx") {
    return load_idx_images(d.image_path, d.label_path, d.binarize_threshold,
                           d.downscale_side);
  }
  if (d.source == "csv") {
    return load_csv_tabular(d.csv_path, d.columns);
  }
  Rng rng = make_rng(cfg.seed ^ 0xDA7Aull);
  return synthetic_mixture(d.n_rows, d.modes, d.weights, rng);
}

int cmd_run_scenario(const std::string& config_path,
                     std::optional<std::uint64_t> seed_override,
                     std::optional<std::string> out_override) {
  return guard([&] {
    return run_experiment(config_path, seed_override, out_override, false);
  });
}

int cmd_train(const std::string& config_path,
              std::optional<std::uint64_t> seed_override,
              std::optional<std::string> out_override) {
  return guard([&] {
    return run_experiment(config_path, seed_override, out_override, true);
  });
}

int cmd_generate(const std::string& checkpoint_path, std::size_t count,
                 const std::string& out_path, std::uint64_t seed,
                 int sample_steps) {
  return guard([&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    MlpNet net(ckpt.net_spec, ckpt.params);
    Rng rng = make_rng(seed);
    SampleOptions opts;
    opts.n_steps = sample_steps;
    std::vector<Row> rows(count);
    for (auto& r : rows) {
      r = sample(net, ckpt.schedule, ckpt.schema, rng, opts);
    }
    write_file_atomic(out_path, rows_to_csv(rows, ckpt.codecs,
                                            ckpt.schema.total_vars()));
    return 0;
  });
}

int cmd_evaluate(const std::string& checkpoint_path,
                 const std::string& config_path,
                 std::optional<std::string> out_override) {
  return guard([&] {
    const Checkpoint ckpt = load_checkpoint(checkpoint_path);
    ExperimentConfig cfg = load_config(config_path);
    if (out_override) cfg.out_dir = *out_override;
    fs::create_directories(cfg.out_dir);

    const Dataset dataset = build_dataset(cfg);
    const TaskStream stream = split_tasks(dataset, cfg.dataset.split);
    MlpNet net(ckpt.net_spec, ckpt.params);

    Rng eval_rng = make_rng(cfg.seed ^ 0x4556414cull);
    EvalConfig ec;
    ec.mc_samples = cfg.eval.mc_samples;
    ec.max_rows_per_task = cfg.eval.max_eval_rows;
    const std::vector<double> row =
        loss_matrix_row(net, stream, cfg.schedule, ec, eval_rng);

    json out;
    out["after_task"] = ckpt.task_index;
    out["loss_matrix_row"] = row;

    if (!dataset.labels.empty()) {
      std::set<int> distinct(dataset.labels.begin(), dataset.labels.end());
      if (distinct.size() >= 2) {
        Rng probe_rng = make_rng(cfg.seed ^ 0x50524f4245ull);
        const ClassifierProbe probe =
            train_probe(dataset, cfg.eval.probe, probe_rng);
        std::vector<Row> samples(cfg.eval.samples_per_measurement);
        SampleOptions opts;
        opts.n_steps = cfg.eval.sample_steps;
        for (auto& s : samples) {
          s = sample(net, ckpt.schedule, ckpt.schema, eval_rng, opts);
        }
        out["class_shares"] = class_shares(probe, samples);
        out["probe_holdout_accuracy"] = probe.holdout_accuracy;
      }
    }
    const std::string out_path = cfg.out_dir + "/evaluation.json";
    write_file_atomic(out_path, out.dump(2) + "\n");
    std::cout << out.dump(2) << "\n";
    return 0;
  });
}

int cmd_export_plots(const std::string& metrics_json_path,
                     const std::string& out_csv_path) {
  return guard([&] {
    if (!fs::exists(metrics_json_path)) {
      throw ConfigError("metrics file not found: " + metrics_json_path);
    }
    json jm;
    try {
      jm = json::parse(read_file(metrics_json_path));
    } catch (const json::exception& e) {
      throw ConfigError(std::string("metrics parse failure: ") + e.what());
    }
    std::ostringstream csv;
    csv << "after_task,measure,index,value\n";
    for (const json& rec : jm.at("records")) {
      const int after = rec.at("after_task").get<int>();
      const auto shares = rec.value("class_shares", std::vector<double>{});
      for (std::size_t c = 0; c < shares.size(); ++c) {
        csv << after << ",share," << c << "," << format_double(shares[c])
            << "\n";
      }
      const auto row = rec.value("loss_matrix_row", std::vector<double>{});
      for (std::size_t t = 0; t < row.size(); ++t) {
        csv << after << ",bpd," << t << "," << format_double(row[t]) << "\n";
      }
    }
    if (jm.contains("forgetting")) {
      const auto per_task =
          jm["forgetting"].value("per_task", std::vector<double>{});
      for (std::size_t t = 0; t < per_task.size(); ++t) {
        csv << -1 << ",forgetting," << t << "," << format_double(per_task[t])
            << "\n";
      }
    }
    write_file_atomic(out_csv_path, csv.str());
    return 0;
  });
}

}  // namespace bfn
