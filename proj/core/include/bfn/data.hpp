#ifndef BFN_DATA_HPP
#define BFN_DATA_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bfn/bfn.hpp"
#include "bfn/rng.hpp"

namespace bfn {

// Per-column encoding info for tabular data; used to invert generated rows.
struct ColumnCodec {
  std::string name;
  VarKind kind = VarKind::Continuous;
  double lo = 0.0;  // numeric
  double hi = 0.0;
  std::vector<std::string> vocab;  // categorical; index K-1 is "<unknown>"
};

struct Dataset {
  std::vector<Row> rows;
  DataSchema schema;
  std::vector<int> labels;          // empty when absent
  std::vector<ColumnCodec> codecs;  // tabular only
  std::size_t dropped_rows = 0;     // rows removed for missing values
};

struct ColumnSpec {
  std::string name;
  VarKind kind = VarKind::Continuous;
};

// IDX image/label pair; pixels scaled to [0,1], optionally average-pooled to
// downscale_side, then binarized at threshold into categorical K=2 variables.
Dataset load_idx_images(const std::string& image_path,
                        const std::string& label_path, double threshold,
                        int downscale_side = 0);

// CSV with header. Numerics are affinely mapped to [-1,1] by column min/max;
// categoricals integer-coded against a persisted vocabulary with a trailing
// unknown slot. Rows with missing values are dropped and counted.
Dataset load_csv_tabular(const std::string& path,
                         const std::vector<ColumnSpec>& columns);

// Maps a raw column value through an existing codec (unknown categories go
// to the reserved slot).
double encode_value(const ColumnCodec& codec, const std::string& raw);
std::string decode_value(const ColumnCodec& codec, double encoded);

struct MixtureMode {
  std::vector<double> mean;
  double stdev = 0.0;
};

Dataset synthetic_mixture(std::size_t n_rows,
                          const std::vector<MixtureMode>& modes,
                          const std::vector<double>& weights, Rng& rng);

struct SplitSpec {
  enum class Mode { ClassIncremental, Attribute };
  Mode mode = Mode::ClassIncremental;
  int classes_per_task = 1;
  std::string attribute_column;
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

struct Task {
  std::string id;
  std::vector<Row> train_rows;
  std::vector<Row> test_rows;
  std::vector<int> train_labels;
  std::vector<int> test_labels;
};

struct TaskStream {
  DataSchema schema;
  std::vector<Task> tasks;
};

TaskStream split_tasks(const Dataset& dataset, const SplitSpec& spec);

}  // namespace bfn

#endif
