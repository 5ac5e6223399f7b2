#include "bfn/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bfn {

namespace {

std::uint32_t read_be32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw std::runtime_error("idx: truncated header");
  return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
         (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
}

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

bool is_missing(const std::string& v) {
  return v.empty() || v == "NA" || v == "na" || v == "?";
}

bool all_numeric(const std::vector<std::string>& values) {
  for (const auto& v : values) {
    char* end = nullptr;
    std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') return false;
  }
  return true;
}

}  // namespace

Dataset load_idx_images(const std::string& image_path,
                        const std::string& label_path, double threshold,
                        int downscale_side) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("binarization threshold must lie in (0,1)");
  }
  std::ifstream img(image_path, std::ios::binary);
  if (!img) throw std::runtime_error("cannot open idx image file: " + image_path);
  const std::uint32_t magic = read_be32(img);
  if (magic != 0x00000803u) {
    throw std::runtime_error("idx: bad image magic");
  }
  const std::uint32_t count = read_be32(img);
  const std::uint32_t rows = read_be32(img);
  const std::uint32_t cols = read_be32(img);
  if (rows == 0 || cols == 0) throw std::runtime_error("idx: bad dimensions");

  int side = static_cast<int>(rows);
  int factor = 1;
  if (downscale_side > 0) {
    if (rows != cols || static_cast<int>(rows) % downscale_side != 0) {
      throw std::runtime_error("idx: downscale side must divide image side");
    }
    side = downscale_side;
    factor = static_cast<int>(rows) / downscale_side;
  }

  Dataset ds;
  ds.schema.variables.assign(static_cast<std::size_t>(side) * side,
                             Variable{VarKind::Categorical, 2});
  ds.rows.reserve(count);
  std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
  for (std::uint32_t i = 0; i < count; ++i) {
    img.read(reinterpret_cast<char*>(buf.data()),
             static_cast<std::streamsize>(buf.size()));
    if (!img) throw std::runtime_error("idx: truncated image data");
    Row row(static_cast<std::size_t>(side) * side);
    for (int r = 0; r < side; ++r) {
      for (int c = 0; c < side; ++c) {
        double acc = 0.0;
        for (int dr = 0; dr < factor; ++dr) {
          for (int dc = 0; dc < factor; ++dc) {
            acc += buf[static_cast<std::size_t>(r * factor + dr) * cols +
                       static_cast<std::size_t>(c * factor + dc)];
          }
        }
        const double intensity = acc / (255.0 * factor * factor);
        row[static_cast<std::size_t>(r) * side + c] =
            intensity >= threshold ? 1.0 : 0.0;
      }
    }
    ds.rows.push_back(std::move(row));
  }

  if (!label_path.empty()) {
    std::ifstream lab(label_path, std::ios::binary);
    if (!lab) throw std::runtime_error("cannot open idx label file: " + label_path);
    if (read_be32(lab) != 0x00000801u) {
      throw std::runtime_error("idx: bad label magic");
    }
    const std::uint32_t lcount = read_be32(lab);
    if (lcount != count) throw std::runtime_error("idx: label count mismatch");
    ds.labels.resize(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      char b = 0;
      lab.read(&b, 1);
      if (!lab) throw std::runtime_error("idx: truncated labels");
      ds.labels[i] = static_cast<unsigned char>(b);
    }
  }
  return ds;
}

double encode_value(const ColumnCodec& codec, const std::string& raw) {
  if (codec.kind == VarKind::Continuous) {
    const double v = std::strtod(raw.c_str(), nullptr);
    if (codec.hi == codec.lo) return 0.0;
    return 2.0 * (v - codec.lo) / (codec.hi - codec.lo) - 1.0;
  }
  for (std::size_t i = 0; i + 1 < codec.vocab.size(); ++i) {
    if (codec.vocab[i] == raw) return static_cast<double>(i);
  }
  return static_cast<double>(codec.vocab.size() - 1);  // unknown slot
}

std::string decode_value(const ColumnCodec& codec, double encoded) {
  if (codec.kind == VarKind::Continuous) {
    const double v = codec.lo + (encoded + 1.0) * 0.5 * (codec.hi - codec.lo);
    std::ostringstream out;
    out.precision(17);
    out << v;
    return out.str();
  }
  const std::size_t idx = static_cast<std::size_t>(encoded);
  if (idx >= codec.vocab.size()) {
    throw std::out_of_range("decode_value: class index out of range");
  }
  return codec.vocab[idx];
}

Dataset load_csv_tabular(const std::string& path,
                         const std::vector<ColumnSpec>& columns) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file");
  const std::vector<std::string> header = split_csv_line(line);

  std::vector<std::size_t> col_index(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    auto it = std::find(header.begin(), header.end(), columns[c].name);
    if (it == header.end()) {
      throw std::runtime_error("csv: missing declared column " +
                               columns[c].name);
    }
    col_index[c] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<std::vector<std::string>> raw_rows;
  std::size_t dropped = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_csv_line(line);
    std::vector<std::string> selected(columns.size());
    bool missing = false;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (col_index[c] >= fields.size() || is_missing(fields[col_index[c]])) {
        missing = true;
        break;
      }
      selected[c] = fields[col_index[c]];
    }
    if (missing) {
      ++dropped;
      continue;
    }
    raw_rows.push_back(std::move(selected));
  }
  if (dropped > 0) {
    std::cerr << "load_csv_tabular: dropped " << dropped
              << " rows with missing values\n";
  }

  Dataset ds;
  ds.dropped_rows = dropped;
  ds.codecs.resize(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    ColumnCodec& codec = ds.codecs[c];
    codec.name = columns[c].name;
    codec.kind = columns[c].kind;
    if (codec.kind == VarKind::Continuous) {
      double lo = 0.0, hi = 0.0;
      bool first = true;
      for (const auto& r : raw_rows) {
        const double v = std::strtod(r[c].c_str(), nullptr);
        if (first) {
          lo = hi = v;
          first = false;
        } else {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
      codec.lo = lo;
      codec.hi = hi;
      ds.schema.variables.push_back(Variable{VarKind::Continuous, 0});
    } else {
      std::set<std::string> distinct;
      for (const auto& r : raw_rows) distinct.insert(r[c]);
      codec.vocab.assign(distinct.begin(), distinct.end());
      if (all_numeric(codec.vocab)) {
        std::sort(codec.vocab.begin(), codec.vocab.end(),
                  [](const std::string& a, const std::string& b) {
                    return std::strtod(a.c_str(), nullptr) <
                           std::strtod(b.c_str(), nullptr);
                  });
      }
      codec.vocab.push_back("<unknown>");
      ds.schema.variables.push_back(
          Variable{VarKind::Categorical, static_cast<int>(codec.vocab.size())});
    }
  }

  ds.rows.reserve(raw_rows.size());
  for (const auto& r : raw_rows) {
    Row row(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
      row[c] = encode_value(ds.codecs[c], r[c]);
    }
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

Dataset synthetic_mixture(std::size_t n_rows,
                          const std::vector<MixtureMode>& modes,
                          const std::vector<double>& weights, Rng& rng) {
  if (modes.empty() || modes.size() != weights.size()) {
    throw std::invalid_argument("synthetic_mixture: modes/weights mismatch");
  }
  double wsum = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("weights must be non-negative");
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw std::invalid_argument("weights must sum to 1");
  }
  const std::size_t dims = modes[0].mean.size();
  for (const auto& m : modes) {
    if (m.mean.size() != dims) {
      throw std::invalid_argument("mode dimensions disagree");
    }
  }
  Dataset ds;
  ds.schema.variables.assign(dims, Variable{VarKind::Continuous, 0});
  ds.rows.reserve(n_rows);
  ds.labels.reserve(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    const double u = draw_uniform(rng);
    std::size_t mode = modes.size() - 1;
    double cum = 0.0;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      cum += weights[m];
      if (u < cum) {
        mode = m;
        break;
      }
    }
    Row row(dims);
    for (std::size_t d = 0; d < dims; ++d) {
      const double v = modes[mode].mean[d] + modes[mode].stdev * draw_normal(rng);
      row[d] = std::clamp(v, -1.0, 1.0);
    }
    ds.rows.push_back(std::move(row));
    ds.labels.push_back(static_cast<int>(mode));
  }
  return ds;
}

TaskStream split_tasks(const Dataset& dataset, const SplitSpec& spec) {
  if (!(spec.test_fraction > 0.0 && spec.test_fraction < 1.0)) {
    throw std::invalid_argument("test_fraction must lie in (0,1)");
  }
  TaskStream stream;
  stream.schema = dataset.schema;

  // Group row indices per task in task order.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  if (spec.mode == SplitSpec::Mode::ClassIncremental) {
    if (dataset.labels.size() != dataset.rows.size()) {
      throw std::invalid_argument("class-incremental split requires labels");
    }
    if (spec.classes_per_task < 1) {
      throw std::invalid_argument("classes_per_task must be >= 1");
    }
    std::set<int> distinct(dataset.labels.begin(), dataset.labels.end());
    std::vector<int> classes(distinct.begin(), distinct.end());
    if (classes.size() % static_cast<std::size_t>(spec.classes_per_task) != 0) {
      std::cerr << "split_tasks: class count not divisible by classes_per_task;"
                   " final task is smaller\n";
    }
    for (std::size_t start = 0; start < classes.size();
         start += static_cast<std::size_t>(spec.classes_per_task)) {
      const std::size_t end = std::min(
          classes.size(), start + static_cast<std::size_t>(spec.classes_per_task));
      std::string id;
      std::set<int> members;
      for (std::size_t i = start; i < end; ++i) {
        members.insert(classes[i]);
        if (!id.empty()) id += "+";
        id += std::to_string(classes[i]);
      }
      std::vector<std::size_t> idx;
      for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
        if (members.count(dataset.labels[r]) != 0) idx.push_back(r);
      }
      groups.emplace_back(id, std::move(idx));
    }
  } else {
    // One task per distinct attribute value, in vocabulary (sorted) order.
    std::size_t col = dataset.codecs.size();
    for (std::size_t c = 0; c < dataset.codecs.size(); ++c) {
      if (dataset.codecs[c].name == spec.attribute_column) {
        col = c;
        break;
      }
    }
    if (col == dataset.codecs.size()) {
      throw std::invalid_argument("attribute column not found: " +
                                  spec.attribute_column);
    }
    if (dataset.codecs[col].kind != VarKind::Categorical) {
      throw std::invalid_argument("attribute column must be categorical");
    }
    std::map<int, std::vector<std::size_t>> by_value;
    for (std::size_t r = 0; r < dataset.rows.size(); ++r) {
      by_value[static_cast<int>(dataset.rows[r][col])].push_back(r);
    }
    for (auto& [value, idx] : by_value) {
      groups.emplace_back(dataset.codecs[col].vocab[static_cast<std::size_t>(value)],
                          std::move(idx));
    }
  }

  for (std::size_t ti = 0; ti < groups.size(); ++ti) {
    auto& [id, idx] = groups[ti];
    Rng rng = make_rng(spec.seed ^ (0x9e3779b97f4a7c15ull * (ti + 1)));
    std::shuffle(idx.begin(), idx.end(), rng);
    std::size_t n_test = static_cast<std::size_t>(
        std::lround(spec.test_fraction * static_cast<double>(idx.size())));
    n_test = std::clamp<std::size_t>(n_test, idx.empty() ? 0 : 1,
                                     idx.empty() ? 0 : idx.size() - 1);
    Task task;
    task.id = id;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::size_t r = idx[i];
      const bool test = i < n_test;
      auto& rows = test ? task.test_rows : task.train_rows;
      auto& labels = test ? task.test_labels : task.train_labels;
      rows.push_back(dataset.rows[r]);
      if (!dataset.labels.empty()) labels.push_back(dataset.labels[r]);
    }
    stream.tasks.push_back(std::move(task));
  }
  return stream;
}

}  // namespace bfn
