#include "bfn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>

namespace bfn {

namespace {

double sq_dist(const Row& a, const Row& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

std::vector<double> probe_scores(const ClassifierProbe& probe, const Row& row) {
  return forward(probe.net_spec, probe.net_params, row, 0.0);
}

int argmax(const std::vector<double>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

ClassifierProbe train_probe(const Dataset& dataset, ClassifierProbe::Kind kind,
                            Rng& rng) {
  if (dataset.labels.size() != dataset.rows.size() || dataset.rows.empty()) {
    throw std::invalid_argument("train_probe: labelled dataset required");
  }
  std::set<int> distinct(dataset.labels.begin(), dataset.labels.end());
  if (distinct.size() < 2) {
    throw std::invalid_argument("train_probe: need at least 2 classes");
  }
  const int num_classes = *distinct.rbegin() + 1;

  std::vector<std::size_t> idx(dataset.rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::shuffle(idx.begin(), idx.end(), rng);
  const std::size_t n_holdout =
      std::max<std::size_t>(1, idx.size() / 5);
  std::vector<std::size_t> holdout(idx.begin(), idx.begin() + n_holdout);
  std::vector<std::size_t> train(idx.begin() + n_holdout, idx.end());

  ClassifierProbe probe;
  probe.kind = kind;
  probe.num_classes = num_classes;

  if (kind == ClassifierProbe::Kind::NearestCentroid) {
    const std::size_t dims = dataset.rows[0].size();
    probe.centroids.assign(static_cast<std::size_t>(num_classes),
                           Row(dims, 0.0));
    std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
    for (std::size_t r : train) {
      const int c = dataset.labels[r];
      for (std::size_t d = 0; d < dims; ++d) {
        probe.centroids[static_cast<std::size_t>(c)][d] += dataset.rows[r][d];
      }
      ++counts[static_cast<std::size_t>(c)];
    }
    for (int c = 0; c < num_classes; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) {
        if (distinct.count(c) != 0) {
          throw std::invalid_argument("train_probe: class missing from train split");
        }
        continue;
      }
      for (auto& v : probe.centroids[static_cast<std::size_t>(c)]) {
        v /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
  } else {
    NetworkSpec spec;
    spec.input_width = static_cast<int>(dataset.rows[0].size());
    spec.hidden_widths = {32};
    spec.output_width = num_classes;
    spec.activation = Activation::Relu;
    spec.time_embedding = {TimeEmbedding::Kind::ScalarConcat, 0};
    probe.net_spec = spec;
    probe.net_params = init_params(spec, rng);

    OptimizerState opt = OptimizerState::adam(1e-2);
    const int steps = 2000;
    const std::size_t batch = 32;
    for (int s = 0; s < steps; ++s) {
      ParameterVector grad = zero_params(spec);
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t r =
            train[static_cast<std::size_t>(rng() % train.size())];
        std::vector<double> scores =
            forward(spec, probe.net_params, dataset.rows[r], 0.0);
        // Softmax cross-entropy upstream.
        const double mx = *std::max_element(scores.begin(), scores.end());
        double z = 0.0;
        for (double v : scores) z += std::exp(v - mx);
        std::vector<double> upstream(scores.size());
        for (std::size_t c = 0; c < scores.size(); ++c) {
          upstream[c] = std::exp(scores[c] - mx) / z;
        }
        upstream[static_cast<std::size_t>(dataset.labels[r])] -= 1.0;
        add_scaled(grad,
                   backward(spec, probe.net_params, dataset.rows[r], 0.0,
                            upstream),
                   1.0 / static_cast<double>(batch));
      }
      optimizer_step(opt, probe.net_params, grad);
    }
  }

  std::size_t correct = 0;
  for (std::size_t r : holdout) {
    if (classify(probe, dataset.rows[r]) == dataset.labels[r]) ++correct;
  }
  probe.holdout_accuracy =
      static_cast<double>(correct) / static_cast<double>(holdout.size());
  if (kind == ClassifierProbe::Kind::MlpProbe &&
      probe.holdout_accuracy < 0.9) {
    throw ProbeQualityError("mlp probe holdout accuracy below 90%");
  }
  return probe;
}

int classify(const ClassifierProbe& probe, const Row& row) {
  if (probe.kind == ClassifierProbe::Kind::NearestCentroid) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < probe.num_classes; ++c) {
      if (probe.centroids[static_cast<std::size_t>(c)].empty()) continue;
      const double d = sq_dist(row, probe.centroids[static_cast<std::size_t>(c)]);
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    return best;
  }
  return argmax(probe_scores(probe, row));
}

std::vector<double> class_shares(const ClassifierProbe& probe,
                                 const std::vector<Row>& samples) {
  if (samples.empty()) {
    throw std::invalid_argument("class_shares: need at least one sample");
  }
  std::vector<double> shares(static_cast<std::size_t>(probe.num_classes), 0.0);
  for (const Row& r : samples) {
    shares[static_cast<std::size_t>(classify(probe, r))] += 1.0;
  }
  for (auto& s : shares) s /= static_cast<double>(samples.size());
  return shares;
}

std::vector<double> loss_matrix_row(const Net& net, const TaskStream& stream,
                                    const AccuracySchedule& schedule,
                                    const EvalConfig& cfg, Rng& rng) {
  std::vector<double> row;
  row.reserve(stream.tasks.size());
  for (const Task& task : stream.tasks) {
    std::size_t n = task.test_rows.size();
    if (cfg.max_rows_per_task > 0) n = std::min(n, cfg.max_rows_per_task);
    if (n == 0) throw std::invalid_argument("loss_matrix_row: empty test split");
    double bpd = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      Rng row_rng = make_rng(split_seed(rng));
      bpd += discrete_time_loss(task.test_rows[r], net, schedule,
                                stream.schema, row_rng, cfg.mc_samples)
                 .bits_per_dim /
             static_cast<double>(n);
    }
    row.push_back(bpd);
  }
  return row;
}

ForgettingSummary forgetting_summary(
    const std::vector<std::vector<double>>& loss_matrix) {
  const std::size_t t = loss_matrix.size();
  if (t == 0) throw std::invalid_argument("forgetting_summary: no rows");
  for (std::size_t i = 0; i < t; ++i) {
    if (loss_matrix[i].size() < t) {
      throw std::invalid_argument("forgetting_summary: missing entries");
    }
  }
  ForgettingSummary summary;
  if (t == 1) return summary;
  summary.per_task.resize(t);
  double acc = 0.0;
  for (std::size_t j = 0; j < t; ++j) {
    summary.per_task[j] = loss_matrix[t - 1][j] - loss_matrix[j][j];
    if (j + 1 < t) acc += summary.per_task[j];
  }
  summary.mean = acc / static_cast<double>(t - 1);
  return summary;
}

}  // namespace bfn
