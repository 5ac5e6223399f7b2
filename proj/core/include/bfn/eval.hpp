#ifndef BFN_EVAL_HPP
#define BFN_EVAL_HPP

#include <string>
#include <vector>

#include "bfn/bfn.hpp"
#include "bfn/data.hpp"

namespace bfn {

// Raised when a probe cannot support class-share claims.
struct ProbeQualityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ClassifierProbe {
  enum class Kind { NearestCentroid, MlpProbe };
  Kind kind = Kind::NearestCentroid;
  int num_classes = 0;
  std::vector<Row> centroids;  // nearest-centroid
  NetworkSpec net_spec;        // mlp probe
  ParameterVector net_params;
  double holdout_accuracy = 0.0;
};

// Trains a probe on a labelled dataset with a seeded 20% holdout. The MLP
// probe must reach 90% holdout accuracy or a ProbeQualityError is raised.
ClassifierProbe train_probe(const Dataset& dataset, ClassifierProbe::Kind kind,
                            Rng& rng);

int classify(const ClassifierProbe& probe, const Row& row);

std::vector<double> class_shares(const ClassifierProbe& probe,
                                 const std::vector<Row>& samples);

struct EvalConfig {
  int mc_samples = 16;
  std::size_t max_rows_per_task = 0;  // 0 = all
};

// Mean discrete-time test loss per task, in bits/dimension.
std::vector<double> loss_matrix_row(const Net& net, const TaskStream& stream,
                                    const AccuracySchedule& schedule,
                                    const EvalConfig& cfg, Rng& rng);

struct ForgettingSummary {
  std::vector<double> per_task;  // F_j = M[T][j] - M[j][j]
  double mean = 0.0;             // over tasks before the final one
};

ForgettingSummary forgetting_summary(
    const std::vector<std::vector<double>>& loss_matrix);

struct MetricsRecord {
  int after_task = 0;
  std::vector<double> class_shares;
  std::vector<double> loss_matrix_row;  // bits/dim per task
  std::vector<double> forgetting;       // filled after the final task
};

}  // namespace bfn

#endif
