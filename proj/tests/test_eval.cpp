#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "bfn/eval.hpp"

using namespace bfn;

namespace {

Dataset two_cluster_dataset(std::size_t per_class, Rng& rng) {
  std::vector<MixtureMode> modes = {{{-0.5, -0.5}, 0.03}, {{0.5, 0.5}, 0.03}};
  return synthetic_mixture(2 * per_class, modes, {0.5, 0.5}, rng);
}

struct ConstNet : Net {
  std::vector<double> out;
  explicit ConstNet(std::vector<double> o) : out(std::move(o)) {}
  std::vector<double> predict(const std::vector<double>&, double) const override {
    return out;
  }
};

}  // namespace

TEST_CASE("nearest-centroid probe separates clean clusters") {
  Rng rng = make_rng(41);
  Dataset d = two_cluster_dataset(400, rng);
  ClassifierProbe probe =
      train_probe(d, ClassifierProbe::Kind::NearestCentroid, rng);
  CHECK(probe.num_classes == 2);
  CHECK(std::abs(probe.centroids[0][0] + 0.5) < 0.02);
  CHECK(std::abs(probe.centroids[1][0] - 0.5) < 0.02);
  CHECK(probe.holdout_accuracy == doctest::Approx(1.0));
  CHECK(classify(probe, {-0.4, -0.6}) == 0);
  CHECK(classify(probe, {0.6, 0.4}) == 1);

  const auto shares = class_shares(
      probe, {{-0.5, -0.5}, {-0.5, -0.5}, {0.5, 0.5}, {-0.5, -0.5}});
  CHECK(shares[0] == doctest::Approx(0.75));
  CHECK(shares[1] == doctest::Approx(0.25));

  Dataset single;
  single.schema = d.schema;
  single.rows = {{0.0, 0.0}, {0.1, 0.1}};
  single.labels = {3, 3};
  CHECK_THROWS_AS(
      train_probe(single, ClassifierProbe::Kind::NearestCentroid, rng),
      std::invalid_argument);
}

TEST_CASE("mlp probe reaches holdout accuracy on separable data") {
  Rng rng = make_rng(42);
  Dataset d = two_cluster_dataset(300, rng);
  ClassifierProbe probe = train_probe(d, ClassifierProbe::Kind::MlpProbe, rng);
  CHECK(probe.holdout_accuracy >= 0.9);
  CHECK(classify(probe, {-0.5, -0.5}) == 0);
  CHECK(classify(probe, {0.5, 0.5}) == 1);
}

TEST_CASE("loss_matrix_row is consistent across identical tasks") {
  Rng rng = make_rng(43);
  Dataset d = two_cluster_dataset(200, rng);
  // Both tasks get the same distribution (split by label, symmetric modes do
  // not hold, so instead duplicate one task's rows).
  SplitSpec spec;
  spec.classes_per_task = 1;
  spec.seed = 7;
  TaskStream ts = split_tasks(d, spec);
  REQUIRE(ts.tasks.size() == 2);
  ts.tasks[1].test_rows = ts.tasks[0].test_rows;

  const auto sched = AccuracySchedule::continuous(0.1, 10);
  ConstNet zero({0.0, 0.0});
  EvalConfig cfg;
  cfg.mc_samples = 4;
  const auto row = loss_matrix_row(zero, ts, sched, cfg, rng);
  REQUIRE(row.size() == 2);
  CHECK(row[0] > 0.0);
  CHECK(std::abs(row[0] - row[1]) / row[0] < 0.02);

  // max_rows_per_task caps work but still yields a sane estimate.
  EvalConfig capped;
  capped.mc_samples = 4;
  capped.max_rows_per_task = 5;
  Rng rng2 = make_rng(44);
  const auto capped_row = loss_matrix_row(zero, ts, sched, capped, rng2);
  CHECK(capped_row.size() == 2);
  CHECK(capped_row[0] > 0.0);
}

TEST_CASE("forgetting_summary") {
  const std::vector<std::vector<double>> m = {
      {1.0, 2.0, 3.0},
      {1.4, 0.9, 2.0},
      {1.6, 1.1, 0.8},
  };
  const auto f = forgetting_summary(m);
  REQUIRE(f.per_task.size() == 3);
  CHECK(f.per_task[0] == doctest::Approx(0.6));
  CHECK(f.per_task[1] == doctest::Approx(0.2));
  CHECK(f.per_task[2] == doctest::Approx(0.0));
  CHECK(f.mean == doctest::Approx(0.4));

  const auto none = forgetting_summary({{1.0}});
  CHECK(none.per_task.empty());
  CHECK(none.mean == 0.0);
}
