#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "bfn/continual.hpp"

using namespace bfn;

namespace {

TaskStream two_task_stream(Rng& rng) {
  std::vector<MixtureMode> modes = {{{-0.5}, 0.05}, {{0.5}, 0.05}};
  Dataset d = synthetic_mixture(200, modes, {0.5, 0.5}, rng);
  SplitSpec spec;
  spec.classes_per_task = 1;
  spec.seed = 3;
  return split_tasks(d, spec);
}

}  // namespace

TEST_CASE("ring buffer evicts oldest") {
  Rng rng = make_rng(51);
  ReplayBuffer buf = ReplayBuffer::make(2, StrategyConfig::BufferPolicy::Ring);
  buffer_insert(buf, {1.0}, rng);
  buffer_insert(buf, {2.0}, rng);
  buffer_insert(buf, {3.0}, rng);
  REQUIRE(buf.items.size() == 2);
  CHECK(buf.items[0] == Row{3.0});
  CHECK(buf.items[1] == Row{2.0});
}

TEST_CASE("reservoir retention is uniform") {
  // Each of n inserted items should survive with probability capacity/n.
  const std::size_t capacity = 4;
  const int n = 20;
  const int trials = 100000;
  std::vector<int> kept_first(1, 0);
  Rng rng = make_rng(52);
  int kept = 0;
  for (int t = 0; t < trials; ++t) {
    ReplayBuffer buf =
        ReplayBuffer::make(capacity, StrategyConfig::BufferPolicy::Reservoir);
    for (int i = 0; i < n; ++i) {
      buffer_insert(buf, {static_cast<double>(i)}, rng);
    }
    for (const auto& item : buf.items) {
      if (item[0] == 0.0) ++kept;
    }
  }
  const double rate = static_cast<double>(kept) / trials;
  CHECK(std::abs(rate - static_cast<double>(capacity) / n) < 0.01);
}

TEST_CASE("regularization_penalty worked examples") {
  const ParameterVector p{{1.0, -0.5}};
  const ParameterVector a{{0.5, 0.0}};
  const auto l2 = regularization_penalty(p, a, 2, 0.5);
  CHECK(l2.value == doctest::Approx(0.25));
  CHECK(l2.gradient[0] == doctest::Approx(0.5));
  CHECK(l2.gradient[1] == doctest::Approx(-0.5));

  const auto l1 = regularization_penalty(p, a, 1, 0.7);
  CHECK(l1.value == doctest::Approx(0.7));
  CHECK(l1.gradient[0] == doctest::Approx(0.7));
  CHECK(l1.gradient[1] == doctest::Approx(-0.7));

  const auto zero = regularization_penalty(a, a, 1, 0.7);
  CHECK(zero.value == 0.0);
  CHECK(zero.gradient[0] == 0.0);  // subgradient at 0 is 0

  CHECK_THROWS(regularization_penalty(p, ParameterVector{{0.5}}, 2, 0.5));
}

TEST_CASE("make_training_batch") {
  Rng rng = make_rng(53);
  DataSchema schema;
  schema.variables = {Variable{VarKind::Continuous, 0}};
  const auto sched = AccuracySchedule::continuous(0.5, 4);
  const std::vector<Row> batch = {{0.1}, {0.2}, {0.3}, {0.4}};

  StrategyConfig finetune;
  ReplayBuffer empty = ReplayBuffer::make(4, StrategyConfig::BufferPolicy::Ring);
  CHECK(make_training_batch(batch, finetune, empty, nullptr, sched, schema,
                            rng) == batch);

  StrategyConfig replay;
  replay.kind = StrategyConfig::Kind::Buffer;
  replay.replay_fraction = 0.5;
  // Empty buffer: unchanged.
  CHECK(make_training_batch(batch, replay, empty, nullptr, sched, schema,
                            rng) == batch);

  ReplayBuffer buf = ReplayBuffer::make(4, StrategyConfig::BufferPolicy::Ring);
  buffer_insert(buf, {9.0}, rng);
  const auto mixed =
      make_training_batch(batch, replay, buf, nullptr, sched, schema, rng);
  REQUIRE(mixed.size() == 4);
  CHECK(mixed[0] == Row{0.1});
  CHECK(mixed[1] == Row{0.2});
  CHECK(mixed[2] == Row{9.0});
  CHECK(mixed[3] == Row{9.0});

  // Generative replay without a frozen model (first task): unchanged.
  StrategyConfig gen;
  gen.kind = StrategyConfig::Kind::GenerativeReplay;
  gen.replay_fraction = 0.5;
  CHECK(make_training_batch(batch, gen, empty, nullptr, sched, schema, rng) ==
        batch);

  // With a frozen generator the tail comes from sampling.
  MlpNet frozen = MlpNet::for_schema(schema, {4}, Activation::Tanh,
                                     {TimeEmbedding::Kind::ScalarConcat, 0});
  const auto gen_batch =
      make_training_batch(batch, gen, empty, &frozen, sched, schema, rng);
  REQUIRE(gen_batch.size() == 4);
  CHECK(gen_batch[0] == Row{0.1});
  CHECK(gen_batch[1] == Row{0.2});
}

TEST_CASE("strategy config validation") {
  StrategyConfig bad;
  bad.kind = StrategyConfig::Kind::Regularize;
  bad.norm_order = 3;
  CHECK_THROWS(bad.validate());
  bad.norm_order = 2;
  bad.lambda = -1.0;
  CHECK_THROWS(bad.validate());

  StrategyConfig frac;
  frac.kind = StrategyConfig::Kind::Buffer;
  frac.replay_fraction = 1.5;
  CHECK_THROWS(frac.validate());
}

TEST_CASE("regularize with lambda zero matches finetune bit for bit") {
  Rng srng = make_rng(54);
  TaskStream ts = two_task_stream(srng);

  const auto sched = AccuracySchedule::continuous(0.2, 8);
  NetworkSpec spec = spec_for_schema(ts.schema, {8}, Activation::Silu,
                                     {TimeEmbedding::Kind::ScalarConcat, 0});
  TrainingConfig train;
  train.steps_per_task = 20;
  train.batch_size = 8;
  train.loss_kind = LossKind::ContinuousTime;

  StrategyConfig finetune;
  StrategyConfig reg;
  reg.kind = StrategyConfig::Kind::Regularize;
  reg.norm_order = 2;
  reg.lambda = 0.0;

  Rng a = make_rng(99);
  Rng b = make_rng(99);
  const auto ra = run_scenario(ts, finetune, train, spec, sched, a);
  const auto rb = run_scenario(ts, reg, train, spec, sched, b);
  REQUIRE(ra.params.size() == rb.params.size());
  for (std::size_t i = 0; i < ra.params.size(); ++i) {
    CHECK(ra.params[i] == rb.params[i]);
  }

  // And nonzero lambda changes the trajectory.
  reg.lambda = 10.0;
  Rng c = make_rng(99);
  const auto rc = run_scenario(ts, reg, train, spec, sched, c);
  bool any_diff = false;
  for (std::size_t i = 0; i < ra.params.size(); ++i) {
    if (ra.params[i] != rc.params[i]) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("run_scenario invokes hooks per task") {
  Rng srng = make_rng(55);
  TaskStream ts = two_task_stream(srng);
  const auto sched = AccuracySchedule::continuous(0.2, 8);
  NetworkSpec spec = spec_for_schema(ts.schema, {4}, Activation::Tanh,
                                     {TimeEmbedding::Kind::ScalarConcat, 0});
  TrainingConfig train;
  train.steps_per_task = 5;
  train.batch_size = 4;

  std::vector<int> eval_calls;
  std::vector<int> ckpt_calls;
  StrategyConfig finetune;
  Rng rng = make_rng(56);
  const auto res = run_scenario(
      ts, finetune, train, spec, sched, rng,
      [&](int task, const MlpNet&) {
        eval_calls.push_back(task);
        MetricsRecord rec;
        rec.after_task = task;
        return rec;
      },
      [&](int task, const MlpNet&) { ckpt_calls.push_back(task); });
  CHECK(eval_calls == std::vector<int>{0, 1});
  CHECK(ckpt_calls == std::vector<int>{0, 1});
  CHECK(res.records.size() == 2);
}
