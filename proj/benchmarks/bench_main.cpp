#include <benchmark/benchmark.h>

#include "bfn/bfn.hpp"

using namespace bfn;

namespace {

DataSchema image_schema(int side) {
  DataSchema s;
  s.variables.assign(static_cast<std::size_t>(side) * side,
                     Variable{VarKind::Categorical, 2});
  return s;
}

Row random_binary_row(const DataSchema& schema, Rng& rng) {
  Row row(schema.total_vars());
  for (auto& v : row) v = static_cast<double>(rng() % 2);
  return row;
}

void bm_schedule_step_alphas(benchmark::State& state) {
  const auto sched =
      AccuracySchedule::continuous(0.02, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(step_alphas(sched));
  }
}
BENCHMARK(bm_schedule_step_alphas)->Arg(20)->Arg(1000);

void bm_flow_sample(benchmark::State& state) {
  const auto schema = image_schema(14);
  const auto sched = AccuracySchedule::categorical(4.0, 20);
  Rng rng = make_rng(1);
  const Row row = random_binary_row(schema, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(flow_sample(schema, row, sched, 0.5, rng));
  }
}
BENCHMARK(bm_flow_sample);

void bm_forward_backward(benchmark::State& state) {
  const auto schema = image_schema(14);
  NetworkSpec spec =
      spec_for_schema(schema, {256, 256}, Activation::Silu,
                      {TimeEmbedding::Kind::Sinusoidal, 8});
  Rng rng = make_rng(2);
  const ParameterVector params = init_params(spec, rng);
  std::vector<double> input(static_cast<std::size_t>(spec.input_width));
  for (auto& v : input) v = draw_normal(rng);
  std::vector<double> upstream(static_cast<std::size_t>(spec.output_width), 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(spec, params, input, 0.5, upstream));
  }
}
BENCHMARK(bm_forward_backward);

void bm_discrete_time_loss(benchmark::State& state) {
  const auto schema = image_schema(14);
  const auto sched = AccuracySchedule::categorical(4.0, 20);
  MlpNet net = MlpNet::for_schema(schema, {128}, Activation::Silu,
                                  {TimeEmbedding::Kind::Sinusoidal, 8});
  Rng irng = make_rng(3);
  net.params() = init_params(net.spec(), irng);
  Rng rng = make_rng(4);
  const Row row = random_binary_row(schema, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        discrete_time_loss(row, net, sched, schema, rng, 1));
  }
}
BENCHMARK(bm_discrete_time_loss);

void bm_sample(benchmark::State& state) {
  DataSchema schema;
  schema.variables.assign(8, Variable{VarKind::Continuous, 0});
  const auto sched = AccuracySchedule::continuous(0.02, 20);
  MlpNet net = MlpNet::for_schema(schema, {64}, Activation::Silu,
                                  {TimeEmbedding::Kind::ScalarConcat, 0});
  Rng irng = make_rng(5);
  net.params() = init_params(net.spec(), irng);
  Rng rng = make_rng(6);
  SampleOptions opts;
  opts.n_steps = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample(net, sched, schema, rng, opts));
  }
}
BENCHMARK(bm_sample)->Arg(20)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
