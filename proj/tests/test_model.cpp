#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "bfn/checkpoint.hpp"
#include "bfn/model.hpp"

using namespace bfn;

namespace {

NetworkSpec small_spec(Activation act, TimeEmbedding::Kind emb) {
  NetworkSpec spec;
  spec.input_width = 3;
  spec.hidden_widths = {6};
  spec.output_width = 2;
  spec.activation = act;
  spec.time_embedding = {emb, 2};
  spec.squash = {1, 0};
  return spec;
}

}  // namespace

TEST_CASE("zero params give zero output") {
  const auto spec = small_spec(Activation::Silu, TimeEmbedding::Kind::Sinusoidal);
  const auto p = zero_params(spec);
  const auto out = forward(spec, p, {0.3, -0.5, 0.9}, 0.4);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
}

TEST_CASE("forward is deterministic and checks shapes") {
  const auto spec = small_spec(Activation::Tanh, TimeEmbedding::Kind::ScalarConcat);
  Rng rng = make_rng(1);
  const auto p = init_params(spec, rng);
  const auto a = forward(spec, p, {0.1, 0.2, 0.3}, 0.5);
  const auto b = forward(spec, p, {0.1, 0.2, 0.3}, 0.5);
  CHECK(a == b);
  CHECK(std::abs(a[0]) <= 1.0);  // squashed head
  CHECK_THROWS_AS(forward(spec, p, {0.1, 0.2}, 0.5), std::invalid_argument);
}

TEST_CASE("single linear layer gradient") {
  // y = w2 * act(w1 x + b1) + b2 reduced to near-linear via tanh around 0 is
  // messy; check the exact contract dL/dparam against finite differences on
  // the full map instead, plus zero upstream.
  const auto spec = small_spec(Activation::Relu, TimeEmbedding::Kind::ScalarConcat);
  Rng rng = make_rng(2);
  const auto p = init_params(spec, rng);
  const auto g = backward(spec, p, {3.0, 1.0, -2.0}, 0.2, {0.0, 0.0});
  for (double v : g.values) CHECK(v == 0.0);
}

TEST_CASE("backward matches central finite differences") {
  const std::vector<double> xi = {0.4, -0.7, 0.2};
  const std::vector<double> upstream = {0.8, -1.3};
  const double t = 0.35;
  const double h = 1e-5;
  for (Activation act : {Activation::Tanh, Activation::Relu, Activation::Silu}) {
    for (TimeEmbedding::Kind emb : {TimeEmbedding::Kind::ScalarConcat,
                                    TimeEmbedding::Kind::Sinusoidal}) {
      const auto spec = small_spec(act, emb);
      REQUIRE(spec.param_count() <= 200);
      Rng rng = make_rng(17);
      auto p = init_params(spec, rng);
      const auto grad = backward(spec, p, xi, t, upstream);
      auto loss = [&](const ParameterVector& q) {
        const auto out = forward(spec, q, xi, t);
        double l = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) l += upstream[i] * out[i];
        return l;
      };
      for (std::size_t i = 0; i < p.size(); ++i) {
        ParameterVector q = p;
        q[i] += h;
        const double up = loss(q);
        q[i] -= 2.0 * h;
        const double dn = loss(q);
        const double fd = (up - dn) / (2.0 * h);
        const double scale = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
        CHECK(std::abs(fd - grad[i]) / scale < 1e-4);
      }
    }
  }
}

TEST_CASE("optimizer steps") {
  NetworkSpec spec = small_spec(Activation::Silu, TimeEmbedding::Kind::ScalarConcat);
  (void)spec;
  ParameterVector p;
  p.values = {1.0};
  ParameterVector g;
  g.values = {2.0};

  auto sgd = OptimizerState::sgd(0.1);
  optimizer_step(sgd, p, g);
  CHECK(p[0] == doctest::Approx(0.8));

  ParameterVector pa;
  pa.values = {1.0, 1.0};
  ParameterVector ga;
  ga.values = {0.5, -0.25};
  auto adam = OptimizerState::adam(0.01);
  optimizer_step(adam, pa, ga);
  CHECK(pa[0] < 1.0);  // update opposes gradient sign
  CHECK(pa[1] > 1.0);

  ParameterVector zero;
  zero.values = {0.0, 0.0};
  const auto before = pa.values;
  auto adam2 = OptimizerState::adam(0.01);
  optimizer_step(adam2, pa, zero);
  CHECK(pa.values == before);

  ParameterVector bad;
  bad.values = {std::numeric_limits<double>::infinity(), 0.0};
  const auto snapshot = pa.values;
  CHECK_THROWS_AS(optimizer_step(adam2, pa, bad), std::runtime_error);
  CHECK(pa.values == snapshot);  // rejected step leaves params untouched
}

TEST_CASE("checkpoint round-trips bit-exactly") {
  const auto spec = small_spec(Activation::Silu, TimeEmbedding::Kind::Sinusoidal);
  Rng rng = make_rng(23);
  Checkpoint ckpt;
  ckpt.net_spec = spec;
  ckpt.schedule = AccuracySchedule::continuous(0.25, 12);
  ckpt.schema.variables = {Variable{VarKind::Continuous, 0},
                           Variable{VarKind::Categorical, 4}};
  ckpt.task_index = 3;
  ckpt.params = init_params(spec, rng);

  const std::string path = "test_model_roundtrip.ckpt";
  save_checkpoint(path, ckpt);
  const Checkpoint back = load_checkpoint(path);
  CHECK(back.params.values == ckpt.params.values);
  CHECK(back.task_index == 3);
  CHECK(back.schedule.sigma1 == ckpt.schedule.sigma1);
  CHECK(back.schema.variables.size() == 2);
  CHECK(back.net_spec.param_count() == spec.param_count());
  std::filesystem::remove(path);
}
