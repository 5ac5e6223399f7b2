#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <numeric>

#include "bfn/flow.hpp"

using namespace bfn;

TEST_CASE("gaussian_update worked examples") {
  GaussianParams p{{0.0}, {1.0}};
  const auto q = gaussian_update(p, {{2.0}, 1.0});
  CHECK(q.mean[0] == doctest::Approx(1.0));
  CHECK(q.precision[0] == doctest::Approx(2.0));

  GaussianParams p2{{1.0}, {3.0}};
  const auto q2 = gaussian_update(p2, {{-1.0}, 1.0});
  CHECK(q2.mean[0] == doctest::Approx(0.5));
  CHECK(q2.precision[0] == doctest::Approx(4.0));

  const auto q3 = gaussian_update(p2, {{100.0}, 1e-12});
  CHECK(std::abs(q3.mean[0] - p2.mean[0]) < 1e-9);

  CHECK_THROWS_AS(gaussian_update(p, NoisySample{{1.0, 2.0}, 1.0}),
                  std::invalid_argument);
}

TEST_CASE("gaussian update merge identity") {
  Rng rng = make_rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    GaussianParams p{{draw_normal(rng)}, {0.1 + draw_uniform(rng)}};
    const double a1 = 0.1 + draw_uniform(rng);
    const double a2 = 0.1 + draw_uniform(rng);
    const double y1 = draw_normal(rng);
    const double y2 = draw_normal(rng);
    const auto seq = gaussian_update(gaussian_update(p, {{y1}, a1}), {{y2}, a2});
    const auto merged =
        gaussian_update(p, {{(a1 * y1 + a2 * y2) / (a1 + a2)}, a1 + a2});
    CHECK(std::abs(seq.mean[0] - merged.mean[0]) < 1e-12);
    CHECK(std::abs(seq.precision[0] - merged.precision[0]) < 1e-12);
  }
}

TEST_CASE("categorical_update worked examples") {
  CategoricalParams p;
  p.num_classes = 2;
  p.probs = {0.5, 0.5};
  const auto q = categorical_update(p, {{std::log(2.0), 0.0}, 1.0});
  CHECK(q.probs[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(q.probs[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const auto shifted = categorical_update(p, {{3.7, 3.7}, 1.0});
  CHECK(shifted.probs[0] == doctest::Approx(0.5).epsilon(1e-12));

  CategoricalParams point;
  point.num_classes = 2;
  point.probs = {1.0, 0.0};
  const auto kept = categorical_update(point, {{-1.0, 2.0}, 1.0});
  CHECK(kept.probs[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(kept.probs[1] < 1e-12);

  CHECK_THROWS(categorical_update(
      p, {{std::numeric_limits<double>::quiet_NaN(), 0.0}, 1.0}));
}

TEST_CASE("categorical_update preserves simplex invariants") {
  Rng rng = make_rng(11);
  for (int trial = 0; trial < 10000; ++trial) {
    CategoricalParams p;
    p.num_classes = 3;
    double z = 0.0;
    p.probs.resize(3);
    for (auto& v : p.probs) {
      v = draw_uniform(rng) + 1e-6;
      z += v;
    }
    for (auto& v : p.probs) v /= z;
    NoisySample y{{4.0 * draw_normal(rng), 4.0 * draw_normal(rng),
                   4.0 * draw_normal(rng)},
                  1.0};
    const auto q = categorical_update(p, y);
    double sum = 0.0;
    for (double v : q.probs) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("gaussian_flow edge cases") {
  const auto sched = AccuracySchedule::continuous(0.5, 8);
  GaussianParams prior{{0.3, -0.1}, {1.0, 1.0}};
  Rng rng = make_rng(3);

  const auto at0 = gaussian_flow(prior, {1.0, -1.0}, sched, 0.0, rng);
  CHECK(at0.mean[0] == prior.mean[0]);
  CHECK(at0.mean[1] == prior.mean[1]);
  CHECK(at0.precision[0] == doctest::Approx(1.0));

  CHECK_THROWS_AS(gaussian_flow(prior, {1.0, 1.0}, sched, 1.5, rng),
                  std::domain_error);

  // x = 0, mu0 = 0: mean of mu(t) is 0 by symmetry.
  GaussianParams zero{{0.0}, {1.0}};
  double acc = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    acc += gaussian_flow(zero, {0.0}, sched, 0.7, rng).mean[0];
  }
  CHECK(std::abs(acc / n) < 0.01);
}

TEST_CASE("gaussian_flow matches sequential update chains") {
  const auto sched = AccuracySchedule::continuous(0.5, 64);
  const auto alphas = step_alphas(sched);
  Rng rng = make_rng(42);
  const double x = 1.0;

  const int chains = 20000;
  const int half = 32;  // t = 0.5
  double m1 = 0.0, m2 = 0.0;
  for (int c = 0; c < chains; ++c) {
    GaussianParams p{{0.0}, {1.0}};
    for (int i = 0; i < half; ++i) {
      const double sd = 1.0 / std::sqrt(alphas[static_cast<std::size_t>(i)]);
      p = gaussian_update(
          p, {{x + sd * draw_normal(rng)}, alphas[static_cast<std::size_t>(i)]});
    }
    m1 += p.mean[0];
    m2 += p.mean[0] * p.mean[0];
  }
  m1 /= chains;
  m2 = m2 / chains - m1 * m1;

  const double b = beta(sched, 0.5);
  const double mean = b * x / (1.0 + b);
  const double var = b / ((1.0 + b) * (1.0 + b));
  CHECK(std::abs(m1 - mean) / mean < 0.02);
  CHECK(std::abs(m2 - var) / var < 0.03);
}

TEST_CASE("categorical_flow edge cases") {
  const auto sched = AccuracySchedule::categorical(4.0, 8);
  auto prior = CategoricalParams::uniform(2, 3);
  Rng rng = make_rng(5);

  const auto at0 = categorical_flow(prior, {0, 2}, sched, 0.0, rng);
  CHECK(at0.probs == prior.probs);

  CategoricalParams onehot;
  onehot.num_classes = 2;
  onehot.probs = {0.0, 1.0};
  const auto kept = categorical_flow(onehot, {0}, sched, 1.0, rng);
  CHECK(kept.probs[1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("updates are per-dimension independent") {
  Rng rng = make_rng(9);
  GaussianParams p{{0.2, -0.4, 0.7}, {1.0, 2.0, 0.5}};
  NoisySample y{{1.0, -1.0, 0.3}, 0.8};
  const auto q = gaussian_update(p, y);
  // Permute dimensions (reverse) and check outputs permute identically.
  GaussianParams pr{{0.7, -0.4, 0.2}, {0.5, 2.0, 1.0}};
  NoisySample yr{{0.3, -1.0, 1.0}, 0.8};
  const auto qr = gaussian_update(pr, yr);
  for (int i = 0; i < 3; ++i) {
    CHECK(q.mean[static_cast<std::size_t>(i)] ==
          qr.mean[static_cast<std::size_t>(2 - i)]);
    CHECK(q.precision[static_cast<std::size_t>(i)] ==
          qr.precision[static_cast<std::size_t>(2 - i)]);
  }
  (void)rng;
}
