#include "bfn/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bfn {

namespace {

constexpr double kProbFloor = 1e-30;

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("flow time t must lie in [0,1]");
  }
}

}  // namespace

CategoricalParams CategoricalParams::uniform(std::size_t vars,
                                             std::size_t num_classes) {
  if (num_classes < 2) throw std::invalid_argument("num_classes must be >= 2");
  CategoricalParams p;
  p.num_classes = num_classes;
  p.probs.assign(vars * num_classes, 1.0 / static_cast<double>(num_classes));
  return p;
}

GaussianParams gaussian_update(const GaussianParams& prior,
                               const NoisySample& y) {
  const std::size_t d = prior.dims();
  if (prior.precision.size() != d || y.values.size() != d) {
    throw std::invalid_argument("gaussian_update: dimension mismatch");
  }
  if (!(y.accuracy > 0.0)) {
    throw std::invalid_argument("gaussian_update: accuracy must be > 0");
  }
  GaussianParams out;
  out.mean.resize(d);
  out.precision.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double rho = prior.precision[i] + y.accuracy;
    out.precision[i] = rho;
    out.mean[i] =
        (prior.precision[i] * prior.mean[i] + y.accuracy * y.values[i]) / rho;
  }
  return out;
}

CategoricalParams categorical_update(const CategoricalParams& prior,
                                     const NoisySample& y) {
  const std::size_t vars = prior.vars();
  const std::size_t k = prior.num_classes;
  if (y.values.size() != vars * k) {
    throw std::invalid_argument("categorical_update: shape mismatch");
  }
  CategoricalParams out;
  out.num_classes = k;
  out.probs.resize(vars * k);
  std::vector<double> logw(k);
  for (std::size_t d = 0; d < vars; ++d) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < k; ++j) {
      const double yj = y.values[d * k + j];
      if (!std::isfinite(yj)) {
        throw std::runtime_error("categorical_update: non-finite sample");
      }
      logw[j] = std::log(std::max(prior.at(d, j), kProbFloor)) + yj;
      mx = std::max(mx, logw[j]);
    }
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(logw[j] - mx);
    for (std::size_t j = 0; j < k; ++j) {
      out.probs[d * k + j] = std::exp(logw[j] - mx) / z;
    }
  }
  return out;
}

GaussianParams gaussian_flow(const GaussianParams& prior,
                             const std::vector<double>& x,
                             const AccuracySchedule& schedule, double t,
                             Rng& rng) {
  check_t(t);
  const std::size_t d = prior.dims();
  if (x.size() != d || prior.precision.size() != d) {
    throw std::invalid_argument("gaussian_flow: dimension mismatch");
  }
  const double b = beta(schedule, t);
  GaussianParams out;
  out.mean.resize(d);
  out.precision.resize(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double rho = prior.precision[i] + b;
    const double mean = (prior.precision[i] * prior.mean[i] + b * x[i]) / rho;
    const double var = b / (rho * rho);
    out.precision[i] = rho;
    out.mean[i] = var > 0.0 ? mean + std::sqrt(var) * draw_normal(rng) : mean;
  }
  return out;
}

CategoricalParams categorical_flow(const CategoricalParams& prior,
                                   const std::vector<int>& x,
                                   const AccuracySchedule& schedule, double t,
                                   Rng& rng) {
  check_t(t);
  const std::size_t vars = prior.vars();
  const std::size_t k = prior.num_classes;
  if (x.size() != vars) {
    throw std::invalid_argument("categorical_flow: dimension mismatch");
  }
  const double b = beta(schedule, t);
  if (b == 0.0) return prior;
  const double kd = static_cast<double>(k);
  const double sd = std::sqrt(b * kd);
  NoisySample y;
  y.accuracy = b;
  y.values.resize(vars * k);
  for (std::size_t d = 0; d < vars; ++d) {
    if (x[d] < 0 || static_cast<std::size_t>(x[d]) >= k) {
      throw std::invalid_argument("categorical_flow: class index out of range");
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double mean =
          b * (kd * (j == static_cast<std::size_t>(x[d]) ? 1.0 : 0.0) - 1.0);
      y.values[d * k + j] = mean + sd * draw_normal(rng);
    }
  }
  return categorical_update(prior, y);
}

}  // namespace bfn
