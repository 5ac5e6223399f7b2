#ifndef BFN_FLOW_HPP
#define BFN_FLOW_HPP

#include <cstddef>
#include <vector>

#include "bfn/rng.hpp"
#include "bfn/schedule.hpp"

namespace bfn {

// Per-dimension Gaussian belief state (mean / precision).
struct GaussianParams {
  std::vector<double> mean;
  std::vector<double> precision;

  std::size_t dims() const { return mean.size(); }
};

// D variables, each a simplex over K classes, stored row-major D x K.
struct CategoricalParams {
  std::size_t num_classes = 0;
  std::vector<double> probs;

  std::size_t vars() const {
    return num_classes == 0 ? 0 : probs.size() / num_classes;
  }
  double at(std::size_t d, std::size_t k) const {
    return probs[d * num_classes + k];
  }

  static CategoricalParams uniform(std::size_t vars, std::size_t num_classes);
};

// Noisy observation y with its accuracy (precision) alpha.
struct NoisySample {
  std::vector<double> values;
  double accuracy = 0.0;
};

GaussianParams gaussian_update(const GaussianParams& prior,
                               const NoisySample& y);

// Multiplicative-exponential update, renormalized in log space per variable.
CategoricalParams categorical_update(const CategoricalParams& prior,
                                     const NoisySample& y);

// One draw from the Bayesian flow distribution at time t: precision is
// deterministic (rho0 + beta), the mean is Gaussian around the posterior mean.
GaussianParams gaussian_flow(const GaussianParams& prior,
                             const std::vector<double>& x,
                             const AccuracySchedule& schedule, double t,
                             Rng& rng);

CategoricalParams categorical_flow(const CategoricalParams& prior,
                                   const std::vector<int>& x,
                                   const AccuracySchedule& schedule, double t,
                                   Rng& rng);

}  // namespace bfn

#endif
