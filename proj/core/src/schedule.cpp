#include "bfn/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace bfn {

namespace {

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("schedule time t must lie in [0,1]");
  }
}

}  // namespace

AccuracySchedule AccuracySchedule::continuous(double sigma1, int n_steps) {
  if (!(sigma1 > 0.0 && sigma1 < 1.0)) {
    throw std::invalid_argument("continuous schedule requires 0 < sigma1 < 1");
  }
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  AccuracySchedule s;
  s.kind = ScheduleKind::Continuous;
  s.sigma1 = sigma1;
  s.n_steps = n_steps;
  return s;
}

AccuracySchedule AccuracySchedule::categorical(double beta1, int n_steps) {
  if (!(beta1 > 0.0)) {
    throw std::invalid_argument("categorical schedule requires beta1 > 0");
  }
  if (n_steps < 1) throw std::invalid_argument("n_steps must be >= 1");
  AccuracySchedule s;
  s.kind = ScheduleKind::Categorical;
  s.beta1 = beta1;
  s.n_steps = n_steps;
  return s;
}

AccuracySchedule AccuracySchedule::with_steps(int n) const {
  if (n < 1) throw std::invalid_argument("n_steps must be >= 1");
  AccuracySchedule s = *this;
  s.n_steps = n;
  return s;
}

double beta(const AccuracySchedule& s, double t) {
  check_t(t);
  if (s.kind == ScheduleKind::Continuous) {
    // sigma1^(-2t) - 1, computed as expm1 for accuracy near t = 0.
    return std::expm1(-2.0 * t * std::log(s.sigma1));
  }
  return s.beta1 * t * t;
}

double alpha_rate(const AccuracySchedule& s, double t) {
  check_t(t);
  if (s.kind == ScheduleKind::Continuous) {
    return -2.0 * std::log(s.sigma1) * std::exp(-2.0 * t * std::log(s.sigma1));
  }
  return 2.0 * s.beta1 * t;
}

std::vector<double> step_alphas(const AccuracySchedule& s) {
  const int n = s.n_steps;
  std::vector<double> alphas(static_cast<std::size_t>(n));
  double prev = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double cur = beta(s, static_cast<double>(i) / n);
    alphas[static_cast<std::size_t>(i - 1)] = cur - prev;
    prev = cur;
  }
  return alphas;
}

}  // namespace bfn
