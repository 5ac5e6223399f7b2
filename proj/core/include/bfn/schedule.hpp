#ifndef BFN_SCHEDULE_HPP
#define BFN_SCHEDULE_HPP

#include <vector>

namespace bfn {

enum class ScheduleKind { Continuous, Categorical };

// Accuracy schedule beta(t) and its rate alpha(t) = d beta / dt.
// Continuous kind: beta(t) = sigma1^(-2t) - 1.
// Categorical kind: beta(t) = beta1 * t^2.
struct AccuracySchedule {
  ScheduleKind kind = ScheduleKind::Continuous;
  double sigma1 = 0.0;  // continuous kind only, 0 < sigma1 < 1
  double beta1 = 0.0;   // categorical kind only, beta1 > 0
  int n_steps = 1;

  static AccuracySchedule continuous(double sigma1, int n_steps);
  static AccuracySchedule categorical(double beta1, int n_steps);

  AccuracySchedule with_steps(int n) const;
};

double beta(const AccuracySchedule& s, double t);
double alpha_rate(const AccuracySchedule& s, double t);

// Per-step accuracies alpha_i = beta(i/n) - beta((i-1)/n), i = 1..n_steps.
std::vector<double> step_alphas(const AccuracySchedule& s);

}  // namespace bfn

#endif
