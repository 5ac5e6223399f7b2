#ifndef BFN_BFN_HPP
#define BFN_BFN_HPP

#include <cstddef>
#include <memory>
#include <vector>

#include "bfn/flow.hpp"
#include "bfn/model.hpp"
#include "bfn/rng.hpp"
#include "bfn/schedule.hpp"

namespace bfn {

enum class VarKind { Continuous, Categorical };

struct Variable {
  VarKind kind = VarKind::Continuous;
  int num_classes = 0;  // categorical only, >= 2
};

// A data row stores one double per variable: the value for continuous
// variables, the class index for categorical ones.
using Row = std::vector<double>;

struct DataSchema {
  std::vector<Variable> variables;

  std::size_t total_vars() const { return variables.size(); }
  std::size_t continuous_count() const;
  // Width of the flattened network input / output (continuous: 1 slot,
  // categorical: K slots).
  int flat_width() const;
  void validate() const;
};

// Belief state over one row: Gaussian params for the continuous variables in
// schema order, one simplex per categorical variable.
struct FlowState {
  GaussianParams gauss;
  std::vector<CategoricalParams> cats;
};

FlowState prior_state(const DataSchema& schema);

FlowState flow_sample(const DataSchema& schema, const Row& x,
                      const AccuracySchedule& schedule, double t, Rng& rng);

// Network input built from a belief state: means rescaled by the expected
// flow scale, simplices recentred to [-1,1], per the module contract.
std::vector<double> network_input(const DataSchema& schema,
                                  const FlowState& state,
                                  const AccuracySchedule& schedule, double t);

// Function approximator interface used by the losses and the sampler.
// Stubs implement predict only; trainable nets also expose gradient().
class Net {
 public:
  virtual ~Net() = default;
  virtual std::vector<double> predict(const std::vector<double>& xi,
                                      double t) const = 0;
  virtual bool differentiable() const { return false; }
  virtual ParameterVector gradient(const std::vector<double>& xi, double t,
                                   const std::vector<double>& upstream) const;
  virtual std::size_t param_count() const { return 0; }
};

class MlpNet final : public Net {
 public:
  MlpNet(NetworkSpec spec, ParameterVector params);
  static MlpNet for_schema(const DataSchema& schema, std::vector<int> hidden,
                           Activation act, TimeEmbedding emb);

  std::vector<double> predict(const std::vector<double>& xi,
                              double t) const override;
  bool differentiable() const override { return true; }
  ParameterVector gradient(const std::vector<double>& xi, double t,
                           const std::vector<double>& upstream) const override;
  std::size_t param_count() const override;

  const NetworkSpec& spec() const { return spec_; }
  const ParameterVector& params() const { return params_; }
  ParameterVector& params() { return params_; }

 private:
  NetworkSpec spec_;
  ParameterVector params_;
};

// Builds the head layout (squash mask) implied by a schema.
NetworkSpec spec_for_schema(const DataSchema& schema, std::vector<int> hidden,
                            Activation act, TimeEmbedding emb);

struct NoisyRow {
  std::vector<double> values;  // flat_width layout
  double accuracy = 0.0;
};

NoisyRow sender_sample(const Row& x, double alpha, const DataSchema& schema,
                       Rng& rng);

// Per-variable output: x_hat for continuous slots, softmax simplices for
// categorical blocks.
struct Output {
  std::vector<double> values;  // flat_width layout
};

Output output_distribution(const FlowState& state, double t, const Net& net,
                           const DataSchema& schema,
                           const AccuracySchedule& schedule);

Output head_output(const DataSchema& schema, const std::vector<double>& raw);

struct LossReport {
  double total_nats = 0.0;
  std::vector<double> per_step;  // discrete-time only
  double bits_per_dim = 0.0;
};

LossReport make_loss_report(double total_nats, std::vector<double> per_step,
                            std::size_t total_vars);

LossReport discrete_time_loss(const Row& x, const Net& net,
                              const AccuracySchedule& schedule,
                              const DataSchema& schema, Rng& rng,
                              int mc_samples,
                              ParameterVector* grad_accum = nullptr);

LossReport continuous_time_loss(const Row& x, const Net& net,
                                const AccuracySchedule& schedule,
                                const DataSchema& schema, Rng& rng,
                                int t_samples,
                                ParameterVector* grad_accum = nullptr);

double reconstruction_loss(const Row& x, const Net& net,
                           const AccuracySchedule& schedule,
                           const DataSchema& schema, Rng& rng);

struct SampleOptions {
  int n_steps = 100;
  bool categorical_argmax = true;
};

Row sample(const Net& net, const AccuracySchedule& schedule,
           const DataSchema& schema, Rng& rng, const SampleOptions& opts = {});

enum class LossKind { DiscreteTime, ContinuousTime };

struct BatchResult {
  LossReport report;
  ParameterVector gradient;
};

// Mean loss over the batch plus the gradient of that mean. Rows are
// processed in index order, each with its own rng stream.
BatchResult batch_loss_seeded(const std::vector<Row>& rows,
                              const std::vector<std::uint64_t>& seeds,
                              const Net& net, const AccuracySchedule& schedule,
                              const DataSchema& schema, LossKind kind,
                              int mc_samples, int t_samples);

BatchResult batch_loss(const std::vector<Row>& rows, const Net& net,
                       const AccuracySchedule& schedule,
                       const DataSchema& schema, Rng& rng, LossKind kind,
                       int mc_samples = 1, int t_samples = 1);

// Monte-Carlo estimate of KL(sender || receiver) for one categorical
// variable; exposed for oracle comparisons.
double categorical_kl_mc(const std::vector<double>& output_probs, int true_class,
                         double alpha, Rng& rng, int mc_samples,
                         std::vector<double>* score_grad = nullptr);

}  // namespace bfn

#endif
