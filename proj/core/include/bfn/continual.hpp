#ifndef BFN_CONTINUAL_HPP
#define BFN_CONTINUAL_HPP

#include <functional>
#include <vector>

#include "bfn/bfn.hpp"
#include "bfn/data.hpp"
#include "bfn/eval.hpp"

namespace bfn {

struct StrategyConfig {
  enum class Kind { Finetune, Regularize, Buffer, GenerativeReplay };
  enum class BufferPolicy { Ring, Reservoir };

  Kind kind = Kind::Finetune;
  int norm_order = 2;        // regularize: 1 or 2
  double lambda = 0.0;       // regularize
  std::size_t capacity = 500;  // buffer
  BufferPolicy policy = BufferPolicy::Reservoir;
  double replay_fraction = 0.5;  // buffer / generative replay
  int generator_steps = 100;     // generative replay sampling steps

  void validate() const;
};

struct ReplayBuffer {
  std::size_t capacity = 0;
  StrategyConfig::BufferPolicy policy = StrategyConfig::BufferPolicy::Ring;
  std::vector<Row> items;
  std::size_t next = 0;            // ring cursor
  std::uint64_t seen_count = 0;

  static ReplayBuffer make(std::size_t capacity,
                           StrategyConfig::BufferPolicy policy);
};

void buffer_insert(ReplayBuffer& buffer, const Row& row, Rng& rng);

struct Penalty {
  double value = 0.0;
  ParameterVector gradient;
};

// lambda * |params - anchor|_p^p with its (sub)gradient.
Penalty regularization_penalty(const ParameterVector& params,
                               const ParameterVector& anchor, int p,
                               double lambda);

// Replaces floor(replay_fraction * batch) rows with rehearsal rows. No-op
// for finetune/regularize, on an empty buffer, or without a frozen model.
std::vector<Row> make_training_batch(const std::vector<Row>& task_batch,
                                     const StrategyConfig& strategy,
                                     const ReplayBuffer& buffer,
                                     const Net* frozen_generator,
                                     const AccuracySchedule& schedule,
                                     const DataSchema& schema, Rng& rng);

struct TrainingConfig {
  int steps_per_task = 2000;
  std::size_t batch_size = 32;
  OptimizerState::Kind optimizer = OptimizerState::Kind::Adam;
  double learning_rate = 1e-3;
  LossKind loss_kind = LossKind::ContinuousTime;
  int mc_samples = 1;   // discrete-time categorical KL
  int t_samples = 1;    // continuous-time
};

using EvalHook = std::function<MetricsRecord(int task_index, const MlpNet&)>;
using CheckpointHook = std::function<void(int task_index, const MlpNet&)>;

struct ScenarioResult {
  ParameterVector params;
  std::vector<MetricsRecord> records;
};

ScenarioResult run_scenario(const TaskStream& stream,
                            const StrategyConfig& strategy,
                            const TrainingConfig& training,
                            const NetworkSpec& net_spec,
                            const AccuracySchedule& schedule, Rng& rng,
                            const EvalHook& eval_hook = {},
                            const CheckpointHook& checkpoint_hook = {});

}  // namespace bfn

#endif
