#include "bfn/continual.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

namespace bfn {

void StrategyConfig::validate() const {
  switch (kind) {
    case Kind::Finetune:
      break;
    case Kind::Regularize:
      if (norm_order != 1 && norm_order != 2) {
        throw std::invalid_argument("regularize: norm order must be 1 or 2");
      }
      if (!(lambda >= 0.0)) {
        throw std::invalid_argument("regularize: lambda must be >= 0");
      }
      break;
    case Kind::Buffer:
      if (capacity < 1) throw std::invalid_argument("buffer: capacity >= 1");
      [[fallthrough]];
    case Kind::GenerativeReplay:
      if (!(replay_fraction >= 0.0 && replay_fraction <= 1.0)) {
        throw std::invalid_argument("replay_fraction must lie in [0,1]");
      }
      if (kind == Kind::GenerativeReplay && generator_steps < 1) {
        throw std::invalid_argument("generator_steps must be >= 1");
      }
      break;
  }
}

ReplayBuffer ReplayBuffer::make(std::size_t capacity,
                                StrategyConfig::BufferPolicy policy) {
  if (capacity < 1) throw std::invalid_argument("buffer capacity must be >= 1");
  ReplayBuffer b;
  b.capacity = capacity;
  b.policy = policy;
  return b;
}

void buffer_insert(ReplayBuffer& buffer, const Row& row, Rng& rng) {
  ++buffer.seen_count;
  if (buffer.items.size() < buffer.capacity) {
    buffer.items.push_back(row);
    return;
  }
  if (buffer.policy == StrategyConfig::BufferPolicy::Ring) {
    buffer.items[buffer.next] = row;
    buffer.next = (buffer.next + 1) % buffer.capacity;
    return;
  }
  // Reservoir: keep with probability capacity / seen_count.
  const std::uint64_t slot = rng() % buffer.seen_count;
  if (slot < buffer.capacity) {
    buffer.items[static_cast<std::size_t>(slot)] = row;
  }
}

Penalty regularization_penalty(const ParameterVector& params,
                               const ParameterVector& anchor, int p,
                               double lambda) {
  if (params.size() != anchor.size()) {
    throw std::invalid_argument("regularization_penalty: layout mismatch");
  }
  if (p != 1 && p != 2) {
    throw std::invalid_argument("regularization_penalty: p must be 1 or 2");
  }
  Penalty pen;
  pen.gradient.values.assign(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double d = params[i] - anchor[i];
    if (p == 2) {
      pen.value += lambda * d * d;
      pen.gradient[i] = 2.0 * lambda * d;
    } else {
      pen.value += lambda * std::abs(d);
      pen.gradient[i] = d > 0.0 ? lambda : (d < 0.0 ? -lambda : 0.0);
    }
  }
  return pen;
}

std::vector<Row> make_training_batch(const std::vector<Row>& task_batch,
                                     const StrategyConfig& strategy,
                                     const ReplayBuffer& buffer,
                                     const Net* frozen_generator,
                                     const AccuracySchedule& schedule,
                                     const DataSchema& schema, Rng& rng) {
  if (task_batch.empty()) {
    throw std::invalid_argument("make_training_batch: empty batch");
  }
  if (strategy.kind == StrategyConfig::Kind::Finetune ||
      strategy.kind == StrategyConfig::Kind::Regularize) {
    return task_batch;
  }
  const std::size_t n_replay = static_cast<std::size_t>(
      std::floor(strategy.replay_fraction * static_cast<double>(task_batch.size())));
  if (n_replay == 0) return task_batch;

  std::vector<Row> batch = task_batch;
  if (strategy.kind == StrategyConfig::Kind::Buffer) {
    if (buffer.items.empty()) return task_batch;
    for (std::size_t i = 0; i < n_replay; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(rng() % buffer.items.size());
      batch[batch.size() - n_replay + i] = buffer.items[j];
    }
  } else {
    if (frozen_generator == nullptr) return task_batch;
    SampleOptions opts;
    opts.n_steps = strategy.generator_steps;
    for (std::size_t i = 0; i < n_replay; ++i) {
      batch[batch.size() - n_replay + i] =
          sample(*frozen_generator, schedule, schema, rng, opts);
    }
  }
  return batch;
}

ScenarioResult run_scenario(const TaskStream& stream,
                            const StrategyConfig& strategy,
                            const TrainingConfig& training,
                            const NetworkSpec& net_spec,
                            const AccuracySchedule& schedule, Rng& rng,
                            const EvalHook& eval_hook,
                            const CheckpointHook& checkpoint_hook) {
  strategy.validate();
  if (stream.tasks.empty()) {
    throw std::invalid_argument("run_scenario: empty task stream");
  }

  MlpNet net(net_spec, init_params(net_spec, rng));
  OptimizerState opt = training.optimizer == OptimizerState::Kind::Adam
                           ? OptimizerState::adam(training.learning_rate)
                           : OptimizerState::sgd(training.learning_rate);
  ReplayBuffer buffer =
      ReplayBuffer::make(std::max<std::size_t>(strategy.capacity, 1),
                         strategy.policy);
  std::unique_ptr<MlpNet> frozen;
  ParameterVector anchor;

  ScenarioResult result;
  for (std::size_t ti = 0; ti < stream.tasks.size(); ++ti) {
    const Task& task = stream.tasks[ti];
    if (task.train_rows.empty()) {
      throw std::runtime_error("run_scenario: task has no training rows");
    }
    if (strategy.kind == StrategyConfig::Kind::Regularize) {
      anchor = net.params();
    }
    if (strategy.kind == StrategyConfig::Kind::GenerativeReplay && ti > 0) {
      frozen = std::make_unique<MlpNet>(net.spec(), net.params());
    }

    for (int step = 0; step < training.steps_per_task; ++step) {
      std::vector<Row> task_batch(training.batch_size);
      for (auto& row : task_batch) {
        row = task.train_rows[static_cast<std::size_t>(
            rng() % task.train_rows.size())];
      }
      const std::vector<Row> batch = make_training_batch(
          task_batch, strategy, buffer, frozen.get(), schedule, stream.schema,
          rng);
      BatchResult br =
          batch_loss(batch, net, schedule, stream.schema, rng,
                     training.loss_kind, training.mc_samples,
                     training.t_samples);
      if (strategy.kind == StrategyConfig::Kind::Regularize) {
        const Penalty pen = regularization_penalty(net.params(), anchor,
                                                   strategy.norm_order,
                                                   strategy.lambda);
        add_scaled(br.gradient, pen.gradient, 1.0);
      }
      optimizer_step(opt, net.params(), br.gradient);
      if (strategy.kind == StrategyConfig::Kind::Buffer) {
        for (const Row& row : task_batch) buffer_insert(buffer, row, rng);
      }
    }

    if (checkpoint_hook) checkpoint_hook(static_cast<int>(ti), net);
    if (eval_hook) {
      result.records.push_back(eval_hook(static_cast<int>(ti), net));
    }
  }
  result.params = net.params();
  return result;
}

}  // namespace bfn
