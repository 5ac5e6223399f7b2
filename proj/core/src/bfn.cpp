#include "bfn/bfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace bfn {

namespace {

constexpr double kProbFloor = 1e-30;
constexpr double kScaleFloor = 1e-3;
constexpr double kLn2Pi = 1.8378770664093453;

double expected_scale(const AccuracySchedule& schedule, double t) {
  const double b = beta(schedule, t);
  return std::max(b / (1.0 + b), kScaleFloor);
}

void softmax(const double* scores, std::size_t k, double* out) {
  double mx = scores[0];
  for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, scores[j]);
  double z = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = std::exp(scores[j] - mx);
    z += out[j];
  }
  for (std::size_t j = 0; j < k; ++j) out[j] /= z;
}

void check_row(const DataSchema& schema, const Row& x) {
  if (x.size() != schema.total_vars()) {
    throw std::invalid_argument("row does not conform to schema");
  }
}

double continuous_sigma1(const AccuracySchedule& schedule) {
  if (schedule.kind != ScheduleKind::Continuous) {
    throw std::invalid_argument(
        "continuous variables require a continuous-kind schedule here");
  }
  return schedule.sigma1;
}

}  // namespace

std::size_t DataSchema::continuous_count() const {
  std::size_t n = 0;
  for (const auto& v : variables) {
    if (v.kind == VarKind::Continuous) ++n;
  }
  return n;
}

int DataSchema::flat_width() const {
  int w = 0;
  for (const auto& v : variables) {
    w += v.kind == VarKind::Continuous ? 1 : v.num_classes;
  }
  return w;
}

void DataSchema::validate() const {
  if (variables.empty()) throw std::invalid_argument("schema has no variables");
  for (const auto& v : variables) {
    if (v.kind == VarKind::Categorical && v.num_classes < 2) {
      throw std::invalid_argument("categorical variables need K >= 2");
    }
  }
}

FlowState prior_state(const DataSchema& schema) {
  schema.validate();
  FlowState s;
  const std::size_t nc = schema.continuous_count();
  s.gauss.mean.assign(nc, 0.0);
  s.gauss.precision.assign(nc, 1.0);
  for (const auto& v : schema.variables) {
    if (v.kind == VarKind::Categorical) {
      s.cats.push_back(CategoricalParams::uniform(
          1, static_cast<std::size_t>(v.num_classes)));
    }
  }
  return s;
}

FlowState flow_sample(const DataSchema& schema, const Row& x,
                      const AccuracySchedule& schedule, double t, Rng& rng) {
  check_row(schema, x);
  FlowState prior = prior_state(schema);
  std::vector<double> xc;
  xc.reserve(prior.gauss.dims());
  std::vector<int> xk;
  for (std::size_t d = 0; d < schema.variables.size(); ++d) {
    if (schema.variables[d].kind == VarKind::Continuous) {
      xc.push_back(x[d]);
    } else {
      xk.push_back(static_cast<int>(x[d]));
    }
  }
  FlowState out;
  out.gauss = xc.empty() ? prior.gauss
                         : gaussian_flow(prior.gauss, xc, schedule, t, rng);
  out.cats.reserve(prior.cats.size());
  for (std::size_t i = 0; i < prior.cats.size(); ++i) {
    out.cats.push_back(
        categorical_flow(prior.cats[i], {xk[i]}, schedule, t, rng));
  }
  return out;
}

std::vector<double> network_input(const DataSchema& schema,
                                  const FlowState& state,
                                  const AccuracySchedule& schedule, double t) {
  const double scale = expected_scale(schedule, t);
  std::vector<double> xi;
  xi.reserve(static_cast<std::size_t>(schema.flat_width()));
  std::size_t ci = 0;
  std::size_t ki = 0;
  for (const auto& v : schema.variables) {
    if (v.kind == VarKind::Continuous) {
      xi.push_back(state.gauss.mean[ci++] / scale);
    } else {
      const CategoricalParams& cp = state.cats[ki++];
      for (int j = 0; j < v.num_classes; ++j) {
        xi.push_back(2.0 * cp.probs[static_cast<std::size_t>(j)] - 1.0);
      }
    }
  }
  return xi;
}

ParameterVector Net::gradient(const std::vector<double>&, double,
                              const std::vector<double>&) const {
  throw std::logic_error("this net does not support gradients");
}

MlpNet::MlpNet(NetworkSpec spec, ParameterVector params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  spec_.validate();
  if (static_cast<int>(params_.size()) != spec_.param_count()) {
    throw std::invalid_argument("MlpNet: parameter count mismatch");
  }
}

NetworkSpec spec_for_schema(const DataSchema& schema, std::vector<int> hidden,
                            Activation act, TimeEmbedding emb) {
  schema.validate();
  NetworkSpec spec;
  spec.input_width = schema.flat_width();
  spec.output_width = schema.flat_width();
  spec.hidden_widths = std::move(hidden);
  spec.activation = act;
  spec.time_embedding = emb;
  spec.squash.clear();
  for (const auto& v : schema.variables) {
    if (v.kind == VarKind::Continuous) {
      spec.squash.push_back(1);
    } else {
      spec.squash.insert(spec.squash.end(),
                         static_cast<std::size_t>(v.num_classes), 0);
    }
  }
  return spec;
}

MlpNet MlpNet::for_schema(const DataSchema& schema, std::vector<int> hidden,
                          Activation act, TimeEmbedding emb) {
  NetworkSpec spec = spec_for_schema(schema, std::move(hidden), act, emb);
  ParameterVector params = zero_params(spec);
  return MlpNet(std::move(spec), std::move(params));
}

std::vector<double> MlpNet::predict(const std::vector<double>& xi,
                                    double t) const {
  return forward(spec_, params_, xi, t);
}

ParameterVector MlpNet::gradient(const std::vector<double>& xi, double t,
                                 const std::vector<double>& upstream) const {
  return backward(spec_, params_, xi, t, upstream);
}

std::size_t MlpNet::param_count() const {
  return static_cast<std::size_t>(spec_.param_count());
}

NoisyRow sender_sample(const Row& x, double alpha, const DataSchema& schema,
                       Rng& rng) {
  check_row(schema, x);
  if (!(alpha > 0.0)) {
    throw std::invalid_argument("sender_sample: alpha must be > 0");
  }
  NoisyRow y;
  y.accuracy = alpha;
  y.values.reserve(static_cast<std::size_t>(schema.flat_width()));
  for (std::size_t d = 0; d < schema.variables.size(); ++d) {
    const Variable& v = schema.variables[d];
    if (v.kind == VarKind::Continuous) {
      y.values.push_back(x[d] + draw_normal(rng) / std::sqrt(alpha));
    } else {
      const int k = static_cast<int>(x[d]);
      if (k < 0 || k >= v.num_classes) {
        throw std::invalid_argument("sender_sample: class index out of range");
      }
      const double kd = static_cast<double>(v.num_classes);
      const double sd = std::sqrt(alpha * kd);
      for (int j = 0; j < v.num_classes; ++j) {
        const double mean = alpha * (kd * (j == k ? 1.0 : 0.0) - 1.0);
        y.values.push_back(mean + sd * draw_normal(rng));
      }
    }
  }
  return y;
}

Output head_output(const DataSchema& schema, const std::vector<double>& raw) {
  if (static_cast<int>(raw.size()) != schema.flat_width()) {
    throw std::invalid_argument("head_output: width mismatch");
  }
  Output out;
  out.values = raw;
  std::size_t off = 0;
  for (const auto& v : schema.variables) {
    if (v.kind == VarKind::Continuous) {
      ++off;
    } else {
      softmax(raw.data() + off, static_cast<std::size_t>(v.num_classes),
              out.values.data() + off);
      off += static_cast<std::size_t>(v.num_classes);
    }
  }
  return out;
}

Output output_distribution(const FlowState& state, double t, const Net& net,
                           const DataSchema& schema,
                           const AccuracySchedule& schedule) {
  const std::vector<double> xi = network_input(schema, state, schedule, t);
  return head_output(schema, net.predict(xi, t));
}

LossReport make_loss_report(double total_nats, std::vector<double> per_step,
                            std::size_t total_vars) {
  LossReport r;
  r.total_nats = total_nats;
  r.per_step = std::move(per_step);
  r.bits_per_dim =
      total_nats / (static_cast<double>(total_vars) * std::log(2.0));
  return r;
}

double categorical_kl_mc(const std::vector<double>& output_probs,
                         int true_class, double alpha, Rng& rng,
                         int mc_samples, std::vector<double>* score_grad) {
  const std::size_t k = output_probs.size();
  if (k < 2) throw std::invalid_argument("categorical_kl_mc: K must be >= 2");
  if (true_class < 0 || static_cast<std::size_t>(true_class) >= k) {
    throw std::invalid_argument("categorical_kl_mc: class out of range");
  }
  if (mc_samples < 1) {
    throw std::invalid_argument("categorical_kl_mc: mc_samples must be >= 1");
  }
  const double kd = static_cast<double>(k);
  const double var = alpha * kd;
  const double sd = std::sqrt(var);

  std::vector<double> logp(k);
  for (std::size_t j = 0; j < k; ++j) {
    logp[j] = std::log(std::max(output_probs[j], kProbFloor));
  }

  std::vector<double> y(k);
  std::vector<double> expo(k);
  std::vector<double> w(k);
  double acc = 0.0;
  for (int s = 0; s < mc_samples; ++s) {
    for (std::size_t j = 0; j < k; ++j) {
      const double mean =
          alpha * (kd * (j == static_cast<std::size_t>(true_class) ? 1.0 : 0.0) -
                   1.0);
      y[j] = mean + sd * draw_normal(rng);
    }
    // Log-density exponents up to a shared constant, per mixture component.
    for (std::size_t c = 0; c < k; ++c) {
      double e = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double mean = alpha * (kd * (j == c ? 1.0 : 0.0) - 1.0);
        const double diff = y[j] - mean;
        e -= diff * diff / (2.0 * var);
      }
      expo[c] = e;
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) mx = std::max(mx, logp[c] + expo[c]);
    double z = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      w[c] = std::exp(logp[c] + expo[c] - mx);
      z += w[c];
    }
    const double log_receiver = mx + std::log(z);
    acc += expo[static_cast<std::size_t>(true_class)] - log_receiver;
    if (score_grad != nullptr) {
      for (std::size_t c = 0; c < k; ++c) {
        (*score_grad)[c] +=
            (output_probs[c] - w[c] / z) / static_cast<double>(mc_samples);
      }
    }
  }
  return acc / static_cast<double>(mc_samples);
}

LossReport discrete_time_loss(const Row& x, const Net& net,
                              const AccuracySchedule& schedule,
                              const DataSchema& schema, Rng& rng,
                              int mc_samples, ParameterVector* grad_accum) {
  check_row(schema, x);
  if (mc_samples < 1) {
    throw std::invalid_argument("discrete_time_loss: mc_samples must be >= 1");
  }
  const std::vector<double> alphas = step_alphas(schedule);
  const int n = schedule.n_steps;
  std::vector<double> per_step(static_cast<std::size_t>(n), 0.0);
  std::vector<double> upstream;
  std::vector<double> block_grad;
  double total = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double t_prev = static_cast<double>(i - 1) / n;
    const double alpha = alphas[static_cast<std::size_t>(i - 1)];
    const FlowState state = flow_sample(schema, x, schedule, t_prev, rng);
    const std::vector<double> xi = network_input(schema, state, schedule, t_prev);
    const Output out = head_output(schema, net.predict(xi, t_prev));

    if (grad_accum != nullptr) {
      upstream.assign(out.values.size(), 0.0);
    }
    double step_loss = 0.0;
    std::size_t off = 0;
    for (std::size_t d = 0; d < schema.variables.size(); ++d) {
      const Variable& v = schema.variables[d];
      if (v.kind == VarKind::Continuous) {
        const double diff = x[d] - out.values[off];
        step_loss += 0.5 * alpha * diff * diff;
        if (grad_accum != nullptr) upstream[off] = alpha * (out.values[off] - x[d]);
        ++off;
      } else {
        const std::size_t k = static_cast<std::size_t>(v.num_classes);
        std::vector<double> probs(out.values.begin() + off,
                                  out.values.begin() + off + k);
        std::vector<double>* gptr = nullptr;
        if (grad_accum != nullptr) {
          block_grad.assign(k, 0.0);
          gptr = &block_grad;
        }
        step_loss += categorical_kl_mc(probs, static_cast<int>(x[d]), alpha,
                                       rng, mc_samples, gptr);
        if (grad_accum != nullptr) {
          for (std::size_t j = 0; j < k; ++j) upstream[off + j] = block_grad[j];
        }
        off += k;
      }
    }
    per_step[static_cast<std::size_t>(i - 1)] = step_loss;
    total += step_loss;
    if (grad_accum != nullptr) {
      add_scaled(*grad_accum, net.gradient(xi, t_prev, upstream), 1.0);
    }
  }
  return make_loss_report(total, std::move(per_step), schema.total_vars());
}

LossReport continuous_time_loss(const Row& x, const Net& net,
                                const AccuracySchedule& schedule,
                                const DataSchema& schema, Rng& rng,
                                int t_samples, ParameterVector* grad_accum) {
  check_row(schema, x);
  if (t_samples < 1) {
    throw std::invalid_argument("continuous_time_loss: t_samples must be >= 1");
  }
  if (schema.continuous_count() != schema.total_vars()) {
    throw std::invalid_argument(
        "continuous_time_loss supports continuous-only schemas");
  }
  const double sigma1 = continuous_sigma1(schedule);
  const double neg_log_sigma1 = -std::log(sigma1);
  double total = 0.0;
  std::vector<double> upstream;
  for (int s = 0; s < t_samples; ++s) {
    const double t = draw_uniform(rng);
    const FlowState state = flow_sample(schema, x, schedule, t, rng);
    const std::vector<double> xi = network_input(schema, state, schedule, t);
    const std::vector<double> xhat = net.predict(xi, t);
    const double weight =
        neg_log_sigma1 * std::exp(-2.0 * t * std::log(sigma1));
    double sq = 0.0;
    if (grad_accum != nullptr) upstream.assign(xhat.size(), 0.0);
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double diff = x[d] - xhat[d];
      sq += diff * diff;
      if (grad_accum != nullptr) {
        upstream[d] = 2.0 * weight * (xhat[d] - x[d]) /
                      static_cast<double>(t_samples);
      }
    }
    total += weight * sq / static_cast<double>(t_samples);
    if (grad_accum != nullptr) {
      add_scaled(*grad_accum, net.gradient(xi, t, upstream), 1.0);
    }
  }
  return make_loss_report(total, {}, schema.total_vars());
}

double reconstruction_loss(const Row& x, const Net& net,
                           const AccuracySchedule& schedule,
                           const DataSchema& schema, Rng& rng) {
  check_row(schema, x);
  const FlowState state = flow_sample(schema, x, schedule, 1.0, rng);
  const Output out = output_distribution(state, 1.0, net, schema, schedule);
  double nats = 0.0;
  std::size_t off = 0;
  for (std::size_t d = 0; d < schema.variables.size(); ++d) {
    const Variable& v = schema.variables[d];
    if (v.kind == VarKind::Continuous) {
      const double sigma1 = continuous_sigma1(schedule);
      const double diff = x[d] - out.values[off];
      nats += 0.5 * (kLn2Pi + 2.0 * std::log(sigma1)) +
              diff * diff / (2.0 * sigma1 * sigma1);
      ++off;
    } else {
      const std::size_t k = static_cast<std::size_t>(v.num_classes);
      const double p = out.values[off + static_cast<std::size_t>(x[d])];
      nats += -std::log(std::max(p, kProbFloor));
      off += k;
    }
  }
  return nats;
}

Row sample(const Net& net, const AccuracySchedule& schedule,
           const DataSchema& schema, Rng& rng, const SampleOptions& opts) {
  schema.validate();
  if (opts.n_steps < 1) {
    throw std::invalid_argument("sample: n_steps must be >= 1");
  }
  const AccuracySchedule sched = schedule.with_steps(opts.n_steps);
  const std::vector<double> alphas = step_alphas(sched);
  const int n = sched.n_steps;
  FlowState state = prior_state(schema);

  for (int i = 1; i <= n; ++i) {
    const double t_prev = static_cast<double>(i - 1) / n;
    const double alpha = alphas[static_cast<std::size_t>(i - 1)];
    const Output out = output_distribution(state, t_prev, net, schema, sched);

    std::vector<double> yc;
    std::size_t off = 0;
    std::size_t ki = 0;
    for (const auto& v : schema.variables) {
      if (v.kind == VarKind::Continuous) {
        yc.push_back(out.values[off] + draw_normal(rng) / std::sqrt(alpha));
        ++off;
      } else {
        const std::size_t k = static_cast<std::size_t>(v.num_classes);
        // Draw a class from the output simplex, then a sender-style sample.
        const double u = draw_uniform(rng);
        std::size_t cls = k - 1;
        double cum = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          cum += out.values[off + j];
          if (u < cum) {
            cls = j;
            break;
          }
        }
        const double kd = static_cast<double>(k);
        const double sd = std::sqrt(alpha * kd);
        NoisySample y;
        y.accuracy = alpha;
        y.values.resize(k);
        for (std::size_t j = 0; j < k; ++j) {
          const double mean = alpha * (kd * (j == cls ? 1.0 : 0.0) - 1.0);
          y.values[j] = mean + sd * draw_normal(rng);
        }
        state.cats[ki] = categorical_update(state.cats[ki], y);
        ++ki;
        off += k;
      }
    }
    if (!yc.empty()) {
      NoisySample y;
      y.accuracy = alpha;
      y.values = std::move(yc);
      state.gauss = gaussian_update(state.gauss, y);
    }
  }

  const Output final_out = output_distribution(state, 1.0, net, schema, sched);
  Row row(schema.total_vars(), 0.0);
  std::size_t off = 0;
  std::size_t d = 0;
  for (const auto& v : schema.variables) {
    if (v.kind == VarKind::Continuous) {
      row[d] = final_out.values[off];
      ++off;
    } else {
      const std::size_t k = static_cast<std::size_t>(v.num_classes);
      std::size_t cls = 0;
      if (opts.categorical_argmax) {
        for (std::size_t j = 1; j < k; ++j) {
          if (final_out.values[off + j] > final_out.values[off + cls]) cls = j;
        }
      } else {
        const double u = draw_uniform(rng);
        double cum = 0.0;
        cls = k - 1;
        for (std::size_t j = 0; j < k; ++j) {
          cum += final_out.values[off + j];
          if (u < cum) {
            cls = j;
            break;
          }
        }
      }
      row[d] = static_cast<double>(cls);
      off += k;
    }
    ++d;
  }
  return row;
}

BatchResult batch_loss_seeded(const std::vector<Row>& rows,
                              const std::vector<std::uint64_t>& seeds,
                              const Net& net, const AccuracySchedule& schedule,
                              const DataSchema& schema, LossKind kind,
                              int mc_samples, int t_samples) {
  if (rows.empty()) throw std::invalid_argument("batch_loss: empty batch");
  if (seeds.size() != rows.size()) {
    throw std::invalid_argument("batch_loss: one seed per row required");
  }
  BatchResult res;
  const bool want_grad = net.differentiable();
  if (want_grad) res.gradient.values.assign(net.param_count(), 0.0);

  double total = 0.0;
  std::vector<double> per_step;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Rng row_rng = make_rng(seeds[i]);
    ParameterVector* gptr = want_grad ? &res.gradient : nullptr;
    LossReport r;
    if (kind == LossKind::DiscreteTime) {
      r = discrete_time_loss(rows[i], net, schedule, schema, row_rng,
                             mc_samples, gptr);
      if (per_step.empty()) per_step.assign(r.per_step.size(), 0.0);
      for (std::size_t s = 0; s < r.per_step.size(); ++s) {
        per_step[s] += r.per_step[s] / static_cast<double>(rows.size());
      }
    } else {
      r = continuous_time_loss(rows[i], net, schedule, schema, row_rng,
                               t_samples, gptr);
    }
    total += r.total_nats / static_cast<double>(rows.size());
  }
  if (want_grad) {
    for (auto& g : res.gradient.values) g /= static_cast<double>(rows.size());
  }
  res.report = make_loss_report(total, std::move(per_step),
                                schema.total_vars());
  return res;
}

BatchResult batch_loss(const std::vector<Row>& rows, const Net& net,
                       const AccuracySchedule& schedule,
                       const DataSchema& schema, Rng& rng, LossKind kind,
                       int mc_samples, int t_samples) {
  std::vector<std::uint64_t> seeds(rows.size());
  for (auto& s : seeds) s = split_seed(rng);
  return batch_loss_seeded(rows, seeds, net, schedule, schema, kind,
                           mc_samples, t_samples);
}

}  // namespace bfn
