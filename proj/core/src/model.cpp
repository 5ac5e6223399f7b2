#include "bfn/model.hpp"

#include <cmath>
#include <stdexcept>

namespace bfn {

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::Tanh:
      return std::tanh(x);
    case Activation::Relu:
      return x > 0.0 ? x : 0.0;
    case Activation::Silu:
      return x / (1.0 + std::exp(-x));
  }
  return x;
}

double activate_grad(Activation a, double x) {
  switch (a) {
    case Activation::Tanh: {
      const double th = std::tanh(x);
      return 1.0 - th * th;
    }
    case Activation::Relu:
      return x > 0.0 ? 1.0 : 0.0;
    case Activation::Silu: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 + x * (1.0 - s));
    }
  }
  return 1.0;
}

struct Trace {
  // activations[l] is the input to layer l; preacts[l] its affine output.
  std::vector<std::vector<double>> activations;
  std::vector<std::vector<double>> preacts;
  std::vector<double> output;
};

Trace run_forward(const NetworkSpec& spec, const ParameterVector& params,
                  const std::vector<double>& xi, double t) {
  spec.validate();
  if (static_cast<int>(xi.size()) != spec.input_width) {
    throw std::invalid_argument("forward: input width mismatch");
  }
  if (!(t >= 0.0 && t <= 1.0)) {
    throw std::domain_error("forward: t must lie in [0,1]");
  }
  if (static_cast<int>(params.size()) != spec.param_count()) {
    throw std::invalid_argument("forward: parameter count mismatch");
  }

  const std::vector<int> widths = spec.layer_widths();
  const std::size_t layers = widths.size() - 1;

  Trace tr;
  tr.activations.resize(layers);
  tr.preacts.resize(layers);

  std::vector<double> a = xi;
  const std::vector<double> emb = time_features(spec.time_embedding, t);
  a.insert(a.end(), emb.begin(), emb.end());

  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    tr.activations[l] = a;
    std::vector<double> z(static_cast<std::size_t>(out));
    for (int r = 0; r < out; ++r) {
      double acc = params[off + static_cast<std::size_t>(out) * in + r];  // bias
      const std::size_t row = off + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) acc += params[row + c] * a[c];
      z[static_cast<std::size_t>(r)] = acc;
    }
    tr.preacts[l] = z;
    off += static_cast<std::size_t>(out) * in + out;
    if (l + 1 < layers) {
      for (auto& v : z) v = activate(spec.activation, v);
    }
    a = std::move(z);
  }

  for (int r = 0; r < spec.output_width; ++r) {
    if (!spec.squash.empty() && spec.squash[static_cast<std::size_t>(r)]) {
      a[static_cast<std::size_t>(r)] = std::tanh(a[static_cast<std::size_t>(r)]);
    }
    if (!std::isfinite(a[static_cast<std::size_t>(r)])) {
      throw std::runtime_error("forward: non-finite activation");
    }
  }
  tr.output = std::move(a);
  return tr;
}

}  // namespace

void NetworkSpec::validate() const {
  if (input_width < 1 || output_width < 1) {
    throw std::invalid_argument("network widths must be >= 1");
  }
  if (hidden_widths.empty()) {
    throw std::invalid_argument("at least one hidden layer required");
  }
  for (int w : hidden_widths) {
    if (w < 1) throw std::invalid_argument("hidden widths must be >= 1");
  }
  if (time_embedding.kind == TimeEmbedding::Kind::Sinusoidal &&
      time_embedding.frequencies < 1) {
    throw std::invalid_argument("sinusoidal embedding needs >= 1 frequency");
  }
  if (!squash.empty() && static_cast<int>(squash.size()) != output_width) {
    throw std::invalid_argument("squash mask must match output width");
  }
}

std::vector<int> NetworkSpec::layer_widths() const {
  std::vector<int> w;
  w.push_back(input_width + time_embedding.width());
  for (int h : hidden_widths) w.push_back(h);
  w.push_back(output_width);
  return w;
}

int NetworkSpec::param_count() const {
  const std::vector<int> w = layer_widths();
  int n = 0;
  for (std::size_t l = 0; l + 1 < w.size(); ++l) {
    n += w[l] * w[l + 1] + w[l + 1];
  }
  return n;
}

ParameterVector zero_params(const NetworkSpec& spec) {
  ParameterVector p;
  p.values.assign(static_cast<std::size_t>(spec.param_count()), 0.0);
  return p;
}

ParameterVector init_params(const NetworkSpec& spec, Rng& rng) {
  spec.validate();
  ParameterVector p = zero_params(spec);
  const std::vector<int> widths = spec.layer_widths();
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const int in = widths[l];
    const int out = widths[l + 1];
    const double bound = std::sqrt(6.0 / (in + out));
    for (int i = 0; i < out * in; ++i) {
      p[off + static_cast<std::size_t>(i)] =
          bound * (2.0 * draw_uniform(rng) - 1.0);
    }
    off += static_cast<std::size_t>(out) * in + out;  // biases stay zero
  }
  return p;
}

std::vector<double> time_features(const TimeEmbedding& emb, double t) {
  if (emb.kind == TimeEmbedding::Kind::ScalarConcat) return {t};
  std::vector<double> f;
  f.reserve(static_cast<std::size_t>(2 * emb.frequencies));
  double freq = 1.0;
  for (int j = 0; j < emb.frequencies; ++j) {
    const double arg = freq * 3.14159265358979323846 * t;
    f.push_back(std::sin(arg));
    f.push_back(std::cos(arg));
    freq *= 2.0;
  }
  return f;
}

std::vector<double> forward(const NetworkSpec& spec,
                            const ParameterVector& params,
                            const std::vector<double>& xi, double t) {
  return run_forward(spec, params, xi, t).output;
}

ParameterVector backward(const NetworkSpec& spec, const ParameterVector& params,
                         const std::vector<double>& xi, double t,
                         const std::vector<double>& upstream) {
  if (static_cast<int>(upstream.size()) != spec.output_width) {
    throw std::invalid_argument("backward: upstream width mismatch");
  }
  const Trace tr = run_forward(spec, params, xi, t);
  const std::vector<int> widths = spec.layer_widths();
  const std::size_t layers = widths.size() - 1;

  ParameterVector grad = zero_params(spec);

  // Head: tanh derivative where squashed, identity elsewhere.
  std::vector<double> delta(upstream);
  for (int r = 0; r < spec.output_width; ++r) {
    if (!spec.squash.empty() && spec.squash[static_cast<std::size_t>(r)]) {
      const double o = tr.output[static_cast<std::size_t>(r)];
      delta[static_cast<std::size_t>(r)] *= 1.0 - o * o;
    }
  }

  // Offsets of each layer's parameter block.
  std::vector<std::size_t> offsets(layers);
  std::size_t off = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(widths[l]) * widths[l + 1] + widths[l + 1];
  }

  for (std::size_t l = layers; l-- > 0;) {
    const int in = widths[l];
    const int out = widths[l + 1];
    const std::vector<double>& a = tr.activations[l];
    const std::size_t base = offsets[l];
    for (int r = 0; r < out; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      const std::size_t row = base + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) grad[row + c] += d * a[static_cast<std::size_t>(c)];
      grad[base + static_cast<std::size_t>(out) * in + r] += d;
    }
    if (l == 0) break;
    std::vector<double> prev(static_cast<std::size_t>(in), 0.0);
    for (int r = 0; r < out; ++r) {
      const double d = delta[static_cast<std::size_t>(r)];
      const std::size_t row = base + static_cast<std::size_t>(r) * in;
      for (int c = 0; c < in; ++c) prev[static_cast<std::size_t>(c)] += params[row + c] * d;
    }
    const std::vector<double>& z = tr.preacts[l - 1];
    for (int c = 0; c < in; ++c) {
      prev[static_cast<std::size_t>(c)] *=
          activate_grad(spec.activation, z[static_cast<std::size_t>(c)]);
    }
    delta = std::move(prev);
  }
  return grad;
}

OptimizerState OptimizerState::sgd(double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  OptimizerState s;
  s.kind = Kind::Sgd;
  s.learning_rate = lr;
  return s;
}

OptimizerState OptimizerState::adam(double lr) {
  if (!(lr > 0.0)) throw std::invalid_argument("learning rate must be > 0");
  OptimizerState s;
  s.kind = Kind::Adam;
  s.learning_rate = lr;
  return s;
}

void optimizer_step(OptimizerState& state, ParameterVector& params,
                    const ParameterVector& gradient) {
  const std::size_t n = params.size();
  if (gradient.size() != n) {
    throw std::invalid_argument("optimizer_step: shape mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(gradient[i])) {
      throw std::runtime_error("optimizer_step: non-finite gradient, step rejected");
    }
  }
  if (state.kind == OptimizerState::Kind::Sgd) {
    for (std::size_t i = 0; i < n; ++i) {
      params[i] -= state.learning_rate * gradient[i];
    }
    ++state.step;
    return;
  }
  if (state.m.size() != n) {
    state.m.assign(n, 0.0);
    state.v.assign(n, 0.0);
  }
  ++state.step;
  const double b1 = state.beta1;
  const double b2 = state.beta2;
  const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < n; ++i) {
    state.m[i] = b1 * state.m[i] + (1.0 - b1) * gradient[i];
    state.v[i] = b2 * state.v[i] + (1.0 - b2) * gradient[i] * gradient[i];
    const double mh = state.m[i] / bc1;
    const double vh = state.v[i] / bc2;
    params[i] -= state.learning_rate * mh / (std::sqrt(vh) + state.epsilon);
  }
}

void add_scaled(ParameterVector& dst, const ParameterVector& src,
                double scale) {
  if (dst.size() != src.size()) {
    throw std::invalid_argument("add_scaled: shape mismatch");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

}  // namespace bfn
