#ifndef BFN_MODEL_HPP
#define BFN_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bfn/rng.hpp"

namespace bfn {

enum class Activation { Tanh, Relu, Silu };

struct TimeEmbedding {
  enum class Kind { ScalarConcat, Sinusoidal };
  Kind kind = Kind::Sinusoidal;
  int frequencies = 8;  // sinusoidal only

  int width() const {
    return kind == Kind::ScalarConcat ? 1 : 2 * frequencies;
  }
};

// Small feedforward network conditioned on time. Outputs flagged in
// `squash` pass through tanh (continuous heads); the rest are raw scores.
struct NetworkSpec {
  int input_width = 1;
  std::vector<int> hidden_widths = {256, 256};
  int output_width = 1;
  Activation activation = Activation::Silu;
  TimeEmbedding time_embedding;
  std::vector<std::uint8_t> squash;  // per output; empty = none squashed

  int param_count() const;
  std::vector<int> layer_widths() const;  // [input+embed, hidden..., output]
  void validate() const;
};

struct ParameterVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

ParameterVector zero_params(const NetworkSpec& spec);
ParameterVector init_params(const NetworkSpec& spec, Rng& rng);

std::vector<double> time_features(const TimeEmbedding& emb, double t);

// Deterministic forward pass; xi length must equal spec.input_width.
std::vector<double> forward(const NetworkSpec& spec,
                            const ParameterVector& params,
                            const std::vector<double>& xi, double t);

// Reverse-mode gradient of <upstream, forward(...)> with respect to params.
ParameterVector backward(const NetworkSpec& spec, const ParameterVector& params,
                         const std::vector<double>& xi, double t,
                         const std::vector<double>& upstream);

struct OptimizerState {
  enum class Kind { Sgd, Adam };
  Kind kind = Kind::Adam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<double> m;  // adam first moment
  std::vector<double> v;  // adam second moment

  static OptimizerState sgd(double lr);
  static OptimizerState adam(double lr);
};

// Applies one update in place; rejects non-finite gradients.
void optimizer_step(OptimizerState& state, ParameterVector& params,
                    const ParameterVector& gradient);

void add_scaled(ParameterVector& dst, const ParameterVector& src,
                double scale);

}  // namespace bfn

#endif
