#include "bfn/serialize.hpp"

#include <stdexcept>

namespace bfn {

namespace {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Tanh:
      return "tanh";
    case Activation::Relu:
      return "relu";
    case Activation::Silu:
      return "silu";
  }
  return "silu";
}

Activation activation_from(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "silu") return Activation::Silu;
  throw std::invalid_argument("unknown activation: " + s);
}

}  // namespace

void to_json(json& j, const AccuracySchedule& s) {
  j = json{{"kind", s.kind == ScheduleKind::Continuous ? "continuous"
                                                       : "categorical"},
           {"n_steps", s.n_steps}};
  if (s.kind == ScheduleKind::Continuous) {
    j["sigma1"] = s.sigma1;
  } else {
    j["beta1"] = s.beta1;
  }
}

void from_json(const json& j, AccuracySchedule& s) {
  const std::string kind = j.at("kind").get<std::string>();
  const int n = j.value("n_steps", 20);
  if (kind == "continuous") {
    s = AccuracySchedule::continuous(j.value("sigma1", 0.02), n);
  } else if (kind == "categorical") {
    s = AccuracySchedule::categorical(j.value("beta1", 4.0), n);
  } else {
    throw std::invalid_argument("unknown schedule kind: " + kind);
  }
}

void to_json(json& j, const NetworkSpec& s) {
  j = json{{"input_width", s.input_width},
           {"hidden_widths", s.hidden_widths},
           {"output_width", s.output_width},
           {"activation", activation_name(s.activation)},
           {"squash", s.squash}};
  if (s.time_embedding.kind == TimeEmbedding::Kind::ScalarConcat) {
    j["time_embedding"] = json{{"kind", "scalar-concat"}};
  } else {
    j["time_embedding"] = json{{"kind", "sinusoidal"},
                               {"frequencies", s.time_embedding.frequencies}};
  }
}

void from_json(const json& j, NetworkSpec& s) {
  s.input_width = j.at("input_width").get<int>();
  s.hidden_widths = j.at("hidden_widths").get<std::vector<int>>();
  s.output_width = j.at("output_width").get<int>();
  s.activation = activation_from(j.value("activation", "silu"));
  s.squash = j.value("squash", std::vector<std::uint8_t>{});
  const json emb = j.value("time_embedding", json{{"kind", "sinusoidal"}});
  const std::string kind = emb.at("kind").get<std::string>();
  if (kind == "scalar-concat") {
    s.time_embedding = {TimeEmbedding::Kind::ScalarConcat, 0};
  } else if (kind == "sinusoidal") {
    s.time_embedding = {TimeEmbedding::Kind::Sinusoidal,
                        emb.value("frequencies", 8)};
  } else {
    throw std::invalid_argument("unknown time embedding: " + kind);
  }
  s.validate();
}

void to_json(json& j, const Variable& v) {
  if (v.kind == VarKind::Continuous) {
    j = json{{"kind", "continuous"}};
  } else {
    j = json{{"kind", "categorical"}, {"num_classes", v.num_classes}};
  }
}

void from_json(const json& j, Variable& v) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "continuous") {
    v = Variable{VarKind::Continuous, 0};
  } else if (kind == "categorical") {
    v = Variable{VarKind::Categorical, j.at("num_classes").get<int>()};
  } else {
    throw std::invalid_argument("unknown variable kind: " + kind);
  }
}

void to_json(json& j, const DataSchema& s) {
  j = json{{"variables", s.variables}};
}

void from_json(const json& j, DataSchema& s) {
  s.variables = j.at("variables").get<std::vector<Variable>>();
  s.validate();
}

void to_json(json& j, const ColumnCodec& c) {
  j = json{{"name", c.name}};
  if (c.kind == VarKind::Continuous) {
    j["kind"] = "continuous";
    j["lo"] = c.lo;
    j["hi"] = c.hi;
  } else {
    j["kind"] = "categorical";
    j["vocab"] = c.vocab;
  }
}

void from_json(const json& j, ColumnCodec& c) {
  c.name = j.at("name").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "continuous") {
    c.kind = VarKind::Continuous;
    c.lo = j.at("lo").get<double>();
    c.hi = j.at("hi").get<double>();
  } else {
    c.kind = VarKind::Categorical;
    c.vocab = j.at("vocab").get<std::vector<std::string>>();
  }
}

}  // namespace bfn
