#include "pesn/activation.hpp"

#include <cmath>
#include <string>

#include "pesn/errors.hpp"

namespace pesn {

double Tail::power_at(double z, int power) const {
  const double base = kind == Kind::constant ? value : z;
  double out = 1.0;
  for (int i = 0; i < power; ++i) {
    out *= base;
  }
  return out;
}

Activation Activation::make(ActivationId id) {
  switch (id) {
    case ActivationId::tanh:
      return {id, Tail::constant(-1.0), Tail::constant(1.0)};
    case ActivationId::sigmoid:
      return {id, Tail::constant(0.0), Tail::constant(1.0)};
    case ActivationId::swish:
    case ActivationId::relu:
      return {id, Tail::constant(0.0), Tail::linear()};
  }
  throw UnsupportedError("unknown activation");
}

namespace {

double logistic(double z) {
  if (z >= 0.0) {
    return 1.0 / (1.0 + std::exp(-z));
  }
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double Activation::operator()(double z) const {
  switch (id) {
    case ActivationId::tanh:
      return std::tanh(z);
    case ActivationId::sigmoid:
      return logistic(z);
    case ActivationId::swish:  // beta = 1
      return z * logistic(z);
    case ActivationId::relu:
      return z > 0.0 ? z : 0.0;
  }
  return 0.0;
}

std::string_view Activation::name() const { return activation_name(id); }

std::string_view activation_name(ActivationId id) {
  switch (id) {
    case ActivationId::tanh:
      return "tanh";
    case ActivationId::sigmoid:
      return "sigmoid";
    case ActivationId::swish:
      return "swish";
    case ActivationId::relu:
      return "relu";
  }
  return "?";
}

ActivationId parse_activation(std::string_view name) {
  if (name == "tanh") return ActivationId::tanh;
  if (name == "sigmoid") return ActivationId::sigmoid;
  if (name == "swish") return ActivationId::swish;
  if (name == "relu") return ActivationId::relu;
  throw ConfigError("unknown activation '" + std::string(name) + "'");
}

}  // namespace pesn
