#pragma once

#include <string>
#include <string_view>

namespace pesn {

enum class ActivationId { tanh, sigmoid, swish, relu };

/// Behaviour of an activation outside the spline interval.
struct Tail {
  enum class Kind { constant, linear };
  Kind kind = Kind::constant;
  double value = 0.0;  ///< used when kind == constant

  [[nodiscard]] static constexpr Tail constant(double c) { return {Kind::constant, c}; }
  [[nodiscard]] static constexpr Tail linear() { return {Kind::linear, 0.0}; }

  /// Tail model of f^power evaluated at z.
  [[nodiscard]] double power_at(double z, int power) const;
};

struct Activation {
  ActivationId id = ActivationId::tanh;
  Tail left;
  Tail right;

  [[nodiscard]] static Activation make(ActivationId id);

  [[nodiscard]] double operator()(double z) const;

  /// True when the spline error bound applies (f is C^4).
  [[nodiscard]] bool smooth() const { return id != ActivationId::relu; }

  [[nodiscard]] std::string_view name() const;
};

[[nodiscard]] ActivationId parse_activation(std::string_view name);
[[nodiscard]] std::string_view activation_name(ActivationId id);

}  // namespace pesn
