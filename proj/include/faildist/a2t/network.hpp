#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

#include "faildist/core/rng.hpp"

namespace faildist::a2t {

struct A2TShape {
  std::size_t inputs = 0;
  std::size_t solutions = 0;  // m
  std::size_t base_hidden = 32;
  std::size_t attention_hidden = 32;

  std::size_t num_params() const;
  bool operator==(const A2TShape&) const = default;
};

/// Attend-adapt-transfer value network:
///   out = w0(x) * base(x) + sum_i w_i(x) * u_i
/// base is a 2-hidden-layer relu MLP with a logistic output, w is the softmax
/// of a 1-hidden-layer relu MLP with m + 1 outputs, u are the (frozen)
/// sub-solution values for the same state.
///
/// All weights live in one flat vector so optimizers and gradient checks can
/// treat them uniformly. Matrices are row-major (out x in), each followed by
/// its bias: base W1 b1 W2 b2 W3 b3, then attention A1 c1 A2 c2.
class A2TNetwork {
 public:
  A2TNetwork() = default;
  explicit A2TNetwork(A2TShape shape);

  /// Uniform in +-1/sqrt(fan_in) for every weight and bias.
  void initialize(Rng& rng);

  const A2TShape& shape() const { return shape_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  double forward(std::span<const double> x, std::span<const double> u) const;
  double base_value(std::span<const double> x) const;
  std::vector<double> attention(std::span<const double> x) const;
  std::vector<double> attention_logits(std::span<const double> x) const;

  /// Adds scale * d(out)/d(theta) to grad and returns out.
  double accumulate_gradient(std::span<const double> x, std::span<const double> u, double scale,
                             std::span<double> grad) const;

  bool operator==(const A2TNetwork&) const = default;

 private:
  struct Offsets {
    std::size_t w1, b1, w2, b2, w3, b3, a1, c1, a2, c2, end;
  };
  Offsets offsets() const;

  A2TShape shape_;
  std::vector<double> params_;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace faildist::a2t
