#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

#include "faildist/a2t/network.hpp"
#include "faildist/dp/grid.hpp"
#include "faildist/sim/simulator.hpp"

namespace faildist::a2t {

/// One regression example: encoded state, sub-solution values, target return.
struct Sample {
  std::vector<double> x;
  std::vector<double> u;
  double target = 0.0;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

/// Mean squared error between the network output and the targets, and its
/// exact gradient with respect to every network parameter.
LossAndGradient loss_and_gradient(const A2TNetwork& net, std::span<const Sample> batch);

/// Affine feature scaling x = (raw - offset) / scale.
struct FeatureScaling {
  std::vector<double> offset;
  std::vector<double> scale;

  bool operator==(const FeatureScaling&) const = default;
};

/// Turns a scene into (pos, vel, blinker, intended route) per vehicle, ego
/// first, normalized to [0, 1] by the DP grid ranges, plus the interpolated
/// value of every pair sub-solution.
class SceneEncoder {
 public:
  SceneEncoder(const sim::Simulator& sim, std::vector<std::shared_ptr<const dp::ValueGrid>> solutions);
  SceneEncoder(FeatureScaling scaling, std::vector<std::shared_ptr<const dp::ValueGrid>> solutions);

  std::size_t num_features() const { return scaling_.offset.size(); }
  std::size_t num_solutions() const { return solutions_.size(); }
  const FeatureScaling& scaling() const { return scaling_; }
  const std::vector<std::shared_ptr<const dp::ValueGrid>>& solutions() const { return solutions_; }

  /// Throws ContractViolation when the scene's adversary count differs from
  /// the number of solutions.
  void encode(const sim::SceneState& s, std::vector<double>& x, std::vector<double>& u) const;

 private:
  FeatureScaling scaling_;
  std::vector<std::shared_ptr<const dp::ValueGrid>> solutions_;
};

/// Default scaling for a scenario: positions by the longest route, speeds by max_speed.
FeatureScaling default_scaling(const sim::Simulator& sim);

/// A network bound to an encoder, usable wherever a value function is expected.
template <class Encoder>
class EncodedValueFunction {
 public:
  EncodedValueFunction(const A2TNetwork& net, const Encoder& enc) : net_(&net), enc_(&enc) {}

  template <class State>
  double operator()(const State& s) const {
    thread_local std::vector<double> x, u;
    enc_->encode(s, x, u);
    return net_->forward(x, u);
  }

 private:
  const A2TNetwork* net_;
  const Encoder* enc_;
};

struct Checkpoint {
  A2TNetwork net;
  FeatureScaling scaling;

  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);
};

}  // namespace faildist::a2t
