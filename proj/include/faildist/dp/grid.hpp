#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <vector>

namespace faildist::dp {

inline constexpr std::size_t kContinuousDims = 4;
inline constexpr std::size_t kDiscreteDims = 2;

/// Uniformly spaced knots on [lo, hi]. A single-knot axis is degenerate:
/// every query maps onto its only knot.
struct Axis {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t knots = 1;

  double knot(std::size_t i) const {
    return knots == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(knots - 1);
  }
  bool operator==(const Axis&) const = default;
};

/// Reduced ego/adversary state: (ego pos, ego vel, adv pos, adv vel) plus
/// (adv blinker, adv route bit).
struct PairState {
  std::array<double, kContinuousDims> continuous{};
  std::array<int, kDiscreteDims> discrete{};

  bool operator==(const PairState&) const = default;
};

/// Tensor grid over the pair state. Storage is row-major with continuous
/// axes first (axis 0 slowest) followed by the discrete axes.
struct GridSpec {
  std::array<Axis, kContinuousDims> axes{};
  std::array<std::size_t, kDiscreteDims> discrete_sizes{1, 1};

  std::size_t size() const;
  std::array<std::size_t, kContinuousDims + kDiscreteDims> strides() const;
  /// Grid point of a flat index, as the pair state sitting exactly on it.
  PairState point(std::size_t flat) const;
  void validate() const;
  bool operator==(const GridSpec&) const = default;
};

/// Interpolation stencil: flat index of the lower corner and the per-axis
/// fraction toward the upper corner (0 on degenerate axes).
struct Stencil {
  std::size_t base = 0;
  std::array<double, kContinuousDims> frac{};
};

/// Clamps a query into the grid and builds its multilinear stencil. Discrete
/// coordinates must be in range.
Stencil make_stencil(const GridSpec& spec, const PairState& query);

/// Evaluates a stencil against a value array laid out per `spec`.
double evaluate_stencil(const GridSpec& spec, const Stencil& st, std::span<const double> values);

/// Discretized failure probability for one ego/adversary subproblem.
class ValueGrid {
 public:
  ValueGrid() = default;
  ValueGrid(GridSpec spec, std::vector<double> values, std::size_t pair_index);

  const GridSpec& spec() const { return spec_; }
  std::span<const double> values() const { return values_; }
  std::size_t pair_index() const { return pair_index_; }
  void set_pair_index(std::size_t i) { pair_index_ = i; }

  /// Multilinear on the continuous axes (clamped to range), exact on the
  /// discrete axes. Result lies in [0, 1].
  double interpolate(const PairState& query) const;

  // Solver diagnostics.
  double residual = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;

  void save(const std::filesystem::path& path) const;
  static ValueGrid load(const std::filesystem::path& path);

  bool operator==(const ValueGrid&) const = default;

 private:
  GridSpec spec_;
  std::vector<double> values_;
  std::size_t pair_index_ = 0;
};

}  // namespace faildist::dp
