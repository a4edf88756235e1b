#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <vector>

#include "faildist/core/errors.hpp"
#include "faildist/core/model.hpp"
#include "faildist/core/parallel.hpp"
#include "faildist/dp/grid.hpp"

namespace faildist::dp {

/// A disturbance model whose states can be placed on, and read off, a pair
/// grid. reconstruct() turns a grid point into a concrete state; project()
/// maps any state back to grid coordinates.
template <class P>
concept GridSubproblem = DisturbanceModel<P> &&
    requires(const P& p, const PairState& ps, const typename P::State& s) {
      { p.reconstruct(ps) } -> std::same_as<typename P::State>;
      { p.project(s) } -> std::same_as<PairState>;
    };

struct SweepInfo {
  std::size_t sweep = 0;
  double residual = 0.0;
};

struct ValueIterationOptions {
  double tol = 1e-6;
  std::size_t max_sweeps = 500;
  std::size_t threads = 1;
  std::size_t pair_index = 0;
  /// Called after every sweep with the freshly written values.
  std::function<void(const SweepInfo&, std::span<const double>)> on_sweep;
};

namespace detail {

struct Transition {
  double constant = 0.0;  // probability mass of successors that are failures
  std::size_t first = 0;  // range into the stencil arrays
  std::size_t count = 0;
};

}  // namespace detail

/// Jacobi value iteration on the reachability Bellman equation, starting from
/// v = 0. Successor classification uses the exact successor state; only
/// non-terminal successors are read through interpolation.
///
/// Returns with converged == false when max_sweeps is hit first.
template <GridSubproblem P>
ValueGrid value_iteration(const P& problem, const GridSpec& spec, const ValueIterationOptions& opt = {}) {
  if (!(opt.tol > 0.0)) throw ContractViolation("value_iteration: tol must be positive");
  spec.validate();
  const std::size_t n = spec.size();

  std::vector<detail::Transition> trans(n);
  std::vector<std::vector<Stencil>> local_stencils(n);
  std::vector<std::vector<double>> local_probs(n);
  parallel_for(n, opt.threads, [&](std::size_t i) {
    const auto s = problem.reconstruct(spec.point(i));
    auto& t = trans[i];
    if (problem.is_failure(s)) {
      t.constant = 1.0;
      return;
    }
    if (problem.is_terminal(s)) return;
    const std::size_t nx = problem.num_disturbances(s);
    for (std::size_t x = 0; x < nx; ++x) {
      const double p = std::exp(problem.disturbance_logprob(x, s));
      const auto next = problem.step(s, x);
      if (problem.is_failure(next)) {
        t.constant += p;
      } else if (!problem.is_terminal(next)) {
        local_stencils[i].push_back(make_stencil(spec, problem.project(next)));
        local_probs[i].push_back(p);
      }
    }
  });

  std::vector<Stencil> stencils;
  std::vector<double> probs;
  for (std::size_t i = 0; i < n; ++i) {
    trans[i].first = stencils.size();
    trans[i].count = local_stencils[i].size();
    stencils.insert(stencils.end(), local_stencils[i].begin(), local_stencils[i].end());
    probs.insert(probs.end(), local_probs[i].begin(), local_probs[i].end());
    std::vector<Stencil>().swap(local_stencils[i]);
    std::vector<double>().swap(local_probs[i]);
  }

  std::vector<double> v(n, 0.0), next(n, 0.0);
  std::size_t sweeps = 0;
  double residual = 0.0;
  bool converged = false;
  while (sweeps < opt.max_sweeps) {
    parallel_for(n, opt.threads, [&](std::size_t i) {
      const auto& t = trans[i];
      double total = t.constant;
      for (std::size_t k = t.first; k < t.first + t.count; ++k) {
        total += probs[k] * evaluate_stencil(spec, stencils[k], v);
      }
      next[i] = std::min(total, 1.0);
    });
    ++sweeps;
    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (next[i] < v[i]) throw ContractViolation("value_iteration: sweep decreased a value");
      residual = std::max(residual, next[i] - v[i]);
    }
    v.swap(next);
    if (opt.on_sweep) opt.on_sweep(SweepInfo{sweeps, residual}, v);
    if (residual < opt.tol) {
      converged = true;
      break;
    }
  }

  ValueGrid grid(spec, std::move(v), opt.pair_index);
  grid.residual = residual;
  grid.sweeps = sweeps;
  grid.converged = converged;
  return grid;
}

}  // namespace faildist::dp
