#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "faildist/core/errors.hpp"
#include "faildist/core/rng.hpp"
#include "faildist/dp/grid.hpp"
#include "faildist/dp/pair.hpp"
#include "faildist/dp/value_iteration.hpp"
#include "support/chain_mdp.hpp"

using namespace faildist;
using namespace faildist::dp;
using faildist::testing::ChainMdp;
using faildist::testing::ChainState;

namespace {

GridSpec small_spec() {
  GridSpec g;
  g.axes[0] = {0.0, 1.0, 3};
  g.axes[1] = {-2.0, 2.0, 4};
  g.axes[2] = {5.0, 9.0, 2};
  g.axes[3] = {0.0, 3.0, 5};
  g.discrete_sizes = {2, 2};
  return g;
}

std::vector<double> random_values(std::size_t n, std::uint64_t seed) {
  Rng rng = make_stream(seed);
  std::vector<double> v(n);
  for (double& x : v) x = uniform01(rng);
  return v;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("faildist_test_" + name);
}

}  // namespace

TEST(Grid, InterpolationReproducesKnots) {
  const GridSpec spec = small_spec();
  const ValueGrid grid(spec, random_values(spec.size(), 1), 0);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    EXPECT_DOUBLE_EQ(grid.interpolate(spec.point(i)), grid.values()[i]);
  }
}

TEST(Grid, MidpointIsLinear) {
  GridSpec spec;
  spec.axes[0] = {0.0, 1.0, 2};
  ValueGrid grid(spec, {0.2, 0.4}, 0);
  PairState q;
  q.continuous[0] = 0.5;
  EXPECT_NEAR(grid.interpolate(q), 0.3, 1e-15);
}

TEST(Grid, RandomQueryMatchesCornerExpansion) {
  const GridSpec spec = small_spec();
  const ValueGrid grid(spec, random_values(spec.size(), 2), 0);
  const auto strides = spec.strides();
  Rng rng = make_stream(3);
  for (int trial = 0; trial < 200; ++trial) {
    PairState q;
    std::array<std::size_t, 4> lo{};
    std::array<double, 4> f{};
    for (std::size_t d = 0; d < 4; ++d) {
      const Axis& a = spec.axes[d];
      q.continuous[d] = uniform(rng, a.lo, a.hi);
      const double t = (q.continuous[d] - a.lo) / (a.hi - a.lo) * static_cast<double>(a.knots - 1);
      lo[d] = std::min<std::size_t>(static_cast<std::size_t>(t), a.knots - 2);
      f[d] = t - static_cast<double>(lo[d]);
    }
    q.discrete = {static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
    double expected = 0.0;
    for (int corner = 0; corner < 16; ++corner) {
      double w = 1.0;
      std::size_t flat = static_cast<std::size_t>(q.discrete[0]) * strides[4] +
                         static_cast<std::size_t>(q.discrete[1]) * strides[5];
      for (std::size_t d = 0; d < 4; ++d) {
        const bool up = (corner >> d) & 1;
        w *= up ? f[d] : 1.0 - f[d];
        flat += (lo[d] + (up ? 1 : 0)) * strides[d];
      }
      expected += w * grid.values()[flat];
    }
    EXPECT_NEAR(grid.interpolate(q), expected, 1e-12);
  }
}

TEST(Grid, OutOfRangeQueriesClamp) {
  GridSpec spec;
  spec.axes[0] = {0.0, 1.0, 2};
  ValueGrid grid(spec, {0.2, 0.4}, 0);
  PairState q;
  q.continuous[0] = -5.0;
  EXPECT_DOUBLE_EQ(grid.interpolate(q), 0.2);
  q.continuous[0] = 7.0;
  EXPECT_DOUBLE_EQ(grid.interpolate(q), 0.4);
}

TEST(Grid, DiscreteOutOfRangeThrows) {
  const GridSpec spec = small_spec();
  const ValueGrid grid(spec, random_values(spec.size(), 4), 0);
  PairState q;
  q.discrete = {2, 0};
  EXPECT_THROW(grid.interpolate(q), ContractViolation);
}

TEST(Grid, SaveLoadRoundTrip) {
  const GridSpec spec = small_spec();
  ValueGrid grid(spec, random_values(spec.size(), 5), 3);
  grid.residual = 1.5e-7;
  grid.sweeps = 42;
  grid.converged = true;
  const auto path = temp_file("grid.fdvg");
  grid.save(path);
  EXPECT_EQ(ValueGrid::load(path), grid);
  std::filesystem::remove(path);
}

TEST(Grid, LoadRejectsGarbageAndTruncation) {
  const auto path = temp_file("bad.fdvg");
  {
    std::ofstream out(path, std::ios::binary);
    out << "not a grid";
  }
  EXPECT_THROW(ValueGrid::load(path), FormatError);
  const GridSpec spec = small_spec();
  ValueGrid(spec, random_values(spec.size(), 6), 0).save(path);
  std::filesystem::resize_file(path, std::filesystem::file_size(path) - 8);
  EXPECT_THROW(ValueGrid::load(path), FormatError);
  std::filesystem::remove(path);
}

TEST(ValueIteration, ChainMatchesEnumeration) {
  const ChainMdp m;
  const GridSpec spec = ChainMdp::grid();
  const ValueGrid grid = value_iteration(m, spec);
  EXPECT_TRUE(grid.converged);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const ChainState s = m.reconstruct(spec.point(i));
    EXPECT_NEAR(grid.values()[i], faildist::testing::exact_value(m, s), 1e-9) << "k=" << s.k << " t=" << s.t;
  }
}

TEST(ValueIteration, SweepsAreMonotoneAndBounded) {
  const ChainMdp m;
  std::vector<double> prev(ChainMdp::grid().size(), 0.0);
  std::size_t calls = 0;
  ValueIterationOptions opt;
  opt.on_sweep = [&](const SweepInfo&, std::span<const double> v) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      EXPECT_GE(v[i], prev[i]);
      EXPECT_GE(v[i], 0.0);
      EXPECT_LE(v[i], 1.0);
    }
    prev.assign(v.begin(), v.end());
    ++calls;
  };
  value_iteration(m, ChainMdp::grid(), opt);
  EXPECT_GT(calls, 1u);
}

TEST(ValueIteration, NonConvergenceIsFlaggedNotThrown) {
  const ChainMdp m;
  ValueIterationOptions opt;
  opt.max_sweeps = 2;
  const ValueGrid grid = value_iteration(m, ChainMdp::grid(), opt);
  EXPECT_FALSE(grid.converged);
  EXPECT_EQ(grid.sweeps, 2u);
  EXPECT_GT(grid.residual, opt.tol);
}

TEST(ValueIteration, RejectsNonPositiveTolerance) {
  ValueIterationOptions opt;
  opt.tol = 0.0;
  EXPECT_THROW(value_iteration(ChainMdp{}, ChainMdp::grid(), opt), ContractViolation);
}

TEST(ValueIteration, ThreadCountDoesNotChangeResult) {
  ValueIterationOptions one, four;
  four.threads = 4;
  EXPECT_EQ(value_iteration(ChainMdp{}, ChainMdp::grid(), one), value_iteration(ChainMdp{}, ChainMdp::grid(), four));
}

class PairGrid : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    sub_ = new PairSubproblem(sim::default_scenario("two_car"), 0);
    grid_ = new ValueGrid(value_iteration(*sub_, sub_->default_grid(7)));
  }
  static void TearDownTestSuite() {
    delete grid_;
    delete sub_;
  }
  static PairSubproblem* sub_;
  static ValueGrid* grid_;
};
PairSubproblem* PairGrid::sub_ = nullptr;
ValueGrid* PairGrid::grid_ = nullptr;

TEST_F(PairGrid, FailureAndExitPointsAreExact) {
  const GridSpec& spec = grid_->spec();
  std::size_t failures = 0, exits = 0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto s = sub_->reconstruct(spec.point(i));
    const double v = grid_->values()[i];
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    if (sub_->is_failure(s)) {
      EXPECT_EQ(v, 1.0);
      ++failures;
    } else if (sub_->is_terminal(s)) {
      EXPECT_EQ(v, 0.0);
      ++exits;
    }
  }
  EXPECT_GT(failures, 0u);
  // The ego only exits strictly past the end of its route, beyond the last knot.
  EXPECT_EQ(exits, 0u);
}

TEST_F(PairGrid, ConvergedGridIsAFixedPoint) {
  ASSERT_TRUE(grid_->converged);
  // One more Bellman backup through the same interpolation changes nothing beyond tol.
  const GridSpec& spec = grid_->spec();
  double worst = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto s = sub_->reconstruct(spec.point(i));
    if (sub_->is_terminal(s)) continue;
    double total = 0.0;
    for (std::size_t x = 0; x < sub_->num_disturbances(s); ++x) {
      const auto next = sub_->step(s, x);
      const double p = std::exp(sub_->disturbance_logprob(x, s));
      if (sub_->is_failure(next)) {
        total += p;
      } else if (!sub_->is_terminal(next)) {
        total += p * grid_->interpolate(sub_->project(next));
      }
    }
    worst = std::max(worst, std::abs(std::min(total, 1.0) - grid_->values()[i]));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(PairProjection, RoundTripThroughReconstruction) {
  const PairSubproblem sub(sim::default_scenario("two_car"), 0);
  const GridSpec spec = sub.default_grid(5);
  for (std::size_t i = 0; i < spec.size(); i += 37) {
    const PairState ps = spec.point(i);
    const auto scene = sub.reconstruct(ps);
    EXPECT_EQ(scene.step_index, 0);
    EXPECT_EQ(sub.project(scene), ps);
  }
}

TEST(PairProjection, SelectsOneAdversary) {
  const sim::Simulator s(sim::default_scenario("five_car"));
  Rng rng = make_stream(8);
  const auto scene = s.initial_scene(rng);
  const PairState ps = pair_projection(scene, 2);
  const auto& a = scene.adversaries[2];
  EXPECT_EQ(ps.continuous[0], scene.ego.pos);
  EXPECT_EQ(ps.continuous[1], scene.ego.vel);
  EXPECT_EQ(ps.continuous[2], a.pos);
  EXPECT_EQ(ps.continuous[3], a.vel);
  EXPECT_EQ(ps.discrete[0], a.blinker ? 1 : 0);
  EXPECT_EQ(ps.discrete[1], a.intent_turn ? 1 : 0);
  EXPECT_THROW(pair_projection(scene, 4), ContractViolation);
}

TEST(PairProjection, TwoCarSceneIsIdentityEquivalent) {
  const PairSubproblem sub(sim::default_scenario("two_car"), 0);
  Rng rng = make_stream(9);
  const auto scene = sub.simulator().initial_scene(rng);
  EXPECT_EQ(sub.reconstruct(pair_projection(scene, 0)).adversaries, scene.adversaries);
  EXPECT_EQ(sub.reconstruct(pair_projection(scene, 0)).ego, scene.ego);
}

TEST(PairProjection, DefaultGridFollowsTheStatedShape) {
  const PairSubproblem sub(sim::default_scenario("two_car"), 0);
  const GridSpec g = sub.default_grid();
  for (const Axis& a : g.axes) EXPECT_EQ(a.knots, kDefaultKnots);
  EXPECT_EQ(g.discrete_sizes[0], 2u);
  EXPECT_EQ(g.discrete_sizes[1], 2u);
  EXPECT_EQ(g.axes[1].hi, 32.0);
  EXPECT_EQ(g.axes[3].hi, 32.0);
  // 15 x 15 positions and speeds times 2 x 2 discrete values per vehicle.
  EXPECT_EQ(g.axes[2].knots * g.axes[3].knots * g.discrete_sizes[0] * g.discrete_sizes[1], 900u);
}
