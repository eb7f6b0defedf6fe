#include <cmath>
#include <functional>

#include "doctest.h"

#include "fixtures.hpp"
#include "fluidnet/dynamics.hpp"
#include "fluidnet/error.hpp"
#include "fluidnet/gfn.hpp"
#include "fluidnet/lyapunov.hpp"

using namespace fluidnet;
using fixtures::vec;

namespace {

/// Samples a scalar closed form on a grid that contains its breakpoints.
Trajectory path1(const std::function<double(double)>& f, std::vector<double> grid) {
  Trajectory t(1, false);
  for (double s : grid) t.push(s, vec({f(s)}));
  return t;
}

std::vector<double> grid(double end, double h) {
  std::vector<double> g;
  for (int i = 0; i * h <= end + 1e-12; ++i) g.push_back(i * h);
  return g;
}

double ramp(double c, double slope, double t) { return std::max(0.0, c - slope * t); }

}  // namespace

TEST_CASE("scale") {
  const auto q = path1([](double t) { return ramp(1, 1, t); }, grid(2, 0.25));
  const auto s = scale(q, 2.0);
  for (double t : {0.0, 0.1, 0.25, 0.5, 0.75}) CHECK(s.state_at(t)(0) == doctest::Approx(ramp(0.5, 1, t)));
  const auto id = scale(q, 1.0);
  CHECK(id.time == q.time);
  CHECK(id.q == q.q);

  const auto p = path1([](double t) { return ramp(2, 0.5, t); }, grid(4, 0.5));
  const auto ps = scale(p, 0.5);
  CHECK(ps.state_at(0)(0) == doctest::Approx(4.0));
  for (double t : {0.0, 2.0, 4.0, 6.0, 8.0}) CHECK(ps.state_at(t)(0) == doctest::Approx(2.0 * ramp(2, 0.25, t)));
  CHECK(ps.time.back() == doctest::Approx(8.0));
  CHECK_THROWS_AS(scale(q, 0.0), Error);
  CHECK_THROWS_AS(scale(q, -1.0), Error);
}

TEST_CASE("shift") {
  const auto q = path1([](double t) { return ramp(1, 1, t); }, grid(2, 0.25));
  const auto s0 = shift(q, 0.0);
  CHECK(uoc_distance(s0, q, 2.0) == 0.0);
  const auto s = shift(q, 0.5);
  for (double t : {0.0, 0.2, 0.5, 1.0}) CHECK(s.state_at(t)(0) == doctest::Approx(ramp(0.5, 1, t)));
  const auto z = shift(q, 1.0);
  for (double n : z.l1_norms()) CHECK(n == 0.0);
  CHECK_THROWS_AS(shift(q, 2.5), Error);
}

TEST_CASE("concatenate") {
  auto zero = path1([](double) { return 0.0; }, grid(2, 0.5));
  const auto zz = concatenate(zero, 1.0, zero);
  for (double n : zz.l1_norms()) CHECK(n == 0.0);

  const auto q1 = path1([](double t) { return ramp(1, 1, t); }, grid(2, 0.25));
  const auto q2 = path1([](double t) { return ramp(0.5, 1, t); }, grid(2, 0.25));
  const auto c = concatenate(q1, 0.5, q2);
  CHECK(uoc_distance(c, q1, 2.0) <= 1e-15);

  const auto q3 = path1([](double t) { return ramp(0.7, 1, t); }, grid(2, 0.25));
  CHECK_THROWS_AS(concatenate(q1, 0.5, q3), Error);

  const auto fam = example_family("concat_counterexample");
  const auto paths = fam.generate(vec({1, 1}));
  const Trajectory& Q1 = paths.front();
  CHECK(Q1.state_at(1.0).isApprox(vec({0, 2})));
  const auto next = fam.generate(Q1.state_at(1.0));
  const auto spliced = concatenate(Q1, 1.0, next.back());
  CHECK(spliced.state_at(0.0).isApprox(vec({1, 1})));
  CHECK(spliced.state_at(1.0).isApprox(vec({0, 2})));
  CHECK(spliced.state_at(2.0).isApprox(vec({1, 1})));
  for (const auto& comp : spliced.q) {
    for (double v : comp) CHECK(v >= 0.0);
  }
  CHECK(lipschitz_estimate(spliced) <= 2.0 + 1e-12);
}

TEST_CASE("uoc distance") {
  const auto a = path1([](double t) { return ramp(1, 1, t); }, grid(2, 0.1));
  const auto b = path1([](double t) { return ramp(1.1, 1, t); }, grid(2, 0.1));
  CHECK(uoc_distance(a, a, 2.0) == 0.0);
  CHECK(uoc_distance(a, b, 2.0) == doctest::Approx(0.1));

  // l1 distance between the coordinatewise paths from (1,1) and (1.1,0.9).
  const auto fam = example_family("lsc_counterexample");
  const auto p0 = fam.generate(vec({1, 1})).front();
  const auto pn = fam.generate(vec({1.1, 0.9})).front();
  CHECK(uoc_distance(p0, pn, 2.0) == doctest::Approx(0.2));
}

TEST_CASE("lipschitz estimate") {
  CHECK(lipschitz_estimate(path1([](double t) { return ramp(1, 1, t); }, grid(2, 0.1))) == doctest::Approx(1.0));
  CHECK(lipschitz_estimate(path1([](double) { return 0.0; }, grid(2, 0.1))) == 0.0);
  Trajectory two(2, false);
  for (double t : grid(2, 0.1)) two.push(t, vec({ramp(1, 1, t), ramp(1, 1, t)}));
  CHECK(lipschitz_estimate(two) == doctest::Approx(2.0));
  Trajectory single(1, false);
  single.push(0.0, vec({1}));
  CHECK_THROWS_AS(lipschitz_estimate(single), Error);
}

TEST_CASE("example families") {
  const auto lsc = example_family("lsc_counterexample");
  const auto at_diag = lsc.generate(vec({1, 1}));
  REQUIRE(at_diag.size() == 2);
  const auto& diag = at_diag.back();
  for (double t : {0.0, 0.5, 1.0, 1.5, 2.0}) {
    CHECK(diag.state_at(t).isApprox(vec({ramp(1, 0.5, t), ramp(1, 0.5, t)})));
  }
  const auto off = lsc.generate(vec({1.5, 0.5}));
  REQUIRE(off.size() == 1);
  for (double t : {0.0, 0.25, 0.5, 1.0, 1.5}) CHECK(off[0].state_at(t).isApprox(vec({ramp(1.5, 1, t), ramp(0.5, 1, t)}), 1e-12));
  for (const auto& p : at_diag) CHECK(p.state(0).isApprox(vec({1, 1})));
  CHECK_THROWS_AS(example_family("nope"), Error);
}

TEST_CASE("path algebra properties on simulated paths") {
  CounterRng rng(31);
  for (const auto& spec : fixtures::stable_fixtures()) {
    const PathFamily fam = PathFamily::network(spec, {ControlSelector::max_drain()}, 6.0, 0.1);
    for (int trial = 0; trial < 5; ++trial) {
      const Eigen::VectorXd x0 = sample_simplex(rng, spec.K());
      SimOptions keep;
      keep.stop_on_drain = false;
      const auto traj = simulate(fam.sets(), x0, ControlSelector::random_vertex(static_cast<std::uint64_t>(trial)), 6.0, 0.1, keep);
      const double r = 0.5 + 2.0 * rng.uniform();
      const auto back = scale(scale(traj, r), 1.0 / r);
      for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(std::abs(back.time[i] - traj.time[i]) <= 1e-12 * (1.0 + traj.time[i]));
        CHECK((back.state(i) - traj.state(i)).lpNorm<Eigen::Infinity>() <= 1e-12);
      }
      const double s1 = 2.0 * rng.uniform(), s2 = 2.0 * rng.uniform();
      CHECK(uoc_distance(shift(shift(traj, s1), s2), shift(traj, s1 + s2), 6.0 - s1 - s2) <= 1e-12);

      CHECK(membership_residual(fam, scale(traj, r), 6.0 / r) <= 1e-7);
      CHECK(membership_residual(fam, shift(traj, s1), 6.0 - s1) <= 1e-7);

      const double t_star = 3.0 * rng.uniform();
      const auto other = simulate(fam.sets(), traj.state_at(t_star), ControlSelector::min_drain(), 3.0, 0.1, keep);
      const auto cat = concatenate(traj, t_star, other);
      CHECK(check_invariants(spec, cat).ok);
      CHECK(lipschitz_estimate(cat) <= lipschitz_constant(spec) + 1e-9);
    }
  }
}
