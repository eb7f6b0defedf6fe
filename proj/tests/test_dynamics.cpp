#include <cmath>

#include "doctest.h"

#include "fixtures.hpp"
#include "fluidnet/dynamics.hpp"
#include "fluidnet/error.hpp"
#include "fluidnet/gfn.hpp"
#include "fluidnet/lyapunov.hpp"
#include "fluidnet/polytope.hpp"

using namespace fluidnet;
using fixtures::mat;
using fixtures::vec;

namespace {

NetworkSpec strict_priority_pair() {
  RawNetworkSpec raw;
  raw.alpha = vec({0, 0});
  raw.mu = vec({1, 1});
  raw.P = mat({{0, 0}, {0, 0}});
  raw.C = mat({{1, 1}});
  raw.discipline = Discipline::Priority;
  raw.priority_order = {0, 1};
  return validate(raw);
}

std::vector<ControlSelector> all_selectors() {
  return {ControlSelector::first_vertex(), ControlSelector::max_drain(), ControlSelector::min_drain(),
          ControlSelector::random_vertex(3), ControlSelector::fixed_sequence({1, 0, 2})};
}

}  // namespace

TEST_CASE("rhs") {
  CHECK(rhs(fixtures::single_queue(0.0), vec({1}))(0) == -1.0);
  CHECK(rhs(fixtures::single_queue(0.5), vec({1}))(0) == -0.5);
  RawNetworkSpec raw;
  raw.alpha = vec({1, 0});
  raw.mu = vec({2, 1});
  raw.P = mat({{0, 1}, {0, 0}});
  raw.C = mat({{1, 0}, {0, 1}});
  const auto spec = validate(raw);
  const Eigen::VectorXd u = vec({1, 1});
  const Eigen::VectorXd generic = spec.alpha() - (Eigen::MatrixXd::Identity(2, 2) - spec.P().transpose()) * spec.mu().cwiseProduct(u);
  CHECK(rhs(spec, u).isApprox(vec({-1, 1})));
  CHECK(rhs(spec, u).isApprox(generic));
}

TEST_CASE("single queue drains along (1 - t)+") {
  for (const auto& sel : all_selectors()) {
    const auto traj = simulate(fixtures::single_queue(0.0), vec({1}), sel, 5.0, 0.1);
    REQUIRE(traj.drained);
    CHECK(traj.drain_time == doctest::Approx(1.0).epsilon(1e-12));
    for (double t : {0.0, 0.25, 0.5, 0.99, 1.0}) CHECK(traj.state_at(t)(0) == doctest::Approx(std::max(0.0, 1.0 - t)));
  }
}

TEST_CASE("single queue with inflow drains at 2 and stays empty") {
  const auto spec = fixtures::single_queue(0.5);
  SimOptions keep;
  keep.stop_on_drain = false;
  const auto traj = simulate(spec, vec({1}), ControlSelector::first_vertex(), 4.0, 0.1, keep);
  CHECK(traj.drained);
  CHECK(traj.drain_time == doctest::Approx(2.0));
  CHECK(traj.state_at(1.0)(0) == doctest::Approx(0.5));
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.time[i] >= 2.0) {
      CHECK(std::abs(traj.state(i)(0)) <= 1e-12);
      if (i + 1 < traj.size()) CHECK(traj.control(i)(0) == doctest::Approx(0.5));
    }
  }
  CHECK(check_invariants(spec, traj).ok);
}

TEST_CASE("strict priority drains the high class first") {
  const auto spec = strict_priority_pair();
  const auto coarse = simulate(spec, vec({1, 1}), ControlSelector::first_vertex(), 3.0, 0.1);
  const auto fine = simulate(spec, vec({1, 1}), ControlSelector::first_vertex(), 3.0, 1e-3);
  for (double t : {0.0, 0.5, 1.0, 1.5, 1.9, 2.0, 2.5}) {
    CHECK(coarse.state_at(t)(0) == doctest::Approx(std::max(0.0, 1.0 - t)));
    CHECK(coarse.state_at(t)(1) == doctest::Approx(t <= 1.0 ? 1.0 : std::max(0.0, 2.0 - t)));
  }
  CHECK(uoc_distance(coarse, fine, 3.0) <= 1e-9);
}

TEST_CASE("viability") {
  CHECK(viability_check(fixtures::tandem(), vec({0.3, 0.2})));
  CHECK(viability_check(fixtures::single_queue(0.0), vec({0})));
  CHECK(viability_check(fixtures::tandem(), vec({0, 0})));
  CHECK(viability_check(fixtures::lu_kumar(), vec({0, 0, 0, 0})));
  CHECK(viability_check(fixtures::lu_kumar(), vec({1, 0, 0, 0})));
}

TEST_CASE("flow balance residual") {
  const auto spec = fixtures::single_queue(0.0);
  const auto traj = simulate(spec, vec({1}), ControlSelector::first_vertex(), 2.0, 0.1);
  CHECK(flow_balance_residual(spec, traj) < 1e-12);

  auto bad = traj;
  bad.alloc[0][1] += 0.1;
  CHECK(flow_balance_residual(spec, bad) >= 0.1 * spec.mu().minCoeff() - 1e-12);

  const auto tandem = fixtures::tandem();
  const auto t2 = simulate(tandem, vec({1, 0.5}), ControlSelector::max_drain(), 5.0, 1e-3);
  CHECK(flow_balance_residual(tandem, t2) < 1e-7);

  Trajectory bare(1, false);
  bare.push(0.0, vec({1}));
  CHECK_THROWS_AS(flow_balance_residual(spec, bare), Error);
}

TEST_CASE("trajectory invariants hold on every fixture and selector") {
  std::vector<NetworkSpec> specs = fixtures::stable_fixtures();
  specs.push_back(fixtures::lu_kumar());
  CounterRng rng(5);
  for (const auto& spec : specs) {
    const double L = lipschitz_constant(spec);
    for (const auto& sel : all_selectors()) {
      const Eigen::VectorXd x0 = sample_simplex(rng, spec.K()) * (0.5 + rng.uniform());
      const auto traj = simulate(spec, x0, sel, 10.0, 0.05);
      const auto rep = check_invariants(spec, traj);
      CAPTURE(sel.name());
      CHECK(rep.ok);
      CHECK(rep.flow_residual <= 1e-7 * (1.0 + x0.lpNorm<1>()));
      CHECK(rep.min_level >= -1e-9);
      CHECK(lipschitz_estimate(traj) <= L + 1e-9);
      for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
        const auto mask = empty_mask(traj.state(i), emptiness_threshold(x0.lpNorm<1>()));
        (void)mask;
        CHECK((traj.control(i).array() >= -1e-12).all());
      }
    }
  }
}

TEST_CASE("selected controls lie in the admissible polytope") {
  const auto spec = fixtures::two_station_wc();
  auto sets = std::make_shared<ControlSets>(spec);
  const auto traj = simulate(sets, vec({0.5, 0.2, 0.3}), ControlSelector::random_vertex(11), 5.0, 0.05);
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const auto mask = empty_mask(traj.state(i), emptiness_threshold(1.0));
    const auto poly = control_polytope(spec, mask_to_vector(mask, spec.K()));
    CHECK(in_convex_hull(poly.vertices, traj.control(i), 1e-10));
  }
}

TEST_CASE("complementarity residual at least halves with the step") {
  for (const auto& spec : fixtures::stable_fixtures()) {
    const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(spec.K()), 1.0 / static_cast<double>(spec.K()));
    const auto a = simulate(spec, x0, ControlSelector::max_drain(), 5.0, 0.1);
    const auto b = simulate(spec, x0, ControlSelector::max_drain(), 5.0, 0.05);
    CHECK(complementarity_residual(spec, b) <= 0.5 * complementarity_residual(spec, a) + 1e-12);
  }
}

TEST_CASE("simulation is deterministic and zero is invariant") {
  const auto spec = fixtures::lu_kumar();
  const auto a = simulate(spec, vec({0.4, 0.3, 0.2, 0.1}), ControlSelector::random_vertex(9), 10.0, 0.1);
  const auto b = simulate(spec, vec({0.4, 0.3, 0.2, 0.1}), ControlSelector::random_vertex(9), 10.0, 0.1);
  CHECK(a.time == b.time);
  CHECK(a.q == b.q);
  CHECK(a.ctrl == b.ctrl);

  for (const auto& s : fixtures::stable_fixtures()) {
    REQUIRE(viability_check(s, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.K()))));
    SimOptions keep;
    keep.stop_on_drain = false;
    const auto z = simulate(s, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.K())), ControlSelector::random_vertex(1), 3.0, 0.1, keep);
    for (const auto& n : z.l1_norms()) CHECK(n <= 1e-12);
  }
}

TEST_CASE("selector parsing and errors") {
  for (const char* s : {"first", "max_drain", "min_drain", "random:17", "sequence:0,2,1"}) {
    CHECK(ControlSelector::parse(s).name() == s);
  }
  CHECK_THROWS_AS(ControlSelector::parse("greedy"), Error);
  SimOptions tiny;
  tiny.max_substeps = 3;
  CHECK_THROWS_AS(simulate(fixtures::tandem(), vec({1, 1}), ControlSelector::first_vertex(), 10.0, 0.1, tiny), Error);
  CHECK_THROWS_AS(simulate(fixtures::tandem(), vec({1, -1}), ControlSelector::first_vertex(), 1.0, 0.1), Error);
  CHECK_THROWS_AS(simulate(fixtures::tandem(), vec({1, 1}), ControlSelector::first_vertex(), 1.0, 0.0), Error);
}

TEST_CASE("trajectory CSV export") {
  const auto traj = simulate(fixtures::tandem(), vec({1, 0}), ControlSelector::first_vertex(), 2.0, 0.5);
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  const std::string s = os.str();
  CHECK(s.rfind("t,Q1,Q2,T1,T2,u1,u2\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')) == traj.size() + 1);
  std::ostringstream empty;
  write_trajectory_csv(empty, Trajectory(2, true, 2));
  CHECK(empty.str() == "t,Q1,Q2,T1,T2,u1,u2\n");
}
