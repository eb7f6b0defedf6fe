#include <algorithm>
#include <cmath>
#include <sstream>

#include "doctest.h"

#include "fixtures.hpp"
#include "fluidnet/error.hpp"
#include "fluidnet/fluidlimit.hpp"

using namespace fluidnet;
using fixtures::vec;

namespace {

QueueingSpec deterministic_drain() {
  return make_queueing_spec(fixtures::single_queue(0.0), {Law::None}, {Law::Deterministic});
}

QueueingSpec priority_exp() {
  return make_queueing_spec(fixtures::priority_two_class(), {Law::Exponential, Law::None},
                            {Law::Exponential, Law::Exponential});
}

}  // namespace

TEST_CASE("deterministic drain departs once per time unit") {
  const auto qs = deterministic_drain();
  const auto path = simulate_queueing(qs, fresh_state(qs, {5}, 1), 10.0, 1);
  CHECK(path.events == 5);
  for (int d = 1; d <= 5; ++d) {
    const auto it = std::find_if(path.time.begin(), path.time.end(), [&](double t) { return std::abs(t - d) < 1e-9; });
    REQUIRE(it != path.time.end());
    CHECK(path.q[0][static_cast<std::size_t>(it - path.time.begin())] == 5 - d);
  }
  CHECK(path.q[0].back() == 0);
  CHECK(path.busy[0].back() == doctest::Approx(5.0));
}

TEST_CASE("underloaded deterministic queue holds at most one customer") {
  RawNetworkSpec raw = fixtures::single_queue(1.0, 2.0).raw();
  const auto qs = make_queueing_spec(validate(raw), {Law::Deterministic}, {Law::Deterministic});
  const auto path = simulate_queueing(qs, fresh_state(qs, {0}, 3), 50.0, 3);
  for (long long q : path.q[0]) CHECK((q == 0 || q == 1));
  CHECK(path.events >= 90);
}

TEST_CASE("sample paths obey the discipline") {
  const auto qs = priority_exp();
  const auto path = simulate_queueing(qs, fresh_state(qs, {20, 10}, 5), 100.0, 5);
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double dt = path.time[i + 1] - path.time[i];
    const double d1 = path.busy[0][i + 1] - path.busy[0][i];
    const double d2 = path.busy[1][i + 1] - path.busy[1][i];
    CHECK(d1 >= -1e-12);
    CHECK(d2 >= -1e-12);
    CHECK(d1 + d2 <= dt + 1e-9);
    if (path.q[1][i] > 0) CHECK(d1 <= 1e-12);                           // class 2 preempts class 1
    if (path.q[0][i] + path.q[1][i] > 0) CHECK(d1 + d2 == doctest::Approx(dt));  // no idling
    CHECK(path.q[0][i] >= 0);
    CHECK(path.q[1][i] >= 0);
  }

  const auto wc = make_queueing_spec(fixtures::two_station_wc(), {Law::Exponential, Law::None, Law::Exponential},
                                     {Law::Exponential, Law::Exponential, Law::Exponential});
  const auto p2 = simulate_queueing(wc, fresh_state(wc, {5, 5, 5}, 9), 30.0, 9);
  for (std::size_t i = 0; i + 1 < p2.size(); ++i) {
    const double dt = p2.time[i + 1] - p2.time[i];
    const double s1 = p2.busy[0][i + 1] - p2.busy[0][i] + p2.busy[2][i + 1] - p2.busy[2][i];
    const double s2 = p2.busy[1][i + 1] - p2.busy[1][i];
    if (p2.q[0][i] + p2.q[2][i] > 0) CHECK(s1 == doctest::Approx(dt));
    else CHECK(s1 <= 1e-12);
    if (p2.q[1][i] > 0) CHECK(s2 == doctest::Approx(dt));
    else CHECK(s2 <= 1e-12);
  }
}

TEST_CASE("simulation reproduces per seed") {
  const auto qs = priority_exp();
  const auto a = simulate_queueing(qs, fresh_state(qs, {30, 0}, 17), 200.0, 17);
  const auto b = simulate_queueing(qs, fresh_state(qs, {30, 0}, 17), 200.0, 17);
  CHECK(a.events == b.events);
  CHECK(a.time == b.time);
  CHECK(a.q == b.q);
  const auto c = simulate_queueing(qs, fresh_state(qs, {30, 0}, 18), 200.0, 18);
  CHECK(c.time != a.time);
}

TEST_CASE("event budget and input checks") {
  const auto qs = priority_exp();
  CHECK_THROWS_AS(simulate_queueing(qs, fresh_state(qs, {100, 0}, 1), 1000.0, 1, 10), Error);
  CHECK_THROWS_AS(make_queueing_spec(fixtures::single_queue(0.5), {Law::None}, {Law::Exponential}), Error);
  CHECK_THROWS_AS(make_queueing_spec(fixtures::single_queue(0.0), {Law::Exponential}, {Law::Exponential}), Error);
  CHECK_THROWS_AS(parse_law("gamma"), Error);
}

TEST_CASE("scaling sample paths") {
  const auto qs = deterministic_drain();
  const auto path = simulate_queueing(qs, fresh_state(qs, {5}, 1), 10.0, 1);
  const std::vector<double> grid = {0.0, 0.5, 1.0, 2.5, 4.0, 6.0};
  const auto id = scale_path(path, 1.0, grid);
  CHECK(id[0](0) == 5.0);
  CHECK(id[2](0) == 4.0);
  CHECK(id[4](0) == 1.0);
  const auto s5 = scale_path(path, 5.0, {0.0, 0.5, 1.0, 1.5});
  CHECK(s5[0](0) == 1.0);
  CHECK(s5[1](0) == doctest::Approx(0.6));
  CHECK(s5[2](0) == 0.0);
  CHECK_THROWS_AS(scale_path(path, 0.0), Error);

  const auto empty = simulate_queueing(qs, fresh_state(qs, {0}, 1), 10.0, 1);
  for (const auto& v : scale_path(empty, 3.0, grid)) CHECK(v(0) == 0.0);
}

TEST_CASE("fluid limit distances") {
  const auto qs = deterministic_drain();
  const auto rows = fluid_limit_compare(qs, vec({1}), {10, 100}, 2.0, {1, 2});
  REQUIRE(rows.size() == 4);
  for (const auto& row : rows) {
    CHECK(row.max_dist <= 1.0 / row.r + 1e-9);
    CHECK(row.mean_dist <= row.max_dist);
  }
  RawNetworkSpec raw = fixtures::single_queue(0.0).raw();
  const auto zero = make_queueing_spec(validate(raw), {Law::None}, {Law::Exponential});
  for (const auto& row : fluid_limit_compare(zero, vec({0}), {10, 100}, 2.0, {1})) CHECK(row.max_dist == 0.0);

  std::ostringstream os;
  write_distance_csv(os, rows);
  CHECK(os.str().rfind("r,seed,mean_dist,max_dist\n", 0) == 0);
}

TEST_CASE("scaled slopes respect the fluid Lipschitz bound") {
  const auto qs = priority_exp();
  const double r = 100.0;
  const auto path = simulate_queueing(qs, fresh_state(qs, {100, 0}, 4), r * 5.0, 4);
  auto slopes = scaled_slopes(scale_path(path, r), 0.1);
  REQUIRE(!slopes.empty());
  std::sort(slopes.begin(), slopes.end());
  const double p95 = slopes[static_cast<std::size_t>(0.95 * static_cast<double>(slopes.size() - 1))];
  CHECK(p95 <= lipschitz_constant(fixtures::priority_two_class()) + 0.1);
}

TEST_CASE("concatenation evidence is finite and reproducible") {
  const auto qs = priority_exp();
  const auto a = concatenation_evidence(qs, vec({1, 0}), 100.0, 1.0, 3.0, 7);
  const auto b = concatenation_evidence(qs, vec({1, 0}), 100.0, 1.0, 3.0, 7);
  CHECK(std::isfinite(a.dist_to_fluid));
  CHECK(a.dist_to_fluid == b.dist_to_fluid);
  CHECK(a.dist_to_unspliced == b.dist_to_unspliced);
}
