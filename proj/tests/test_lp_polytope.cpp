#include <cmath>
#include <limits>

#include "doctest.h"

#include "fixtures.hpp"
#include "fluidnet/lp.hpp"
#include "fluidnet/polytope.hpp"
#include "fluidnet/rng.hpp"

using namespace fluidnet;
using fixtures::vec;

TEST_CASE("simplex on textbook problems") {
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
  LinearProgram lp(2);
  lp.add_constraint(vec({1, 1}), Sense::LessEqual, 4);
  lp.add_constraint(vec({1, 3}), Sense::LessEqual, 6);
  lp.set_upper(0, 3);
  lp.maximize(vec({3, 2}));
  auto r = lp.solve();
  REQUIRE(r.optimal());
  CHECK(r.objective == doctest::Approx(11.0));
  CHECK(r.x(0) == doctest::Approx(3.0));
  CHECK(r.x(1) == doctest::Approx(1.0));

  LinearProgram inf(1);
  inf.add_constraint(vec({1}), Sense::GreaterEqual, 2);
  inf.add_constraint(vec({1}), Sense::LessEqual, 1);
  inf.minimize(vec({1}));
  CHECK(inf.solve().status == LpStatus::Infeasible);

  LinearProgram unb(1);
  unb.maximize(vec({1}));
  CHECK(unb.solve().status == LpStatus::Unbounded);

  LinearProgram fr(1);
  fr.set_free(0);
  fr.add_constraint(vec({1}), Sense::GreaterEqual, -3);
  fr.minimize(vec({1}));
  auto f = fr.solve();
  REQUIRE(f.optimal());
  CHECK(f.x(0) == doctest::Approx(-3.0));

  LinearProgram eq(2);
  eq.add_constraint(vec({1, 1}), Sense::Equal, 1);
  eq.set_lower(0, 0.25);
  eq.minimize(vec({1, 0}));
  auto e = eq.solve();
  REQUIRE(e.optimal());
  CHECK(e.x(0) == doctest::Approx(0.25));
  CHECK(e.x(1) == doctest::Approx(0.75));
}

TEST_CASE("vertex enumeration of the unit square and simplex") {
  HalfspaceSystem sq(2);
  sq.add_ge(vec({1, 0}).transpose(), 0);
  sq.add_ge(vec({0, 1}).transpose(), 0);
  sq.add_le(vec({1, 0}).transpose(), 1);
  sq.add_le(vec({0, 1}).transpose(), 1);
  const auto v = enumerate_vertices(sq);
  REQUIRE(v.size() == 4);
  CHECK(v[0].isApprox(vec({0, 0}), 0));
  CHECK(v[3].isApprox(vec({1, 1})));

  HalfspaceSystem face(3);
  for (int i = 0; i < 3; ++i) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(3);
    e(i) = 1;
    face.add_ge(e, 0);
  }
  face.add_eq(Eigen::RowVectorXd::Ones(3), 1);
  CHECK(enumerate_vertices(face).size() == 3);
}

TEST_CASE("LP optimum over a random polytope equals the best enumerated vertex") {
  CounterRng rng(7);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(3));
    HalfspaceSystem sys(n);
    LinearProgram lp(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(n);
      e(i) = 1;
      sys.add_ge(e, 0);
    }
    const int m = 2 + static_cast<int>(rng.below(4));
    for (int r = 0; r < m; ++r) {
      Eigen::RowVectorXd a(n);
      for (int i = 0; i < n; ++i) a(i) = 0.1 + rng.uniform();
      const double b = 0.5 + rng.uniform();
      sys.add_le(a, b);
      lp.add_constraint(a.transpose(), Sense::LessEqual, b);
    }
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c(i) = rng.uniform() * 2 - 1;
    lp.maximize(c);
    const auto res = lp.solve();
    REQUIRE(res.optimal());
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : enumerate_vertices(sys)) {
      CHECK(sys.contains(v, 1e-9));
      best = std::max(best, c.dot(v));
    }
    CHECK(res.objective == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("convex hull membership") {
  std::vector<Eigen::VectorXd> tri = {vec({0, 0}), vec({1, 0}), vec({0, 1})};
  CHECK(in_convex_hull(tri, vec({0.2, 0.2})));
  CHECK(in_convex_hull(tri, vec({0.5, 0.5})));
  CHECK_FALSE(in_convex_hull(tri, vec({0.6, 0.6})));
  CHECK_FALSE(in_convex_hull(tri, vec({-0.1, 0})));
}

TEST_CASE("sort_unique orders lexicographically and removes near duplicates") {
  std::vector<Eigen::VectorXd> pts = {vec({1, 0}), vec({0, 1}), vec({1, 1e-13}), vec({0, 0})};
  sort_unique(pts);
  REQUIRE(pts.size() == 3);
  CHECK(lex_less(pts[0], pts[1]));
  CHECK(lex_less(pts[1], pts[2]));
}
