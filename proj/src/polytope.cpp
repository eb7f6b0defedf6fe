#include "fluidnet/polytope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fluidnet/error.hpp"
#include "fluidnet/lp.hpp"

namespace fluidnet {

void HalfspaceSystem::add_le(const Eigen::Ref<const Eigen::RowVectorXd>& a, double b) {
  if (a.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "halfspace row length");
  A_ineq.conservativeResize(A_ineq.rows() + 1, Eigen::NoChange);
  A_ineq.row(A_ineq.rows() - 1) = a;
  b_ineq.conservativeResize(b_ineq.size() + 1);
  b_ineq(b_ineq.size() - 1) = b;
}

void HalfspaceSystem::add_eq(const Eigen::Ref<const Eigen::RowVectorXd>& a, double b) {
  if (a.size() != dim()) throw Error(ErrorCode::DimensionMismatch, "equality row length");
  A_eq.conservativeResize(A_eq.rows() + 1, Eigen::NoChange);
  A_eq.row(A_eq.rows() - 1) = a;
  b_eq.conservativeResize(b_eq.size() + 1);
  b_eq(b_eq.size() - 1) = b;
}

bool HalfspaceSystem::contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const {
  if ((A_ineq * x - b_ineq).maxCoeff() > tol && A_ineq.rows() > 0) return false;
  if (A_eq.rows() > 0 && (A_eq * x - b_eq).cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

void sort_unique(std::vector<Eigen::VectorXd>& points, double tol) {
  // Snap near-integers and tiny values first so the order is stable under
  // roundoff in the solves that produced the points.
  const double snap = std::min(tol, 1e-12);
  for (auto& p : points) {
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      const double r = std::round(p(i));
      if (std::abs(p(i) - r) <= snap) p(i) = r;
    }
  }
  std::sort(points.begin(), points.end(), lex_less);
  std::vector<Eigen::VectorXd> out;
  for (auto& p : points) {
    const bool dup = std::any_of(out.begin(), out.end(), [&](const Eigen::VectorXd& q) {
      return (q - p).cwiseAbs().maxCoeff() <= tol;
    });
    if (!dup) out.push_back(std::move(p));
  }
  points = std::move(out);
}

std::vector<Eigen::VectorXd> enumerate_vertices(const HalfspaceSystem& sys, double tol) {
  const Eigen::Index n = sys.dim();
  std::vector<Eigen::VectorXd> found;
  if (n == 0) return found;

  // Keep an independent subset of the equality rows; redundant rows only
  // matter for feasibility, which the final check covers.
  Eigen::MatrixXd eq_rows(0, n);
  Eigen::VectorXd eq_rhs(0);
  for (Eigen::Index i = 0; i < sys.A_eq.rows(); ++i) {
    Eigen::MatrixXd trial(eq_rows.rows() + 1, n);
    trial << eq_rows, sys.A_eq.row(i);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(trial);
    lu.setThreshold(1e-12);
    if (lu.rank() == trial.rows()) {
      eq_rows = trial;
      eq_rhs.conservativeResize(eq_rhs.size() + 1);
      eq_rhs(eq_rhs.size() - 1) = sys.b_eq(i);
    }
  }
  const Eigen::Index r = eq_rows.rows();
  const Eigen::Index need = n - r;
  const Eigen::Index m = sys.A_ineq.rows();
  if (need > m) return found;

  std::vector<Eigen::Index> pick(static_cast<std::size_t>(need));
  std::iota(pick.begin(), pick.end(), 0);
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd b(n);
  A.topRows(r) = eq_rows;
  b.head(r) = eq_rhs;
  while (true) {
    for (Eigen::Index i = 0; i < need; ++i) {
      A.row(r + i) = sys.A_ineq.row(pick[i]);
      b(r + i) = sys.b_ineq(pick[i]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    lu.setThreshold(1e-12);
    if (lu.isInvertible()) {
      Eigen::VectorXd x = lu.solve(b);
      if (x.allFinite() && sys.contains(x, tol)) found.push_back(std::move(x));
    }
    // Next combination in lexicographic order.
    Eigen::Index i = need - 1;
    while (i >= 0 && pick[i] == m - need + i) --i;
    if (i < 0) break;
    ++pick[i];
    for (Eigen::Index j = i + 1; j < need; ++j) pick[j] = pick[j - 1] + 1;
  }
  sort_unique(found, tol);
  return found;
}

bool in_convex_hull(const std::vector<Eigen::VectorXd>& points,
                    const Eigen::Ref<const Eigen::VectorXd>& point, double tol) {
  if (points.empty()) return false;
  const Eigen::Index n = point.size();
  const std::size_t m = points.size();
  // Variables: weights lambda (m) then slack s >= 0; minimize s subject to
  // |sum lambda_i p_i - point| <= s componentwise, sum lambda = 1.
  LinearProgram lp(m + 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + 1));
    for (std::size_t i = 0; i < m; ++i) row(static_cast<Eigen::Index>(i)) = points[i](k);
    row(static_cast<Eigen::Index>(m)) = -1.0;
    lp.add_constraint(row, Sense::LessEqual, point(k));
    row(static_cast<Eigen::Index>(m)) = 1.0;
    lp.add_constraint(row, Sense::GreaterEqual, point(k));
  }
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m + 1));
  ones(static_cast<Eigen::Index>(m)) = 0.0;
  lp.add_constraint(ones, Sense::Equal, 1.0);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m + 1));
  cost(static_cast<Eigen::Index>(m)) = 1.0;
  lp.minimize(cost);
  const LpResult res = lp.solve();
  return res.optimal() && res.objective <= tol;
}

}  // namespace fluidnet
