#pragma once

// H-representation to V-representation for small bounded polytopes.

#include <vector>

#include <Eigen/Dense>

namespace fluidnet {

/// { x : A_ineq x <= b_ineq, A_eq x = b_eq }
struct HalfspaceSystem {
  Eigen::MatrixXd A_ineq;
  Eigen::VectorXd b_ineq;
  Eigen::MatrixXd A_eq;
  Eigen::VectorXd b_eq;

  explicit HalfspaceSystem(Eigen::Index dim = 0)
      : A_ineq(0, dim), b_ineq(0), A_eq(0, dim), b_eq(0) {}

  Eigen::Index dim() const { return A_ineq.cols(); }
  void add_le(const Eigen::Ref<const Eigen::RowVectorXd>& a, double b);
  void add_ge(const Eigen::Ref<const Eigen::RowVectorXd>& a, double b) { add_le(-a, -b); }
  void add_eq(const Eigen::Ref<const Eigen::RowVectorXd>& a, double b);
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& x, double tol) const;
};

/// Vertices of a bounded polytope by exhaustive basis enumeration, returned
/// deduplicated and in lexicographic order. Empty when infeasible.
std::vector<Eigen::VectorXd> enumerate_vertices(const HalfspaceSystem& sys, double tol = 1e-9);

/// Sorts lexicographically and removes points closer than tol (max norm).
void sort_unique(std::vector<Eigen::VectorXd>& points, double tol = 1e-9);

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Whether point lies in conv(points), decided by an LP with slack tol.
bool in_convex_hull(const std::vector<Eigen::VectorXd>& points,
                    const Eigen::Ref<const Eigen::VectorXd>& point, double tol = 1e-10);

}  // namespace fluidnet
