#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace fluidnet {

/// There is x >= 0 with Rx > 0: max t s.t. Rx >= t e, x >= 0, sum x <= 1 has t > 1e-10.
bool is_s_matrix(const Eigen::MatrixXd& R);

/// Every nonempty principal submatrix is an S-matrix. J <= 20.
bool is_completely_s(const Eigen::MatrixXd& R);

struct LspInstance {
  Eigen::VectorXd theta;
  Eigen::MatrixXd R;
  Eigen::VectorXd Z0;
  /// Bound on each push rate; 0 selects default_push_bound.
  double M_u = 0.0;
};

/// 10 (1 + ||theta||_1) kappa_1(R), with the pseudo-inverse for singular R.
double default_push_bound(const Eigen::VectorXd& theta, const Eigen::MatrixXd& R);

struct LspSolution {
  std::vector<double> time;
  std::vector<Eigen::VectorXd> Z;
  std::vector<Eigen::VectorXd> Y;
  std::vector<Eigen::VectorXd> push;  // rate in force on [time[i], time[i+1])
  double push_bound = 0.0;

  std::size_t size() const noexcept { return time.size(); }
  Eigen::VectorXd Z_at(double t) const;
  Eigen::VectorXd Y_at(double t) const;
};

/// Event-splitting solver: on the empty set A the push is the minimal-l1
/// solution of the complementarity problem w_A = theta_A + (R u)_A >= 0,
/// u_A >= 0, u_A^T w_A = 0 (ties broken lexicographically); between
/// decision points (events and checkpoints every h) the push is frozen.
LspSolution solve_lsp(const LspInstance& inst, double horizon, double h);

/// max over stamps of ||Z - (Z0 + theta t + R Y)||_1
double lsp_residual(const LspInstance& inst, const LspSolution& sol);
/// sum_j sum_intervals mean(Z_j) * dY_j
double lsp_complementarity(const LspSolution& sol);
/// Smallest increment of any Y component between stamps (>= 0 when monotone).
double lsp_min_increment(const LspSolution& sol);

struct LipschitzReport {
  double bound = 0.0;     // ||theta||_1 + ||R||_1 M_u
  double observed = 0.0;  // max slope of Z on the solution
  bool ok = false;
};
LipschitzReport lipschitz_bound(const LspInstance& inst, const LspSolution& sol);

/// Z(r t)/r, Y(r t)/r, which solves the problem started at Z0 / r.
LspSolution scale(const LspSolution& sol, double r);
/// first on [0, t_star], then second shifted; Y spliced continuously.
LspSolution concatenate(const LspSolution& first, double t_star, const LspSolution& second);

}  // namespace fluidnet
