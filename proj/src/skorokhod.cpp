#include "fluidnet/skorokhod.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fluidnet/error.hpp"
#include "fluidnet/lp.hpp"
#include "fluidnet/model.hpp"
#include "fluidnet/polytope.hpp"
#include "fluidnet/trajectory.hpp"

namespace fluidnet {

bool is_s_matrix(const Eigen::MatrixXd& R) {
  if (R.rows() != R.cols()) throw Error(ErrorCode::DimensionMismatch, "S-matrix test needs a square matrix");
  const Eigen::Index J = R.rows();
  if (J == 0) return false;
  LinearProgram lp(static_cast<std::size_t>(J + 1));
  lp.set_free(static_cast<std::size_t>(J));
  for (Eigen::Index i = 0; i < J; ++i) {
    Eigen::VectorXd row(J + 1);
    row << R.row(i).transpose(), -1.0;
    lp.add_constraint(row, Sense::GreaterEqual, 0.0);
  }
  Eigen::VectorXd sum = Eigen::VectorXd::Ones(J + 1);
  sum(J) = 0.0;
  lp.add_constraint(sum, Sense::LessEqual, 1.0);
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(J + 1);
  cost(J) = 1.0;
  lp.maximize(cost);
  const LpResult res = lp.solve();
  return res.optimal() && res.objective > 1e-10;
}

bool is_completely_s(const Eigen::MatrixXd& R) {
  if (R.rows() != R.cols()) throw Error(ErrorCode::DimensionMismatch, "completely-S test needs a square matrix");
  const Eigen::Index J = R.rows();
  if (J > 20) throw Error(ErrorCode::DimensionTooLarge, "principal submatrix enumeration is limited to J <= 20");
  for (std::uint32_t mask = 1; mask < (1U << J); ++mask) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < J; ++j) {
      if ((mask >> j) & 1U) idx.push_back(j);
    }
    if (!is_s_matrix(R(idx, idx))) return false;
  }
  return true;
}

double default_push_bound(const Eigen::VectorXd& theta, const Eigen::MatrixXd& R) {
  const auto norm1 = [](const Eigen::MatrixXd& m) { return m.cwiseAbs().colwise().sum().maxCoeff(); };
  const Eigen::MatrixXd inv = R.completeOrthogonalDecomposition().pseudoInverse();
  const double kappa = norm1(R) * norm1(inv);
  return 10.0 * (1.0 + theta.lpNorm<1>()) * std::max(kappa, 1.0);
}

namespace {

Eigen::VectorXd interpolate(const std::vector<double>& grid, const std::vector<Eigen::VectorXd>& v, double t) {
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "empty solution");
  if (t <= grid.front()) return v.front();
  if (t >= grid.back()) return v.back();
  const std::size_t i = locate(grid, t);
  const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
  return v[i] + w * (v[i + 1] - v[i]);
}

/// Minimal-l1 push on the empty set A.
Eigen::VectorXd minimal_push(const Eigen::VectorXd& theta, const Eigen::MatrixXd& R, const std::vector<Eigen::Index>& A) {
  const Eigen::Index J = theta.size();
  Eigen::VectorXd best;
  double best_norm = std::numeric_limits<double>::infinity();
  if (A.empty()) return Eigen::VectorXd::Zero(J);
  const Eigen::VectorXd thA = theta(A);
  const Eigen::MatrixXd RAA = R(A, A);
  if (A.size() <= 12) {
    const std::uint32_t n = static_cast<std::uint32_t>(A.size());
    for (std::uint32_t s = 0; s < (1U << n); ++s) {
      std::vector<Eigen::Index> S;
      for (std::uint32_t i = 0; i < n; ++i) {
        if ((s >> i) & 1U) S.push_back(static_cast<Eigen::Index>(i));
      }
      Eigen::VectorXd uA = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      if (!S.empty()) {
        Eigen::FullPivLU<Eigen::MatrixXd> lu(RAA(S, S));
        if (!lu.isInvertible()) continue;
        const Eigen::VectorXd uS = lu.solve(-thA(S));
        if ((uS.array() < -1e-12).any()) continue;
        uA(S) = uS.cwiseMax(0.0);
      }
      const Eigen::VectorXd w = thA + RAA * uA;
      if ((w.array() < -1e-10 * (1.0 + thA.cwiseAbs().maxCoeff())).any()) continue;
      const double norm = uA.lpNorm<1>();
      if (norm < best_norm - 1e-12 || (std::abs(norm - best_norm) <= 1e-12 && lex_less(uA, best))) {
        best = uA;
        best_norm = norm;
      }
    }
  }
  if (best.size() == 0) {
    // Large or degenerate active sets: the smallest push keeping w_A >= 0.
    LinearProgram lp(A.size());
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(A.size()); ++i) {
      lp.add_constraint(RAA.row(i).transpose(), Sense::GreaterEqual, -thA(i));
    }
    lp.minimize(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(A.size())));
    const LpResult res = lp.solve();
    if (!res.optimal()) throw Error(ErrorCode::PushBoundExceeded, "no finite push keeps the state nonnegative");
    best = res.x;
  }
  Eigen::VectorXd u = Eigen::VectorXd::Zero(J);
  u(A) = best;
  return u;
}

}  // namespace

Eigen::VectorXd LspSolution::Z_at(double t) const { return interpolate(time, Z, t); }
Eigen::VectorXd LspSolution::Y_at(double t) const { return interpolate(time, Y, t); }

LspSolution solve_lsp(const LspInstance& inst, double horizon, double h) {
  const Eigen::Index J = inst.theta.size();
  if (J == 0 || inst.R.rows() != J || inst.R.cols() != J || inst.Z0.size() != J) {
    throw Error(ErrorCode::DimensionMismatch, "theta, R and Z0 disagree on J");
  }
  if ((inst.Z0.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "Z0 must be nonnegative");
  if (!(h > 0.0) || !(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "step and horizon must be positive");
  if (inst.M_u < 0.0) throw Error(ErrorCode::InvalidArgument, "push bound must be positive");
  if (!is_completely_s(inst.R)) throw Error(ErrorCode::NotCompletelyS, "reflection matrix is not completely-S");

  LspSolution sol;
  sol.push_bound = inst.M_u > 0.0 ? inst.M_u : default_push_bound(inst.theta, inst.R);
  const double eps = emptiness_threshold(inst.Z0.lpNorm<1>());
  Eigen::VectorXd Z = inst.Z0;
  Eigen::VectorXd Y = Eigen::VectorXd::Zero(J);
  double t = 0.0;
  std::size_t checkpoint = 1;
  std::size_t substeps = 0;

  auto decide = [&]() {
    std::vector<Eigen::Index> A;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (Z(j) < eps) A.push_back(j);
    }
    Eigen::VectorXd u = minimal_push(inst.theta, inst.R, A);
    if (u.lpNorm<1>() > sol.push_bound) {
      throw Error(ErrorCode::PushBoundExceeded, "minimal push " + std::to_string(u.lpNorm<1>()) + " exceeds M_u");
    }
    return u;
  };

  Eigen::VectorXd u = decide();
  sol.time.push_back(0.0);
  sol.Z.push_back(Z);
  sol.Y.push_back(Y);
  sol.push.push_back(u);
  while (t < horizon) {
    if (++substeps > 1000000) throw Error(ErrorCode::StepTooLarge, "event splitting exceeded 1e6 sub-steps");
    const double next = std::min(static_cast<double>(checkpoint) * h, horizon);
    const Eigen::VectorXd w = inst.theta + inst.R * u;
    double tau = next - t;
    for (Eigen::Index j = 0; j < J; ++j) {
      if (w(j) >= 0.0 || (Z(j) < eps && w(j) > -1e-9)) continue;
      tau = std::min(tau, std::max(0.0, Z(j)) / -w(j));
    }
    const bool crossed = tau < next - t;
    Z += tau * w;
    Y += tau * u;
    if (crossed) {
      for (Eigen::Index j = 0; j < J; ++j) {
        if (w(j) < 0.0 && Z(j) <= std::abs(w(j)) * tau * 1e-12 + 1e-300) Z(j) = 0.0;
      }
      t += tau;
      if (next - t <= 1e-12 * std::max(1.0, next)) {
        t = next;
        ++checkpoint;
      }
    } else {
      t = next;
      ++checkpoint;
    }
    Z = Z.cwiseMax(0.0);
    u = decide();
    if (t > sol.time.back()) {
      sol.time.push_back(t);
      sol.Z.push_back(Z);
      sol.Y.push_back(Y);
      sol.push.push_back(u);
    } else {
      sol.push.back() = u;
    }
  }
  return sol;
}

double lsp_residual(const LspInstance& inst, const LspSolution& sol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < sol.size(); ++i) {
    const Eigen::VectorXd pred = inst.Z0 + inst.theta * sol.time[i] + inst.R * sol.Y[i];
    worst = std::max(worst, (sol.Z[i] - pred).lpNorm<1>());
  }
  return worst;
}

double lsp_complementarity(const LspSolution& sol) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < sol.size(); ++i) {
    total += (0.5 * (sol.Z[i] + sol.Z[i + 1])).dot(sol.Y[i + 1] - sol.Y[i]);
  }
  return total;
}

double lsp_min_increment(const LspSolution& sol) {
  double m = 0.0;
  for (std::size_t i = 0; i + 1 < sol.size(); ++i) m = std::min(m, (sol.Y[i + 1] - sol.Y[i]).minCoeff());
  return m;
}

LipschitzReport lipschitz_bound(const LspInstance& inst, const LspSolution& sol) {
  LipschitzReport rep;
  const double M = inst.M_u > 0.0 ? inst.M_u : default_push_bound(inst.theta, inst.R);
  rep.bound = inst.theta.lpNorm<1>() + inst.R.cwiseAbs().colwise().sum().maxCoeff() * M;
  for (std::size_t i = 0; i + 1 < sol.size(); ++i) {
    const double dt = sol.time[i + 1] - sol.time[i];
    if (dt > 0.0) rep.observed = std::max(rep.observed, (sol.Z[i + 1] - sol.Z[i]).lpNorm<1>() / dt);
  }
  rep.ok = rep.observed <= rep.bound * (1.0 + 1e-12);
  return rep;
}

LspSolution scale(const LspSolution& sol, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::NonpositiveScale, "scale factor must be positive");
  LspSolution out = sol;
  for (double& t : out.time) t /= r;
  for (auto& z : out.Z) z /= r;
  for (auto& y : out.Y) y /= r;
  return out;
}

LspSolution concatenate(const LspSolution& first, double t_star, const LspSolution& second) {
  if (first.size() == 0 || second.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty solution");
  if (!(t_star >= 0.0) || t_star > first.time.back()) {
    throw Error(ErrorCode::ShiftBeyondHorizon, "concatenation time outside the first solution");
  }
  const Eigen::VectorXd z1 = first.Z_at(t_star);
  if ((z1 - second.Z.front()).lpNorm<1>() > 1e-8 * (1.0 + z1.lpNorm<1>())) {
    throw Error(ErrorCode::EndpointMismatch, "Z1(t*) differs from Z2(0)");
  }
  const Eigen::VectorXd y1 = first.Y_at(t_star);
  LspSolution out;
  out.push_bound = std::max(first.push_bound, second.push_bound);
  for (std::size_t i = 0; i < first.size() && first.time[i] < t_star; ++i) {
    out.time.push_back(first.time[i]);
    out.Z.push_back(first.Z[i]);
    out.Y.push_back(first.Y[i]);
    out.push.push_back(first.push[i]);
  }
  for (std::size_t i = 0; i < second.size(); ++i) {
    out.time.push_back(t_star + second.time[i]);
    out.Z.push_back(second.Z[i]);
    out.Y.push_back(y1 + second.Y[i]);
    out.push.push_back(second.push[i]);
  }
  return out;
}

}  // namespace fluidnet
