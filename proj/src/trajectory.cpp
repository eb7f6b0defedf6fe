#include "fluidnet/trajectory.hpp"

#include <algorithm>
#include <iomanip>
#include <ostream>

#include "fluidnet/error.hpp"
#include "fluidnet/kernels.hpp"

namespace fluidnet {

Trajectory::Trajectory(std::size_t K, bool with_alloc, std::size_t idle_dim)
    : q(K), alloc(with_alloc ? K : 0), idle(with_alloc ? idle_dim : 0), ctrl(with_alloc ? K : 0) {}

void Trajectory::push(double t, const Eigen::Ref<const Eigen::VectorXd>& Q) {
  if (static_cast<std::size_t>(Q.size()) != dim()) throw Error(ErrorCode::DimensionMismatch, "state length");
  if (!time.empty() && !(t > time.back())) {
    throw Error(ErrorCode::InvalidArgument, "trajectory stamps must be strictly increasing");
  }
  time.push_back(t);
  for (std::size_t k = 0; k < dim(); ++k) q[k].push_back(Q(static_cast<Eigen::Index>(k)));
}

void Trajectory::push(double t, const Eigen::Ref<const Eigen::VectorXd>& Q, const Eigen::Ref<const Eigen::VectorXd>& T,
                      const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& I) {
  if (static_cast<std::size_t>(T.size()) != alloc.size() || static_cast<std::size_t>(u.size()) != ctrl.size() ||
      static_cast<std::size_t>(I.size()) != idle.size()) {
    throw Error(ErrorCode::DimensionMismatch, "allocation, control or idle length");
  }
  push(t, Q);
  for (std::size_t k = 0; k < alloc.size(); ++k) alloc[k].push_back(T(static_cast<Eigen::Index>(k)));
  for (std::size_t k = 0; k < ctrl.size(); ++k) ctrl[k].push_back(u(static_cast<Eigen::Index>(k)));
  for (std::size_t j = 0; j < idle.size(); ++j) idle[j].push_back(I(static_cast<Eigen::Index>(j)));
}

namespace {
Eigen::VectorXd column(const std::vector<std::vector<double>>& data, std::size_t i) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(data.size()));
  for (std::size_t k = 0; k < data.size(); ++k) v(static_cast<Eigen::Index>(k)) = data[k].at(i);
  return v;
}

Eigen::VectorXd interpolate(const std::vector<double>& grid, const std::vector<std::vector<double>>& data, double t) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(data.size()));
  if (grid.empty()) return Eigen::VectorXd::Zero(v.size());
  if (t <= grid.front()) return column(data, 0);
  if (t >= grid.back()) return column(data, grid.size() - 1);
  const std::size_t i = locate(grid, t);
  const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
  for (std::size_t k = 0; k < data.size(); ++k) {
    v(static_cast<Eigen::Index>(k)) = data[k][i] + w * (data[k][i + 1] - data[k][i]);
  }
  return v;
}
}  // namespace

Eigen::VectorXd Trajectory::state(std::size_t i) const { return column(q, i); }
Eigen::VectorXd Trajectory::allocation(std::size_t i) const { return column(alloc, i); }
Eigen::VectorXd Trajectory::control(std::size_t i) const { return column(ctrl, i); }
Eigen::VectorXd Trajectory::idle_at(std::size_t i) const { return column(idle, i); }

Eigen::VectorXd Trajectory::state_at(double t) const { return interpolate(time, q, t); }

Eigen::VectorXd Trajectory::allocation_at(double t) const {
  if (!has_alloc()) throw Error(ErrorCode::InvalidArgument, "trajectory carries no allocation");
  if (!time.empty() && t > time.back() && drained && !ctrl.empty()) {
    // Past a recorded drain the last control keeps the path at zero.
    Eigen::VectorXd T = allocation(size() - 1);
    return T + (t - time.back()) * control(size() - 1);
  }
  return interpolate(time, alloc, t);
}

std::vector<double> Trajectory::l1_norms() const {
  std::vector<double> acc(size(), 0.0);
  for (const auto& comp : q) kernels::accumulate_abs(comp, acc);
  return acc;
}

std::size_t locate(const std::vector<double>& grid, double t) {
  if (grid.size() < 2) return 0;
  auto it = std::upper_bound(grid.begin(), grid.end(), t);
  std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
  return std::min(i, grid.size() - 2);
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t K = traj.dim();
  os << "t";
  for (std::size_t k = 0; k < K; ++k) os << ",Q" << k + 1;
  for (std::size_t k = 0; k < K; ++k) os << ",T" << k + 1;
  for (std::size_t k = 0; k < K; ++k) os << ",u" << k + 1;
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    os << traj.time[i];
    for (std::size_t k = 0; k < K; ++k) os << ',' << traj.q[k][i];
    for (std::size_t k = 0; k < K; ++k) os << ',' << (traj.has_alloc() ? traj.alloc[k][i] : 0.0);
    for (std::size_t k = 0; k < K; ++k) os << ',' << (traj.ctrl.empty() ? 0.0 : traj.ctrl[k][i]);
    os << '\n';
  }
}

}  // namespace fluidnet
