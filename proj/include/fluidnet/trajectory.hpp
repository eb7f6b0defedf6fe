#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace fluidnet {

/// A sampled fluid path, stored component-major so reductions over the grid
/// run on contiguous arrays. Q is linear between stamps. alloc (cumulative
/// allocation T), idle and control may be absent (zero columns) for paths
/// that do not come from a network, such as closed-form fixtures.
struct Trajectory {
  std::vector<double> time;
  std::vector<std::vector<double>> q;      // q[k][i]
  std::vector<std::vector<double>> alloc;  // T[k][i]
  std::vector<std::vector<double>> idle;   // I[j][i] or Y[k][i]
  std::vector<std::vector<double>> ctrl;   // u[k][i], in force on [time[i], time[i+1])
  bool drained = false;
  double drain_time = std::numeric_limits<double>::quiet_NaN();

  Trajectory() = default;
  Trajectory(std::size_t K, bool with_alloc, std::size_t idle_dim = 0);

  std::size_t dim() const noexcept { return q.size(); }
  std::size_t size() const noexcept { return time.size(); }
  bool empty() const noexcept { return time.empty(); }
  bool has_alloc() const noexcept { return !alloc.empty(); }
  double end_time() const { return time.empty() ? 0.0 : time.back(); }

  void push(double t, const Eigen::Ref<const Eigen::VectorXd>& Q);
  void push(double t, const Eigen::Ref<const Eigen::VectorXd>& Q, const Eigen::Ref<const Eigen::VectorXd>& T,
            const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& I);

  Eigen::VectorXd state(std::size_t i) const;
  Eigen::VectorXd allocation(std::size_t i) const;
  Eigen::VectorXd control(std::size_t i) const;
  Eigen::VectorXd idle_at(std::size_t i) const;

  /// Linear interpolation; before 0 the first state, past the end the last
  /// state (zero for drained paths).
  Eigen::VectorXd state_at(double t) const;
  Eigen::VectorXd allocation_at(double t) const;

  /// ||Q(t_i)||_1 per stamp.
  std::vector<double> l1_norms() const;
};

/// Stamp index i with time[i] <= t < time[i+1], clamped to the grid.
std::size_t locate(const std::vector<double>& grid, double t);

/// Header t,Q1..QK,T1..TK,u1..uK and 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

}  // namespace fluidnet
