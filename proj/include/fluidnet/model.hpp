#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fluidnet/polytope.hpp"

namespace fluidnet {

enum class Discipline { WorkConserving, Priority };

/// Unvalidated network data as read from a file or built by hand.
/// priority_order lists 0-based class indices, highest priority first; only
/// the relative order of classes sharing a station matters.
struct RawNetworkSpec {
  Eigen::VectorXd alpha;
  Eigen::VectorXd mu;
  Eigen::MatrixXd P;
  Eigen::MatrixXd C;
  Discipline discipline = Discipline::WorkConserving;
  std::vector<int> priority_order;
};

struct SpectralRadius {
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Perron root of a nonnegative square matrix. Splits into strongly connected
/// blocks and runs power iteration on each block + I with Collatz-Wielandt
/// bounds (relative tolerance 1e-12, 10000 iterations). A block that does not
/// converge falls back to the smaller of its last upper bound and max row sum.
SpectralRadius spectral_radius(const Eigen::MatrixXd& A);

class NetworkSpec {
 public:
  std::size_t K() const noexcept { return static_cast<std::size_t>(alpha_.size()); }
  std::size_t J() const noexcept { return static_cast<std::size_t>(C_.rows()); }
  const Eigen::VectorXd& alpha() const noexcept { return alpha_; }
  const Eigen::VectorXd& mu() const noexcept { return mu_; }
  const Eigen::MatrixXd& P() const noexcept { return P_; }
  const Eigen::MatrixXd& C() const noexcept { return C_; }
  /// (I - P^T) diag(mu): velocity is alpha - B u.
  const Eigen::MatrixXd& B() const noexcept { return B_; }
  Discipline discipline() const noexcept { return discipline_; }
  double routing_spectral_radius() const noexcept { return rho_; }

  std::size_t station_of(std::size_t k) const { return station_of_.at(k); }
  const std::vector<std::size_t>& classes_at(std::size_t j) const { return classes_at_.at(j); }
  /// 0 is the highest priority. Work-conserving specs rank every class 0.
  std::size_t priority_rank(std::size_t k) const { return rank_.at(k); }
  /// Classes at k's station whose priority is at least k's, k included.
  const std::vector<std::size_t>& higher_or_equal(std::size_t k) const { return pi_sets_.at(k); }
  const std::vector<int>& priority_order() const noexcept { return order_; }

  RawNetworkSpec raw() const;

 private:
  friend NetworkSpec validate(const RawNetworkSpec& raw);

  Eigen::VectorXd alpha_, mu_;
  Eigen::MatrixXd P_, C_, B_;
  Discipline discipline_ = Discipline::WorkConserving;
  double rho_ = 0.0;
  std::vector<std::size_t> station_of_;
  std::vector<std::vector<std::size_t>> classes_at_;
  std::vector<std::size_t> rank_;
  std::vector<std::vector<std::size_t>> pi_sets_;
  std::vector<int> order_;
};

NetworkSpec validate(const RawNetworkSpec& raw);

/// Vertex set of the admissible allocation rates for one boundary
/// configuration. active_set flags empty stations (work-conserving) or empty
/// classes (priority).
struct ControlPolytope {
  std::size_t dim = 0;
  std::vector<Eigen::VectorXd> vertices;
  std::vector<bool> active_set;

  bool contains(const Eigen::Ref<const Eigen::VectorXd>& u, double tol = 1e-10) const;
};

ControlPolytope work_conserving_polytope(const NetworkSpec& spec, const std::vector<bool>& empty_stations);
ControlPolytope priority_polytope(const NetworkSpec& spec, const std::vector<bool>& empty_classes);

/// Stations whose classes are all flagged empty.
std::vector<bool> empty_stations_of(const NetworkSpec& spec, const std::vector<bool>& empty_classes);

/// Dispatches on the discipline; the argument is always a class mask.
ControlPolytope control_polytope(const NetworkSpec& spec, const std::vector<bool>& empty_classes);

/// Halfspace form of the admissible set for a class mask, shared by the
/// polytope constructors and the boundary-consistent sets in dynamics.
HalfspaceSystem control_constraints(const NetworkSpec& spec, const std::vector<bool>& empty_classes);

/// Threshold below which a fluid level counts as empty.
inline double emptiness_threshold(double initial_l1) noexcept { return 1e-9 * (1.0 + initial_l1); }

}  // namespace fluidnet
