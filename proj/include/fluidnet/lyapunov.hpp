#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fluidnet/gfn.hpp"
#include "fluidnet/search.hpp"

namespace fluidnet {

struct FluidIntegral {
  double value = 0.0;
  /// The path was not drained, so value only bounds the integral from below.
  bool truncated = false;
};

/// Trapezoidal integral of ||Q(s)||_1 over the grid with a zero tail after drain.
FluidIntegral total_fluid(const Trajectory& traj);

/// Tail integral from t.
FluidIntegral v_functional(const Trajectory& traj, double t);

enum class VStatus { Exact, LowerBound, NotDrained, Diverged };
std::string to_string(VStatus s);

struct VEstimate {
  /// +inf when Diverged.
  double value = 0.0;
  /// Largest integral actually observed.
  double lower_bound = 0.0;
  VStatus status = VStatus::LowerBound;
  Trajectory argmax;
  std::string strategy;
};

/// Explicit families: exact maximum over the paths through x. Network
/// families: receding-horizon search (a certified lower bound).
VEstimate approximate_V(const PathFamily& family, const Eigen::VectorXd& x, const SearchBudget& budget);

/// Continuous, strictly increasing, zero at zero.
class ComparisonFunction {
 public:
  static ComparisonFunction linear(double c);
  static ComparisonFunction quadratic(double c);
  /// Piecewise-linear interpolation of (r, w) pairs; extended linearly past the end.
  static ComparisonFunction table(std::vector<double> r, std::vector<double> w);

  double operator()(double r) const;
  /// Samples [0, r_max] and checks w(0) = 0 and strict increase.
  bool is_class_k(double r_max, int samples = 1000) const;
  std::string describe() const;

 private:
  enum class Kind { Linear, Quadratic, Table } kind_ = Kind::Linear;
  double c_ = 1.0;
  std::vector<double> r_, w_;
};

struct ComparisonTriple {
  ComparisonFunction w1, w2, w3;
};

/// w1(r) = r^2/(2L), w2(r) = r^2 (1 + L tau) tau, w3(r) = r.
ComparisonTriple comparison_functions(double L, double tau);

struct SandwichViolation {
  Eigen::VectorXd state;
  double V = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct SandwichReport {
  std::size_t checked = 0;
  std::vector<SandwichViolation> violations;
  bool holds() const noexcept { return violations.empty(); }
};

SandwichReport check_sandwich(const std::vector<std::pair<Eigen::VectorXd, double>>& values,
                              const ComparisonTriple& triple);

struct DecreaseReport {
  std::size_t pairs = 0;
  /// max over s < t of V(Q(t)) - V(Q(s)) + int_s^t w3(||Q||); <= 0 is ideal.
  double worst_margin = -std::numeric_limits<double>::infinity();
  double tolerance = 0.0;
  double witness_s = 0.0;
  double witness_t = 0.0;
  bool holds = true;
};

/// Checks the decrease inequality for every pair of evaluated stamps, with
/// slack tol_rel * (1 + V(Q(0))). V is evaluated at no more than max_points
/// evenly spaced stamps (0 means all).
DecreaseReport check_decrease(const std::function<double(const Eigen::VectorXd&)>& V, const Trajectory& traj,
                              const ComparisonFunction& w3, double tol_rel = 1e-4, std::size_t max_points = 0);

struct Certificate {
  enum class Kind { Linear, PiecewiseLinear, Quadratic };
  enum class Status { Verified, Falsified, Unknown };

  Kind kind = Kind::Linear;
  std::vector<Eigen::VectorXd> h;  // one vector for Linear
  Eigen::MatrixXd A;
  /// Drift margin: the LP optimum for linear search, the smallest observed
  /// margin for sampled checks.
  double epsilon = 0.0;
  double required_epsilon = 0.0;
  Status status = Status::Unknown;
  Eigen::VectorXd witness_state;
  Eigen::VectorXd witness_control;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
};

std::string to_string(Certificate::Kind k);
std::string to_string(Certificate::Status s);

/// LP over h in [1e-6, 1]^K and free eps maximizing eps subject to
/// h^T v <= -eps for every velocity v available on a boundary face with at
/// least one nonempty class (vertices of the sliding sets). Verified iff
/// eps > 1e-6.
Certificate linear_certificate_search(const NetworkSpec& spec);

struct SamplingOptions {
  std::size_t samples_per_pattern = 1000;
  std::uint64_t seed = 42;
  double required_epsilon = 1e-6;
};

/// Sampled drift checks on the unit l1 sphere of the orthant, one batch per
/// boundary pattern. Falsified carries the worst state and control.
Certificate piecewise_linear_check(const NetworkSpec& spec, const std::vector<Eigen::VectorXd>& h_list,
                                   const SamplingOptions& opts = {});
Certificate quadratic_check(const NetworkSpec& spec, const Eigen::MatrixXd& A, const SamplingOptions& opts = {});

/// Uniform point on the face {x >= 0, ||x||_1 = 1, x_k = 0 for k in zeros}.
Eigen::VectorXd sample_simplex(CounterRng& rng, std::size_t K, ClassMask zeros = 0);

}  // namespace fluidnet
