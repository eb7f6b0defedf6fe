#pragma once

// Path algebra of generic fluid network models: scaling, shifting,
// concatenation, u.o.c. distance, plus path families and the closure
// checks built on them.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluidnet/dynamics.hpp"
#include "fluidnet/trajectory.hpp"

namespace fluidnet {

/// t -> Q(rt)/r, with T(rt)/r and idle(rt)/r.
Trajectory scale(const Trajectory& traj, double r);

/// t -> Q(s+t), with T and idle renormalized to start at 0.
Trajectory shift(const Trajectory& traj, double s);

/// Q1 on [0, t_star], then Q2(t - t_star). T and idle are spliced continuously.
Trajectory concatenate(const Trajectory& first, double t_star, const Trajectory& second);

/// sup over [0, T] of ||Q1(t) - Q2(t)||_1 on the merged grid.
double uoc_distance(const Trajectory& a, const Trajectory& b, double T);

/// max over consecutive stamps of ||dQ||_1 / dt.
double lipschitz_estimate(const Trajectory& traj);

class PathFamily {
 public:
  enum class Kind { NetworkGenerated, Explicit };
  using Generator = std::function<std::vector<Trajectory>(const Eigen::VectorXd&)>;

  /// Paths of the closed-loop dynamics under each selector.
  static PathFamily network(const NetworkSpec& spec, std::vector<ControlSelector> selectors, double horizon,
                            double step);
  static PathFamily explicit_family(std::string name, std::size_t dim, Generator gen, double lipschitz);

  Kind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  std::size_t dim() const noexcept { return dim_; }
  /// Common Lipschitz constant: the theoretical one for networks, the
  /// closed-form one for explicit families.
  double lipschitz() const noexcept { return lipschitz_; }
  const std::shared_ptr<ControlSets>& sets() const noexcept { return sets_; }
  const std::vector<ControlSelector>& selectors() const noexcept { return selectors_; }
  double horizon() const noexcept { return horizon_; }
  double step() const noexcept { return step_; }

  std::vector<Trajectory> generate(const Eigen::VectorXd& x) const;

 private:
  Kind kind_ = Kind::Explicit;
  std::string name_;
  std::size_t dim_ = 0;
  double lipschitz_ = 0.0;
  Generator gen_;
  std::shared_ptr<ControlSets> sets_;
  std::vector<ControlSelector> selectors_;
  double horizon_ = 0.0;
  double step_ = 0.0;
};

/// "lsc_counterexample": coordinatewise drains (x1 - t)^+, (x2 - t)^+ for every
/// x plus the diagonal path (c - t/2)^+ when x1 = x2 = c.
/// "concat_counterexample": the two exchange paths per state (class 1 drains
/// into class 2, or the reverse).
PathFamily example_family(const std::string& name);

/// Distance from traj to the family on [0, T]: for explicit families the
/// smallest u.o.c. distance to a generated path from traj(0); for network
/// families the flow-balance residual plus the complementarity residual.
double membership_residual(const PathFamily& family, const Trajectory& traj, double T);
bool contains(const PathFamily& family, const Trajectory& traj, double T, double tol = 1e-7);

struct ConcatenationReport {
  std::size_t candidates = 0;  // concatenations of distinct paths tried
  std::size_t members = 0;     // of those, how many are family members
  double min_residual = 0.0;   // smallest membership residual among candidates
};

/// For each start state and cut fraction f in (0,1): for every path p from
/// the state and every path q from p(t*) that is not p's own continuation,
/// tests whether p concatenated with q at t* = f * drain(p) is in the family.
ConcatenationReport concatenation_closure_check(const PathFamily& family, const std::vector<Eigen::VectorXd>& starts,
                                                const std::vector<double>& cut_fractions, double T,
                                                double tol = 1e-7);

}  // namespace fluidnet
