#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluidnet/model.hpp"
#include "fluidnet/rng.hpp"
#include "fluidnet/trajectory.hpp"

namespace fluidnet {

/// velocity alpha - (I - P^T) M u
Eigen::VectorXd rhs(const NetworkSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u);

/// Class mask as a bitset; bit k set means class k is empty.
using ClassMask = std::uint64_t;

ClassMask empty_mask(const Eigen::Ref<const Eigen::VectorXd>& Q, double eps);
std::vector<bool> mask_to_vector(ClassMask mask, std::size_t K);

/// Vertex sets of the controls that keep the state in the orthant, cached per
/// class mask Z. consistent(Z) is the union over W subset of Z of the
/// admissible polytope for empty set Z\W intersected with {v_k = 0 on Z\W,
/// v_k >= 0 on W}: classes in W leave zero, the rest stay there. sliding(Z)
/// is the W = {} piece alone. Thread-safe.
class ControlSets {
 public:
  explicit ControlSets(const NetworkSpec& spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const std::vector<Eigen::VectorXd>& consistent(ClassMask mask);
  const std::vector<Eigen::VectorXd>& sliding(ClassMask mask);

 private:
  std::vector<Eigen::VectorXd> build(ClassMask empty, ClassMask leaving) const;

  NetworkSpec spec_;
  std::mutex mutex_;
  std::map<ClassMask, std::vector<Eigen::VectorXd>> consistent_;
  std::map<ClassMask, std::vector<Eigen::VectorXd>> sliding_;
};

/// Strategy for picking one admissible vertex at each decision point.
struct ControlSelector {
  enum class Kind { FirstVertex, RandomVertex, MaxDrain, MinDrain, FixedSequence };
  Kind kind = Kind::FirstVertex;
  std::uint64_t seed = 0;
  std::vector<std::size_t> sequence;

  static ControlSelector first_vertex() { return {}; }
  static ControlSelector random_vertex(std::uint64_t seed) { return {Kind::RandomVertex, seed, {}}; }
  static ControlSelector max_drain() { return {Kind::MaxDrain, 0, {}}; }
  static ControlSelector min_drain() { return {Kind::MinDrain, 0, {}}; }
  static ControlSelector fixed_sequence(std::vector<std::size_t> seq) {
    return {Kind::FixedSequence, 0, std::move(seq)};
  }
  /// first, max_drain, min_drain, random:<seed>, sequence:<i,j,...>
  static ControlSelector parse(const std::string& text);
  std::string name() const;
};

/// Per-run state of a selector (RNG position, sequence cursor).
class SelectorRun {
 public:
  explicit SelectorRun(ControlSelector sel) : sel_(std::move(sel)), rng_(sel_.seed) {}
  /// Index into vertices; vertices must be nonempty.
  std::size_t pick(const NetworkSpec& spec, const std::vector<Eigen::VectorXd>& vertices);

 private:
  ControlSelector sel_;
  CounterRng rng_;
  std::size_t cursor_ = 0;
};

struct SimOptions {
  bool stop_on_drain = true;
  std::size_t max_substeps = 1000000;
};

/// State carried by the integrator between decision points.
struct FluidState {
  double t = 0.0;
  Eigen::VectorXd Q;
  Eigen::VectorXd T;
};

/// Event-splitting integrator shared by simulate and the vertex search.
class Integrator {
 public:
  Integrator(std::shared_ptr<ControlSets> sets, double eps);

  const NetworkSpec& spec() const noexcept { return sets_->spec(); }
  double eps() const noexcept { return eps_; }
  ClassMask mask(const Eigen::VectorXd& Q) const { return empty_mask(Q, eps_); }
  const std::vector<Eigen::VectorXd>& admissible(const Eigen::VectorXd& Q) { return sets_->consistent(mask(Q)); }
  bool zero_velocity_available(const Eigen::VectorXd& Q);

  /// Applies u from s.t until t_limit or the first class reaching zero,
  /// whichever is earlier. Returns true when stopped by a crossing.
  bool advance(FluidState& s, const Eigen::VectorXd& u, double t_limit) const;

  Eigen::VectorXd idle_of(const FluidState& s) const;
  std::size_t idle_dim() const;

 private:
  std::shared_ptr<ControlSets> sets_;
  double eps_;
};

/// Decision-point bookkeeping shared by simulate and the vertex search:
/// checkpoints every h, drain detection over two consecutive decision
/// points, running fluid integral and minimum norm.
struct Walker {
  FluidState s;
  std::size_t checkpoint = 1;
  std::size_t substeps = 0;
  bool low_prev = false;
  double low_since = 0.0;
  bool drained = false;
  double drain_time = 0.0;
  double integral = 0.0;
  double min_norm = 0.0;

  void reset(const Eigen::VectorXd& x0, double eps);
  /// Applies u up to the next decision point (checkpoint or crossing).
  void step(Integrator& integ, const Eigen::VectorXd& u, double h, double horizon, std::size_t max_substeps);
};

Trajectory simulate(const NetworkSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x0,
                    const ControlSelector& selector, double horizon, double h, const SimOptions& opts = {});

/// Overload reusing a shared control-set cache.
Trajectory simulate(std::shared_ptr<ControlSets> sets, const Eigen::Ref<const Eigen::VectorXd>& x0,
                    const ControlSelector& selector, double horizon, double h, const SimOptions& opts = {});

/// Some convex combination of admissible velocities points into the orthant
/// at every empty coordinate of x.
bool viability_check(const NetworkSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x);

/// max over stamps of ||Q(t) - (Q(0) + alpha t - B T(t))||_1
double flow_balance_residual(const NetworkSpec& spec, const Trajectory& traj);

/// Work-conserving: sum (CQ)^T (e - Cu) dt. Priority: sum_k Q_k (1 - sum_{Pi_k} u) dt.
/// Q is averaged over each interval, which is exact for linear pieces.
double complementarity_residual(const NetworkSpec& spec, const Trajectory& traj);

/// ||alpha||_1 + ||B||_1 * max ||u||_1 over the vertices of the all-empty polytope.
double lipschitz_constant(const NetworkSpec& spec);

struct InvariantReport {
  double min_level = 0.0;
  double max_alloc_decrease = 0.0;
  double max_idle_decrease = 0.0;
  double flow_residual = 0.0;
  double complementarity = 0.0;
  bool ok = false;
};

/// Checks the trajectory invariants at their documented tolerances.
InvariantReport check_invariants(const NetworkSpec& spec, const Trajectory& traj);

}  // namespace fluidnet
