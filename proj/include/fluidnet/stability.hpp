#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluidnet/dynamics.hpp"
#include "fluidnet/lyapunov.hpp"
#include "fluidnet/search.hpp"

namespace fluidnet {

struct Verdict {
  enum class Status { Stable, Unstable, Inconclusive };
  Status status = Status::Inconclusive;
  /// Largest observed drain time over all runs (Stable only).
  double tau = 0.0;
  /// Stable and backed by a verified linear certificate.
  bool certified = false;
  std::optional<Trajectory> witness;

  // Evidence.
  std::vector<Eigen::VectorXd> starts;
  std::vector<std::string> selectors;
  std::vector<double> drain_times;  // per (start, selector), NaN if not drained
  std::size_t runs = 0;
  std::size_t undrained = 0;
  double horizon = 0.0;
  double step = 0.0;
  std::uint64_t seed = 0;
};

std::string to_string(Verdict::Status s);

struct StabilityOptions {
  std::vector<ControlSelector> selectors = {ControlSelector::first_vertex(), ControlSelector::max_drain(),
                                            ControlSelector::min_drain()};
  std::size_t samples = 50;
  double horizon = 50.0;
  double step = 0.1;
  std::uint64_t seed = 42;
  /// Budget for the instability search when some run does not drain.
  SearchBudget witness_budget{50.0, 0.5, 1, 2, 42};
  std::size_t witness_starts = 4;
  bool certify = true;
};

/// Runs every selector from the K unit vectors and `samples` uniform points
/// of the unit l1 sphere of the orthant.
Verdict draining_time(const NetworkSpec& spec, const StabilityOptions& opts = {});

/// Looks for a path with inf ||Q(t)||_1 >= 1 - 1e-6 over [0, horizon] from
/// the unit vectors and then `extra_starts` random unit-sphere states.
std::optional<Trajectory> instability_witness(const NetworkSpec& spec, double horizon, const SearchBudget& budget,
                                              std::size_t extra_starts = 4);

struct ScaleCheckRow {
  Eigen::VectorXd start;
  std::string selector;
  double r = 1.0;
  double base_time = 0.0;
  double scaled_time = 0.0;
  bool ok = false;
};

struct ScaleCheckReport {
  std::vector<ScaleCheckRow> rows;
  bool ok = true;
};

/// Drain time from r*x against r times the drain time from x, within 2h.
ScaleCheckReport scale_invariance_check(const Verdict& verdict, const NetworkSpec& spec,
                                        const std::vector<double>& r_list, std::size_t max_starts = 0);

}  // namespace fluidnet
