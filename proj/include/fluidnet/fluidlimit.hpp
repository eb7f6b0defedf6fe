#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluidnet/dynamics.hpp"
#include "fluidnet/model.hpp"

namespace fluidnet {

enum class Law { Exponential, Deterministic, None };
std::string to_string(Law law);
Law parse_law(const std::string& text);

/// Network plus primitive laws. Interarrival means are 1/alpha_k and
/// service means 1/mu_k; Law::None marks classes without exogenous arrivals.
struct QueueingSpec {
  NetworkSpec network;
  std::vector<Law> interarrival;
  std::vector<Law> service;
};

/// Checks laws against the rates (None exactly when alpha_k = 0).
QueueingSpec make_queueing_spec(const NetworkSpec& network, std::vector<Law> interarrival, std::vector<Law> service);

/// x = (q, u, v): queue lengths, residual interarrival times, residual
/// service times of the head-of-line customers.
struct QueueingState {
  std::vector<long long> q;
  Eigen::VectorXd residual_arrival;
  Eigen::VectorXd residual_service;
};

/// Fresh residuals: a full interarrival draw per arriving class and a full
/// service draw per nonempty class.
QueueingState fresh_state(const QueueingSpec& qs, const std::vector<long long>& q, std::uint64_t seed);

struct SamplePath {
  std::vector<double> time;              // event stamps, time[0] = 0
  std::vector<std::vector<long long>> q;  // q[k][i], constant on [time[i], time[i+1])
  std::vector<std::vector<double>> busy;  // cumulative service effort T[k][i]
  std::size_t events = 0;
  double horizon = 0.0;

  std::size_t size() const noexcept { return time.size(); }
};

/// Event-driven simulation. Priority: preemptive-resume by rank at each
/// station. Work-conserving: equal capacity shares across the nonempty
/// classes of a station, each serving its head-of-line customer.
SamplePath simulate_queueing(const QueueingSpec& qs, const QueueingState& x, double horizon, std::uint64_t seed,
                             std::size_t event_budget = 100000000);

/// t -> Q(r t)/r as a right-continuous step function.
struct ScaledPath {
  std::vector<double> time;
  std::vector<std::vector<double>> q;  // q[k][i]
  double horizon = 0.0;

  Eigen::VectorXd at(double t) const;
};

ScaledPath scale_path(const SamplePath& path, double r);
/// Values of the scaled path on a requested grid.
std::vector<Eigen::VectorXd> scale_path(const SamplePath& path, double r, const std::vector<double>& grid);

struct PathDistance {
  double mean = 0.0;  // time average of ||diff||_1 over [0, T]
  double max = 0.0;   // sup of ||diff||_1 over [0, T]
};

/// Step function against a piecewise-linear fluid path, evaluated on both
/// sides of every jump and at every fluid stamp.
PathDistance path_distance(const ScaledPath& path, const Trajectory& fluid, double T);

struct DistanceRow {
  double r = 0.0;
  std::uint64_t seed = 0;
  double mean_dist = 0.0;
  double max_dist = 0.0;
  std::string matched;  // selector of the best-matching fluid path
  std::size_t events = 0;
};

struct CompareOptions {
  double fluid_step = 0.01;
  /// Selectors of the fluid ensemble; empty means MaxDrain, MinDrain,
  /// FirstVertex and 8 random seeds.
  std::vector<ControlSelector> ensemble;
};

/// For each r and seed: start at round(r q_direction) with fresh residuals,
/// simulate to r*horizon, scale by r and compare with the closest fluid path
/// (smallest sup distance) of the ensemble started at the same scaled state.
std::vector<DistanceRow> fluid_limit_compare(const QueueingSpec& qs, const Eigen::VectorXd& q_direction,
                                             const std::vector<double>& r_list, double horizon,
                                             const std::vector<std::uint64_t>& seeds, const CompareOptions& opts = {});

void write_distance_csv(std::ostream& os, const std::vector<DistanceRow>& rows);
void write_sample_path_csv(std::ostream& os, const SamplePath& path);

/// Slopes ||Q(t+dt) - Q(t)||_1 / dt of the scaled path on a uniform grid.
std::vector<double> scaled_slopes(const ScaledPath& path, double dt);

struct ConcatenationEvidence {
  double t_star = 0.0;
  double dist_to_fluid = 0.0;       // spliced scaled path vs closest fluid path
  double dist_to_unspliced = 0.0;   // spliced vs the uninterrupted run
};

/// Splices two sample paths at the level reached at time r t_star (the second
/// restarts there with fresh residuals and another seed) and measures how far
/// the scaled splice is from the fluid ensemble. Reported, never asserted.
ConcatenationEvidence concatenation_evidence(const QueueingSpec& qs, const Eigen::VectorXd& q_direction, double r,
                                             double t_star, double horizon, std::uint64_t seed,
                                             const CompareOptions& opts = {});

}  // namespace fluidnet
