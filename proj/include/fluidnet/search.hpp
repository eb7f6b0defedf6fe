#pragma once

// Receding-horizon vertex search over the closed-loop dynamics. Used to
// bound V(x) from below and to look for paths that never shrink.

#include <cstdint>
#include <memory>

#include <Eigen/Dense>

#include "fluidnet/dynamics.hpp"

namespace fluidnet {

struct SearchBudget {
  double horizon = 20.0;
  double step = 0.1;
  int depth = 2;
  int multistarts = 4;
  std::uint64_t seed = 42;
};

enum class SearchObjective {
  TotalFluid,  // integral of ||Q||_1 until drain or horizon
  MinNorm,     // inf of ||Q||_1 over [0, horizon]
};

struct SearchResult {
  double value = 0.0;
  Trajectory best;
  std::string strategy;  // which candidate produced best
};

/// Best value over plain selector rollouts, the receding-horizon search at
/// every depth 1..depth, and `multistarts` seeded random rollouts. Each
/// candidate set contains the one for a smaller budget, so the value never
/// decreases as depth or multistarts grow.
SearchResult receding_horizon_search(const std::shared_ptr<ControlSets>& sets, const Eigen::VectorXd& x0,
                                     const SearchBudget& budget, SearchObjective objective);

}  // namespace fluidnet
