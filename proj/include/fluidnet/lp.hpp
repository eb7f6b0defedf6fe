#pragma once

// Small dense linear programs. Every program in this library has at most a
// few dozen rows and columns, so a two-phase tableau simplex with Bland's
// anti-cycling rule is exact enough and keeps results reproducible.

#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace fluidnet {

enum class Sense { LessEqual, GreaterEqual, Equal };

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::quiet_NaN();

  bool optimal() const noexcept { return status == LpStatus::Optimal; }
};

class LinearProgram {
 public:
  explicit LinearProgram(std::size_t num_vars);

  std::size_t num_vars() const noexcept { return lower_.size(); }

  /// Variables default to x >= 0.
  void set_free(std::size_t var);
  void set_lower(std::size_t var, double lb);
  void set_upper(std::size_t var, double ub);

  void add_constraint(const Eigen::Ref<const Eigen::VectorXd>& coeffs, Sense sense, double rhs);

  void minimize(const Eigen::Ref<const Eigen::VectorXd>& cost);
  void maximize(const Eigen::Ref<const Eigen::VectorXd>& cost);

  LpResult solve() const;

 private:
  struct Row {
    Eigen::VectorXd coeffs;
    Sense sense;
    double rhs;
  };

  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<Row> rows_;
  Eigen::VectorXd cost_;
  bool maximize_ = false;
};

}  // namespace fluidnet
