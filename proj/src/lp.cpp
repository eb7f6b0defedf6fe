#include "fluidnet/lp.hpp"

#include <algorithm>
#include <cmath>

#include "fluidnet/error.hpp"

namespace fluidnet {
namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr int kMaxIterations = 100000;

// Tableau in the form B^{-1}[A | b]; the last column is the right-hand side.
struct Tableau {
  Eigen::MatrixXd t;
  std::vector<int> basis;
  std::vector<bool> allowed;  // columns that may enter the basis

  int rows() const { return static_cast<int>(t.rows()); }
  int cols() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i < rows(); ++i) {
      if (i != r && t(i, c) != 0.0) t.row(i) -= t(i, c) * t.row(r);
    }
    basis[r] = c;
  }

  // Minimizes cost^T x over the current basis. Returns Optimal or Unbounded.
  LpStatus run(const Eigen::VectorXd& cost) {
    for (int iter = 0; iter < kMaxIterations; ++iter) {
      int enter = -1;
      for (int j = 0; j < cols(); ++j) {
        if (!allowed[j]) continue;
        double reduced = cost(j);
        for (int i = 0; i < rows(); ++i) reduced -= cost(basis[i]) * t(i, j);
        if (reduced < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < rows(); ++i) {
        const double a = t(i, enter);
        if (a <= kPivotTol) continue;
        const double ratio = t(i, cols()) / a;
        if (leave < 0 || ratio < best - 1e-14 ||
            (std::abs(ratio - best) <= 1e-14 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
    return LpStatus::IterationLimit;
  }
};

}  // namespace

LinearProgram::LinearProgram(std::size_t num_vars)
    : lower_(num_vars, 0.0),
      upper_(num_vars, std::numeric_limits<double>::infinity()),
      cost_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_vars))) {}

void LinearProgram::set_free(std::size_t var) {
  lower_.at(var) = -std::numeric_limits<double>::infinity();
}

void LinearProgram::set_lower(std::size_t var, double lb) { lower_.at(var) = lb; }

void LinearProgram::set_upper(std::size_t var, double ub) { upper_.at(var) = ub; }

void LinearProgram::add_constraint(const Eigen::Ref<const Eigen::VectorXd>& coeffs, Sense sense,
                                   double rhs) {
  if (static_cast<std::size_t>(coeffs.size()) != num_vars()) {
    throw Error(ErrorCode::DimensionMismatch, "constraint length does not match variable count");
  }
  rows_.push_back(Row{coeffs, sense, rhs});
}

void LinearProgram::minimize(const Eigen::Ref<const Eigen::VectorXd>& cost) {
  if (static_cast<std::size_t>(cost.size()) != num_vars()) {
    throw Error(ErrorCode::DimensionMismatch, "cost length does not match variable count");
  }
  cost_ = cost;
  maximize_ = false;
}

void LinearProgram::maximize(const Eigen::Ref<const Eigen::VectorXd>& cost) {
  minimize(cost);
  maximize_ = true;
}

LpResult LinearProgram::solve() const {
  const int n = static_cast<int>(num_vars());

  // Map each user variable onto nonnegative columns: x = lb + x' or x = x+ - x-.
  std::vector<int> pos(n), neg(n, -1);
  int ncols = 0;
  for (int j = 0; j < n; ++j) {
    pos[j] = ncols++;
    if (std::isinf(lower_[j])) neg[j] = ncols++;
  }
  const int structural = ncols;

  struct StdRow {
    Eigen::VectorXd a;
    Sense sense;
    double b;
  };
  std::vector<StdRow> std_rows;
  auto lift = [&](const Eigen::VectorXd& coeffs, Sense sense, double rhs) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(structural);
    double b = rhs;
    for (int j = 0; j < n; ++j) {
      const double c = coeffs(j);
      if (c == 0.0) continue;
      a(pos[j]) += c;
      if (neg[j] >= 0) {
        a(neg[j]) -= c;
      } else {
        b -= c * lower_[j];
      }
    }
    std_rows.push_back(StdRow{std::move(a), sense, b});
  };
  for (const auto& row : rows_) lift(row.coeffs, row.sense, row.rhs);
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(upper_[j])) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
      e(j) = 1.0;
      lift(e, Sense::LessEqual, upper_[j]);
    }
  }

  // Nonnegative right-hand sides.
  for (auto& r : std_rows) {
    if (r.b < 0.0) {
      r.a = -r.a;
      r.b = -r.b;
      if (r.sense == Sense::LessEqual) {
        r.sense = Sense::GreaterEqual;
      } else if (r.sense == Sense::GreaterEqual) {
        r.sense = Sense::LessEqual;
      }
    }
  }

  const int m = static_cast<int>(std_rows.size());
  int slack_count = 0;
  int artificial_count = 0;
  for (const auto& r : std_rows) {
    if (r.sense != Sense::Equal) ++slack_count;
    if (r.sense != Sense::LessEqual) ++artificial_count;
  }
  const int total = structural + slack_count + artificial_count;

  Tableau tab;
  tab.t = Eigen::MatrixXd::Zero(m, total + 1);
  tab.basis.assign(m, -1);
  tab.allowed.assign(total, true);
  int next_slack = structural;
  int next_art = structural + slack_count;
  for (int i = 0; i < m; ++i) {
    const auto& r = std_rows[i];
    tab.t.row(i).head(structural) = r.a.transpose();
    tab.t(i, total) = r.b;
    if (r.sense == Sense::LessEqual) {
      tab.t(i, next_slack) = 1.0;
      tab.basis[i] = next_slack++;
    } else {
      if (r.sense == Sense::GreaterEqual) tab.t(i, next_slack++) = -1.0;
      tab.t(i, next_art) = 1.0;
      tab.basis[i] = next_art++;
    }
  }

  LpResult result;
  if (artificial_count > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(total);
    phase1.tail(artificial_count).setOnes();
    const LpStatus s = tab.run(phase1);
    if (s == LpStatus::IterationLimit) {
      result.status = s;
      return result;
    }
    double infeasibility = 0.0;
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] >= structural + slack_count) infeasibility += tab.t(i, total);
    }
    double scale = 1.0;
    for (const auto& r : std_rows) scale = std::max(scale, std::abs(r.b));
    if (infeasibility > 1e-9 * scale) {
      result.status = LpStatus::Infeasible;
      return result;
    }
    // Drive remaining (zero-valued) artificials out of the basis.
    for (int i = 0; i < m; ++i) {
      if (tab.basis[i] < structural + slack_count) continue;
      for (int j = 0; j < structural + slack_count; ++j) {
        if (std::abs(tab.t(i, j)) > 1e-9) {
          tab.pivot(i, j);
          break;
        }
      }
    }
    for (int j = structural + slack_count; j < total; ++j) tab.allowed[j] = false;
  }

  Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(total);
  for (int j = 0; j < n; ++j) {
    const double c = maximize_ ? -cost_(j) : cost_(j);
    phase2(pos[j]) += c;
    if (neg[j] >= 0) phase2(neg[j]) -= c;
  }
  const LpStatus s = tab.run(phase2);
  result.status = s;
  if (s != LpStatus::Optimal) return result;

  Eigen::VectorXd col = Eigen::VectorXd::Zero(total);
  for (int i = 0; i < m; ++i) col(tab.basis[i]) = tab.t(i, total);
  result.x.resize(n);
  for (int j = 0; j < n; ++j) {
    result.x(j) = col(pos[j]) + (neg[j] >= 0 ? -col(neg[j]) : lower_[j]);
  }
  result.objective = cost_.dot(result.x);
  return result;
}

}  // namespace fluidnet
