#include "fluidnet/gfn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fluidnet/error.hpp"
#include "fluidnet/kernels.hpp"

namespace fluidnet {
namespace {

std::vector<double> interpolate_component(const std::vector<double>& grid, const std::vector<double>& values,
                                          const std::vector<double>& at) {
  // `at` is sorted, so one forward sweep suffices.
  std::vector<double> out(at.size());
  std::size_t i = 0;
  const std::size_t n = grid.size();
  for (std::size_t m = 0; m < at.size(); ++m) {
    const double t = at[m];
    if (n == 1 || t <= grid.front()) {
      out[m] = values.front();
      continue;
    }
    if (t >= grid.back()) {
      out[m] = values.back();
      continue;
    }
    while (i + 2 < n && grid[i + 1] <= t) ++i;
    const double w = (t - grid[i]) / (grid[i + 1] - grid[i]);
    out[m] = values[i] + w * (values[i + 1] - values[i]);
  }
  return out;
}

void require_same_shape(const Trajectory& a, const Trajectory& b) {
  if (a.dim() != b.dim() || a.has_alloc() != b.has_alloc() || a.idle.size() != b.idle.size()) {
    throw Error(ErrorCode::DimensionMismatch, "trajectories have different shapes");
  }
}

Trajectory piecewise_linear_path(std::vector<double> breaks, double drain,
                                 const std::function<Eigen::VectorXd(double)>& state) {
  breaks.push_back(0.0);
  breaks.push_back(drain);
  breaks.push_back(drain + 1.0);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(), [](double a, double b) { return std::abs(a - b) <= 1e-15; }),
               breaks.end());
  Trajectory traj(state(0.0).size(), false);
  for (double t : breaks) {
    if (t >= 0.0) traj.push(t, state(t));
  }
  traj.drained = true;
  traj.drain_time = drain;
  return traj;
}

}  // namespace

Trajectory scale(const Trajectory& traj, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw Error(ErrorCode::NonpositiveScale, "scale factor must be positive");
  Trajectory out = traj;
  for (double& t : out.time) t /= r;
  for (auto* block : {&out.q, &out.alloc, &out.idle}) {
    for (auto& comp : *block) {
      for (double& v : comp) v /= r;
    }
  }
  if (out.drained) out.drain_time /= r;
  return out;
}

Trajectory shift(const Trajectory& traj, double s) {
  if (traj.empty()) throw Error(ErrorCode::ShiftBeyondHorizon, "empty trajectory");
  if (!(s >= 0.0) || s > traj.end_time()) throw Error(ErrorCode::ShiftBeyondHorizon, "shift outside [0, end]");
  Trajectory out(traj.dim(), traj.has_alloc(), traj.idle.size());
  const Eigen::VectorXd q0 = traj.state_at(s);
  if (traj.has_alloc()) {
    const Eigen::VectorXd T0 = traj.allocation_at(s);
    Eigen::VectorXd I0(static_cast<Eigen::Index>(traj.idle.size()));
    for (std::size_t j = 0; j < traj.idle.size(); ++j) {
      I0(static_cast<Eigen::Index>(j)) = interpolate_component(traj.time, traj.idle[j], {s}).front();
    }
    const std::size_t ci = s >= traj.time.back() ? traj.size() - 1 : locate(traj.time, s);
    out.push(0.0, q0, Eigen::VectorXd::Zero(T0.size()), traj.control(ci), Eigen::VectorXd::Zero(I0.size()));
    for (std::size_t i = 0; i < traj.size(); ++i) {
      if (traj.time[i] <= s) continue;
      out.push(traj.time[i] - s, traj.state(i), traj.allocation(i) - T0, traj.control(i), traj.idle_at(i) - I0);
    }
  } else {
    out.push(0.0, q0);
    for (std::size_t i = 0; i < traj.size(); ++i) {
      if (traj.time[i] > s) out.push(traj.time[i] - s, traj.state(i));
    }
  }
  if (traj.drained) {
    out.drained = true;
    out.drain_time = std::max(0.0, traj.drain_time - s);
  }
  return out;
}

Trajectory concatenate(const Trajectory& first, double t_star, const Trajectory& second) {
  require_same_shape(first, second);
  if (first.empty() || second.empty()) throw Error(ErrorCode::InvalidArgument, "cannot concatenate empty paths");
  if (!(t_star >= 0.0) || t_star > first.end_time()) {
    throw Error(ErrorCode::ShiftBeyondHorizon, "concatenation time outside the first path");
  }
  const Eigen::VectorXd q1 = first.state_at(t_star);
  const Eigen::VectorXd q2 = second.state(0);
  if ((q1 - q2).lpNorm<1>() > 1e-8 * (1.0 + q1.lpNorm<1>())) {
    throw Error(ErrorCode::EndpointMismatch, "Q1(t*) differs from Q2(0)");
  }
  Trajectory out(first.dim(), first.has_alloc(), first.idle.size());
  if (first.has_alloc()) {
    const Eigen::VectorXd T1 = first.allocation_at(t_star);
    Eigen::VectorXd I1(static_cast<Eigen::Index>(first.idle.size()));
    for (std::size_t j = 0; j < first.idle.size(); ++j) {
      I1(static_cast<Eigen::Index>(j)) = interpolate_component(first.time, first.idle[j], {t_star}).front();
    }
    for (std::size_t i = 0; i < first.size() && first.time[i] < t_star; ++i) {
      out.push(first.time[i], first.state(i), first.allocation(i), first.control(i), first.idle_at(i));
    }
    for (std::size_t i = 0; i < second.size(); ++i) {
      out.push(t_star + second.time[i], second.state(i), T1 + second.allocation(i), second.control(i),
               I1 + second.idle_at(i));
    }
  } else {
    for (std::size_t i = 0; i < first.size() && first.time[i] < t_star; ++i) out.push(first.time[i], first.state(i));
    for (std::size_t i = 0; i < second.size(); ++i) out.push(t_star + second.time[i], second.state(i));
  }
  if (second.drained) {
    out.drained = true;
    out.drain_time = t_star + second.drain_time;
  }
  return out;
}

double uoc_distance(const Trajectory& a, const Trajectory& b, double T) {
  if (a.dim() != b.dim()) throw Error(ErrorCode::DimensionMismatch, "paths have different dimensions");
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  std::vector<double> grid{0.0, T};
  for (const auto* tr : {&a, &b}) {
    for (double t : tr->time) {
      if (t > 0.0 && t < T) grid.push_back(t);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  std::vector<double> acc(grid.size(), 0.0);
  for (std::size_t k = 0; k < a.dim(); ++k) {
    const auto va = interpolate_component(a.time, a.q[k], grid);
    const auto vb = interpolate_component(b.time, b.q[k], grid);
    kernels::accumulate_abs_diff(va, vb, acc);
  }
  return kernels::max_value(acc);
}

double lipschitz_estimate(const Trajectory& traj) {
  const std::size_t n = traj.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "Lipschitz estimate needs at least two stamps");
  std::vector<double> acc(n - 1, 0.0);
  std::vector<double> dt(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) dt[i] = traj.time[i + 1] - traj.time[i];
  for (const auto& comp : traj.q) {
    kernels::accumulate_abs_diff(std::span<const double>(comp).subspan(1), std::span<const double>(comp).first(n - 1),
                                 acc);
  }
  return kernels::max_ratio(acc, dt, 0.0);
}

// ---------------------------------------------------------------------------

PathFamily PathFamily::network(const NetworkSpec& spec, std::vector<ControlSelector> selectors, double horizon,
                               double step) {
  if (selectors.empty()) throw Error(ErrorCode::InvalidArgument, "a network family needs at least one selector");
  PathFamily f;
  f.kind_ = Kind::NetworkGenerated;
  f.name_ = "network";
  f.dim_ = spec.K();
  f.lipschitz_ = lipschitz_constant(spec);
  f.sets_ = std::make_shared<ControlSets>(spec);
  f.selectors_ = std::move(selectors);
  f.horizon_ = horizon;
  f.step_ = step;
  return f;
}

PathFamily PathFamily::explicit_family(std::string name, std::size_t dim, Generator gen, double lipschitz) {
  PathFamily f;
  f.kind_ = Kind::Explicit;
  f.name_ = std::move(name);
  f.dim_ = dim;
  f.gen_ = std::move(gen);
  f.lipschitz_ = lipschitz;
  return f;
}

std::vector<Trajectory> PathFamily::generate(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim_) throw Error(ErrorCode::DimensionMismatch, "state length");
  if (kind_ == Kind::Explicit) return gen_(x);
  std::vector<Trajectory> out;
  out.reserve(selectors_.size());
  for (const auto& sel : selectors_) out.push_back(simulate(sets_, x, sel, horizon_, step_));
  return out;
}

PathFamily example_family(const std::string& name) {
  if (name == "lsc_counterexample") {
    auto gen = [](const Eigen::VectorXd& x) {
      std::vector<Trajectory> paths;
      const double x1 = x(0), x2 = x(1);
      if (x1 < 0.0 || x2 < 0.0) throw Error(ErrorCode::InvalidArgument, "state must be nonnegative");
      paths.push_back(piecewise_linear_path({x1, x2}, std::max(x1, x2), [=](double t) {
        return Eigen::Vector2d(std::max(x1 - t, 0.0), std::max(x2 - t, 0.0)).eval();
      }));
      if (std::abs(x1 - x2) <= 1e-12) {
        const double c = x1;
        paths.push_back(piecewise_linear_path({}, 2.0 * c, [=](double t) {
          const double v = std::max(c - 0.5 * t, 0.0);
          return Eigen::Vector2d(v, v).eval();
        }));
      }
      return paths;
    };
    return PathFamily::explicit_family(name, 2, gen, 2.0);
  }
  if (name == "concat_counterexample") {
    auto gen = [](const Eigen::VectorXd& x) {
      std::vector<Trajectory> paths;
      const double x1 = x(0), x2 = x(1);
      if (x1 < 0.0 || x2 < 0.0) throw Error(ErrorCode::InvalidArgument, "state must be nonnegative");
      const double total = x1 + x2;
      // Class 1 flows into class 2, then class 2 drains.
      paths.push_back(piecewise_linear_path({x1}, total, [=](double t) {
        if (t <= x1) return Eigen::Vector2d(x1 - t, x2 + t).eval();
        return Eigen::Vector2d(0.0, std::max(total - t, 0.0)).eval();
      }));
      // The mirror image.
      paths.push_back(piecewise_linear_path({x2}, total, [=](double t) {
        if (t <= x2) return Eigen::Vector2d(x1 + t, x2 - t).eval();
        return Eigen::Vector2d(std::max(total - t, 0.0), 0.0).eval();
      }));
      return paths;
    };
    return PathFamily::explicit_family(name, 2, gen, 2.0);
  }
  throw Error(ErrorCode::UnknownFixture, "no example family named '" + name + "'");
}

double membership_residual(const PathFamily& family, const Trajectory& traj, double T) {
  if (traj.empty()) throw Error(ErrorCode::InvalidArgument, "empty path");
  if (family.kind() == PathFamily::Kind::Explicit) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : family.generate(traj.state(0))) best = std::min(best, uoc_distance(traj, p, T));
    return best;
  }
  const NetworkSpec& spec = family.sets()->spec();
  double min_level = 0.0;
  for (const auto& comp : traj.q) min_level = std::min(min_level, *std::min_element(comp.begin(), comp.end()));
  const double q0 = traj.state(0).lpNorm<1>();
  return std::max({flow_balance_residual(spec, traj) / (1.0 + q0),
                   complementarity_residual(spec, traj) / std::max(1.0, traj.end_time()), -min_level});
}

bool contains(const PathFamily& family, const Trajectory& traj, double T, double tol) {
  return membership_residual(family, traj, T) <= tol;
}

ConcatenationReport concatenation_closure_check(const PathFamily& family, const std::vector<Eigen::VectorXd>& starts,
                                                const std::vector<double>& cut_fractions, double T, double tol) {
  ConcatenationReport rep;
  rep.min_residual = std::numeric_limits<double>::infinity();
  for (const auto& z : starts) {
    for (const auto& p : family.generate(z)) {
      const double span = p.drained ? p.drain_time : p.end_time();
      for (double f : cut_fractions) {
        const double t_star = f * span;
        if (!(t_star > 0.0)) continue;
        const Trajectory cont = shift(p, t_star);
        for (const auto& q : family.generate(p.state_at(t_star))) {
          if (uoc_distance(q, cont, T) <= tol) continue;  // p's own continuation
          const Trajectory cand = concatenate(p, t_star, q);
          const double res = membership_residual(family, cand, T);
          ++rep.candidates;
          if (res <= tol) ++rep.members;
          rep.min_residual = std::min(rep.min_residual, res);
        }
      }
    }
  }
  return rep;
}

}  // namespace fluidnet
