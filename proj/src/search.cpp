#include "fluidnet/search.hpp"

#include <limits>
#include <string>
#include <vector>

#include "fluidnet/error.hpp"
#include "fluidnet/parallel.hpp"

namespace fluidnet {
namespace {

struct Context {
  std::shared_ptr<ControlSets> sets;
  Integrator integ;
  SearchBudget budget;
  SearchObjective objective;
  std::size_t max_substeps = 1000000;

  bool terminal(const Walker& w) const { return w.drained || w.s.t >= budget.horizon; }

  double score(const Walker& w) const {
    if (objective == SearchObjective::TotalFluid) return w.integral;
    // A drained walker stays at zero for the rest of the horizon.
    return w.drained ? 0.0 : w.min_norm;
  }

  void rollout(Walker& w, SelectorRun& run) {
    while (!terminal(w)) {
      const auto& verts = integ.admissible(w.s.Q);
      const Eigen::VectorXd u = verts[run.pick(sets->spec(), verts)];
      w.step(integ, u, budget.step, budget.horizon, max_substeps);
    }
  }

  double tail(const Walker& w) {
    Walker copy = w;
    SelectorRun run(ControlSelector::min_drain());
    rollout(copy, run);
    return score(copy);
  }

  double lookahead(const Walker& w, int remaining) {
    if (terminal(w) || remaining <= 0) return tail(w);
    const std::vector<Eigen::VectorXd> verts = integ.admissible(w.s.Q);
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& u : verts) {
      Walker next = w;
      next.step(integ, u, budget.step, budget.horizon, max_substeps);
      best = std::max(best, lookahead(next, remaining - 1));
    }
    return best;
  }
};

Trajectory record_path(Context& ctx, const Eigen::VectorXd& x0, const std::vector<Eigen::VectorXd>& controls) {
  // Replays a decided control sequence to produce the full trajectory.
  const NetworkSpec& spec = ctx.sets->spec();
  Walker w;
  w.reset(x0, ctx.integ.eps());
  Trajectory traj(spec.K(), true, ctx.integ.idle_dim());
  traj.push(w.s.t, w.s.Q, w.s.T, controls.front(), ctx.integ.idle_of(w.s));
  for (std::size_t i = 0; i < controls.size(); ++i) {
    w.step(ctx.integ, controls[i], ctx.budget.step, ctx.budget.horizon, ctx.max_substeps);
    const Eigen::VectorXd& next = i + 1 < controls.size() ? controls[i + 1] : controls[i];
    if (w.s.t > traj.time.back()) traj.push(w.s.t, w.s.Q, w.s.T, next, ctx.integ.idle_of(w.s));
  }
  traj.drained = w.drained;
  traj.drain_time = w.drain_time;
  return traj;
}

struct Candidate {
  double value = -std::numeric_limits<double>::infinity();
  std::vector<Eigen::VectorXd> controls;
  std::string strategy;
};

Candidate run_selector(Context& ctx, const Eigen::VectorXd& x0, const ControlSelector& sel) {
  Walker w;
  w.reset(x0, ctx.integ.eps());
  SelectorRun run(sel);
  Candidate c;
  c.strategy = sel.name();
  while (!ctx.terminal(w)) {
    const auto& verts = ctx.integ.admissible(w.s.Q);
    c.controls.push_back(verts[run.pick(ctx.sets->spec(), verts)]);
    w.step(ctx.integ, c.controls.back(), ctx.budget.step, ctx.budget.horizon, ctx.max_substeps);
  }
  c.value = ctx.score(w);
  return c;
}

Candidate run_receding(Context& ctx, const Eigen::VectorXd& x0, int depth) {
  Walker w;
  w.reset(x0, ctx.integ.eps());
  Candidate c;
  c.strategy = "receding:" + std::to_string(depth);
  while (!ctx.terminal(w)) {
    const std::vector<Eigen::VectorXd> verts = ctx.integ.admissible(w.s.Q);
    std::size_t pick = 0;
    if (verts.size() > 1) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < verts.size(); ++i) {
        Walker next = w;
        next.step(ctx.integ, verts[i], ctx.budget.step, ctx.budget.horizon, ctx.max_substeps);
        const double val = ctx.lookahead(next, depth - 1);
        if (val > best + 1e-12) {
          best = val;
          pick = i;
        }
      }
    }
    c.controls.push_back(verts[pick]);
    w.step(ctx.integ, verts[pick], ctx.budget.step, ctx.budget.horizon, ctx.max_substeps);
  }
  c.value = ctx.score(w);
  return c;
}

}  // namespace

SearchResult receding_horizon_search(const std::shared_ptr<ControlSets>& sets, const Eigen::VectorXd& x0,
                                     const SearchBudget& budget, SearchObjective objective) {
  if (!(budget.step > 0.0) || !(budget.horizon > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "search needs positive step and horizon");
  }
  if (budget.depth < 0 || budget.multistarts < 0) throw Error(ErrorCode::InvalidArgument, "negative search budget");
  if (static_cast<std::size_t>(x0.size()) != sets->spec().K()) {
    throw Error(ErrorCode::DimensionMismatch, "initial state length");
  }

  // Candidate list in a fixed order; ties keep the earliest entry.
  std::vector<ControlSelector> plain = {ControlSelector::min_drain(), ControlSelector::first_vertex(),
                                        ControlSelector::max_drain()};
  const CounterRng root(budget.seed);
  for (int i = 0; i < budget.multistarts; ++i) {
    plain.push_back(ControlSelector::random_vertex(root.split(static_cast<std::uint64_t>(i)).next_u64()));
  }
  const std::size_t n_plain = plain.size();
  const std::size_t n_total = n_plain + static_cast<std::size_t>(budget.depth);

  auto candidates = parallel_map(n_total, [&](std::size_t i) {
    Context ctx{sets, Integrator(sets, emptiness_threshold(x0.lpNorm<1>())), budget, objective};
    if (i < n_plain) return run_selector(ctx, x0, plain[i]);
    return run_receding(ctx, x0, static_cast<int>(i - n_plain) + 1);
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (candidates[i].value > candidates[best].value + 1e-12) best = i;
  }
  Context ctx{sets, Integrator(sets, emptiness_threshold(x0.lpNorm<1>())), budget, objective};
  SearchResult out;
  out.value = candidates[best].value;
  out.strategy = candidates[best].strategy;
  if (candidates[best].controls.empty()) {
    // Already terminal at x0: a single stamp.
    out.best = Trajectory(sets->spec().K(), true, ctx.integ.idle_dim());
    const auto& verts = ctx.integ.admissible(x0);
    Walker w;
    w.reset(x0, ctx.integ.eps());
    out.best.push(0.0, x0, w.s.T, verts.front(), ctx.integ.idle_of(w.s));
  } else {
    out.best = record_path(ctx, x0, candidates[best].controls);
  }
  return out;
}

}  // namespace fluidnet
