#include "fluidnet/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fluidnet/error.hpp"
#include "fluidnet/parallel.hpp"

namespace fluidnet {

std::string to_string(Verdict::Status s) {
  switch (s) {
    case Verdict::Status::Stable: return "Stable";
    case Verdict::Status::Unstable: return "Unstable";
    case Verdict::Status::Inconclusive: return "Inconclusive";
  }
  return "Inconclusive";
}

namespace {

std::vector<Eigen::VectorXd> unit_sphere_starts(std::size_t K, std::size_t samples, std::uint64_t seed) {
  std::vector<Eigen::VectorXd> starts;
  for (std::size_t k = 0; k < K; ++k) starts.push_back(Eigen::VectorXd::Unit(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(k)));
  CounterRng rng = CounterRng(seed).split(0x5354415254ULL);
  for (std::size_t i = 0; i < samples; ++i) starts.push_back(sample_simplex(rng, K));
  return starts;
}

}  // namespace

Verdict draining_time(const NetworkSpec& spec, const StabilityOptions& opts) {
  if (opts.selectors.empty()) throw Error(ErrorCode::InvalidArgument, "no selectors");
  Verdict v;
  v.horizon = opts.horizon;
  v.step = opts.step;
  v.seed = opts.seed;
  v.starts = unit_sphere_starts(spec.K(), opts.samples, opts.seed);
  for (const auto& s : opts.selectors) v.selectors.push_back(s.name());

  auto sets = std::make_shared<ControlSets>(spec);
  const std::size_t n_sel = opts.selectors.size();
  const std::size_t runs = v.starts.size() * n_sel;
  v.drain_times = parallel_map(runs, [&](std::size_t i) {
    const Trajectory tr = simulate(sets, v.starts[i / n_sel], opts.selectors[i % n_sel], opts.horizon, opts.step);
    return tr.drained ? tr.drain_time : std::numeric_limits<double>::quiet_NaN();
  });
  v.runs = runs;
  for (double t : v.drain_times) {
    if (std::isnan(t)) {
      ++v.undrained;
    } else {
      v.tau = std::max(v.tau, t);
    }
  }
  if (v.undrained == 0) {
    v.status = Verdict::Status::Stable;
    if (opts.certify) v.certified = linear_certificate_search(spec).status == Certificate::Status::Verified;
    return v;
  }
  v.tau = 0.0;
  SearchBudget budget = opts.witness_budget;
  budget.seed = opts.seed;
  v.witness = instability_witness(spec, opts.witness_budget.horizon, budget, opts.witness_starts);
  v.status = v.witness ? Verdict::Status::Unstable : Verdict::Status::Inconclusive;
  return v;
}

std::optional<Trajectory> instability_witness(const NetworkSpec& spec, double horizon, const SearchBudget& budget,
                                              std::size_t extra_starts) {
  auto sets = std::make_shared<ControlSets>(spec);
  SearchBudget b = budget;
  b.horizon = horizon;
  for (const auto& x0 : unit_sphere_starts(spec.K(), extra_starts, budget.seed)) {
    SearchResult res = receding_horizon_search(sets, x0, b, SearchObjective::MinNorm);
    if (res.value >= 1.0 - 1e-6 && !res.best.drained && res.best.end_time() >= horizon) return std::move(res.best);
  }
  return std::nullopt;
}

ScaleCheckReport scale_invariance_check(const Verdict& verdict, const NetworkSpec& spec,
                                        const std::vector<double>& r_list, std::size_t max_starts) {
  if (verdict.status != Verdict::Status::Stable) {
    throw Error(ErrorCode::InvalidArgument, "scale invariance is checked on Stable verdicts");
  }
  for (double r : r_list) {
    if (!(r > 0.0)) throw Error(ErrorCode::NonpositiveScale, "scale factors must be positive");
  }
  ScaleCheckReport rep;
  const std::size_t n_sel = verdict.selectors.size();
  const std::size_t n_starts =
      max_starts == 0 ? verdict.starts.size() : std::min(max_starts, verdict.starts.size());
  auto sets = std::make_shared<ControlSets>(spec);
  const double r_max = *std::max_element(r_list.begin(), r_list.end());
  struct Job {
    std::size_t start, sel;
    double r;
  };
  std::vector<Job> jobs;
  for (std::size_t s = 0; s < n_starts; ++s) {
    for (std::size_t k = 0; k < n_sel; ++k) {
      for (double r : r_list) jobs.push_back({s, k, r});
    }
  }
  rep.rows = parallel_map(jobs.size(), [&](std::size_t i) {
    const Job& j = jobs[i];
    ScaleCheckRow row;
    row.start = verdict.starts[j.start];
    row.selector = verdict.selectors[j.sel];
    row.r = j.r;
    row.base_time = verdict.drain_times[j.start * n_sel + j.sel];
    const Trajectory tr = simulate(sets, j.r * row.start, ControlSelector::parse(row.selector),
                                   std::max(verdict.horizon, r_max * (verdict.tau + 2.0 * verdict.step)),
                                   verdict.step);
    row.scaled_time = tr.drained ? tr.drain_time : std::numeric_limits<double>::quiet_NaN();
    row.ok = std::abs(row.scaled_time - j.r * row.base_time) <= 2.0 * verdict.step;
    return row;
  });
  for (const auto& row : rep.rows) rep.ok = rep.ok && row.ok;
  return rep;
}

}  // namespace fluidnet
