#include "fluidnet/fluidlimit.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

#include "fluidnet/error.hpp"
#include "fluidnet/gfn.hpp"
#include "fluidnet/kernels.hpp"
#include "fluidnet/parallel.hpp"

namespace fluidnet {

std::string to_string(Law law) {
  switch (law) {
    case Law::Exponential: return "exponential";
    case Law::Deterministic: return "deterministic";
    case Law::None: return "none";
  }
  return "none";
}

Law parse_law(const std::string& text) {
  if (text == "exponential") return Law::Exponential;
  if (text == "deterministic") return Law::Deterministic;
  if (text == "none") return Law::None;
  throw Error(ErrorCode::InvalidArgument, "unknown law '" + text + "'");
}

QueueingSpec make_queueing_spec(const NetworkSpec& network, std::vector<Law> interarrival, std::vector<Law> service) {
  const std::size_t K = network.K();
  if (interarrival.size() != K || service.size() != K) {
    throw Error(ErrorCode::DimensionMismatch, "one interarrival and one service law per class");
  }
  for (std::size_t k = 0; k < K; ++k) {
    const bool arrives = network.alpha()(static_cast<Eigen::Index>(k)) > 0.0;
    if (arrives == (interarrival[k] == Law::None)) {
      throw Error(ErrorCode::InvalidArgument, "class " + std::to_string(k + 1) + ": law None exactly when alpha = 0");
    }
    if (service[k] == Law::None) throw Error(ErrorCode::InvalidArgument, "every class needs a service law");
  }
  return {network, std::move(interarrival), std::move(service)};
}

namespace {

enum Stream : std::uint64_t { kArrival = 0, kService = 1, kRouting = 2 };

CounterRng stream(std::uint64_t seed, std::size_t k, Stream s) {
  return CounterRng(seed).split(3 * static_cast<std::uint64_t>(k) + s);
}

double draw(Law law, double rate, CounterRng& rng) {
  switch (law) {
    case Law::Exponential: return rng.exponential(rate);
    case Law::Deterministic: return 1.0 / rate;
    case Law::None: return std::numeric_limits<double>::infinity();
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

QueueingState fresh_state(const QueueingSpec& qs, const std::vector<long long>& q, std::uint64_t seed) {
  const std::size_t K = qs.network.K();
  if (q.size() != K) throw Error(ErrorCode::DimensionMismatch, "queue vector length");
  QueueingState x;
  x.q = q;
  x.residual_arrival = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(K), std::numeric_limits<double>::infinity());
  x.residual_service = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  // A dedicated stream so that the initial draws never overlap run draws.
  const std::uint64_t init = mix64(seed ^ 0x1A17ULL);
  for (std::size_t k = 0; k < K; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    if (q[k] < 0) throw Error(ErrorCode::InvalidArgument, "negative queue length");
    CounterRng ra = stream(init, k, kArrival);
    CounterRng rs = stream(init, k, kService);
    x.residual_arrival(ki) = draw(qs.interarrival[k], qs.network.alpha()(ki), ra);
    if (q[k] > 0) x.residual_service(ki) = draw(qs.service[k], qs.network.mu()(ki), rs);
  }
  return x;
}

SamplePath simulate_queueing(const QueueingSpec& qs, const QueueingState& x, double horizon, std::uint64_t seed,
                             std::size_t event_budget) {
  const NetworkSpec& net = qs.network;
  const std::size_t K = net.K();
  const std::size_t J = net.J();
  if (x.q.size() != K || static_cast<std::size_t>(x.residual_arrival.size()) != K ||
      static_cast<std::size_t>(x.residual_service.size()) != K) {
    throw Error(ErrorCode::DimensionMismatch, "initial state does not match the network");
  }
  if (!(horizon >= 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 0");
  for (std::size_t k = 0; k < K; ++k) {
    if (x.q[k] < 0) throw Error(ErrorCode::InvalidArgument, "negative queue length");
    if (x.q[k] > 0 && !(x.residual_service(static_cast<Eigen::Index>(k)) > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "nonempty class needs a positive residual service time");
    }
  }

  std::vector<CounterRng> arr, svc, route;
  for (std::size_t k = 0; k < K; ++k) {
    arr.push_back(stream(seed, k, kArrival));
    svc.push_back(stream(seed, k, kService));
    route.push_back(stream(seed, k, kRouting));
  }
  std::vector<long long> q = x.q;
  std::vector<double> ua(x.residual_arrival.data(), x.residual_arrival.data() + K);
  std::vector<double> vs(x.residual_service.data(), x.residual_service.data() + K);
  std::vector<double> T(K, 0.0);
  std::vector<double> rate(K, 0.0);

  SamplePath path;
  path.horizon = horizon;
  path.q.assign(K, {});
  path.busy.assign(K, {});
  auto record = [&](double t) {
    path.time.push_back(t);
    for (std::size_t k = 0; k < K; ++k) {
      path.q[k].push_back(q[k]);
      path.busy[k].push_back(T[k]);
    }
  };

  auto assign_rates = [&]() {
    std::fill(rate.begin(), rate.end(), 0.0);
    for (std::size_t j = 0; j < J; ++j) {
      const auto& cls = net.classes_at(j);
      if (net.discipline() == Discipline::Priority) {
        std::size_t best = K;
        for (std::size_t k : cls) {
          if (q[k] > 0 && (best == K || net.priority_rank(k) < net.priority_rank(best))) best = k;
        }
        if (best < K) rate[best] = 1.0;
      } else {
        std::size_t busy = 0;
        for (std::size_t k : cls) busy += q[k] > 0 ? 1 : 0;
        for (std::size_t k : cls) {
          if (q[k] > 0) rate[k] = 1.0 / static_cast<double>(busy);
        }
      }
    }
  };

  // A customer joining an empty class starts service with a fresh draw.
  auto enter = [&](std::size_t k) {
    if (q[k]++ == 0) vs[k] = draw(qs.service[k], net.mu()(static_cast<Eigen::Index>(k)), svc[k]);
  };

  double t = 0.0;
  record(t);
  while (true) {
    assign_rates();
    double dt = horizon - t;
    std::size_t who = K;
    bool arrival = false;
    for (std::size_t k = 0; k < K; ++k) {
      if (ua[k] < dt) {
        dt = ua[k];
        who = k;
        arrival = true;
      }
      if (rate[k] > 0.0 && vs[k] / rate[k] < dt) {
        dt = vs[k] / rate[k];
        who = k;
        arrival = false;
      }
    }
    for (std::size_t k = 0; k < K; ++k) {
      ua[k] -= dt;
      if (rate[k] > 0.0) {
        vs[k] -= rate[k] * dt;
        T[k] += rate[k] * dt;
      }
    }
    t += dt;
    if (who == K) break;
    if (++path.events > event_budget) {
      throw Error(ErrorCode::EventBudgetExceeded, "more than " + std::to_string(event_budget) + " events");
    }
    if (arrival) {
      ua[who] = draw(qs.interarrival[who], net.alpha()(static_cast<Eigen::Index>(who)), arr[who]);
      enter(who);
    } else {
      --q[who];
      vs[who] = 0.0;
      if (q[who] > 0) vs[who] = draw(qs.service[who], net.mu()(static_cast<Eigen::Index>(who)), svc[who]);
      // Categorical routing draw on row P_k; the remainder leaves the network.
      const double u = route[who].uniform();
      double acc = 0.0;
      for (std::size_t l = 0; l < K; ++l) {
        acc += net.P()(static_cast<Eigen::Index>(who), static_cast<Eigen::Index>(l));
        if (u < acc) {
          enter(l);
          break;
        }
      }
    }
    if (t > path.time.back()) {
      record(t);
    } else {
      for (std::size_t k = 0; k < K; ++k) {
        path.q[k].back() = q[k];
        path.busy[k].back() = T[k];
      }
    }
  }
  if (t > path.time.back()) record(t);
  return path;
}

// ---------------------------------------------------------------------------

Eigen::VectorXd ScaledPath::at(double t) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(q.size()));
  if (time.empty()) return Eigen::VectorXd::Zero(v.size());
  auto it = std::upper_bound(time.begin(), time.end(), t);
  const std::size_t i = it == time.begin() ? 0 : static_cast<std::size_t>(it - time.begin()) - 1;
  for (std::size_t k = 0; k < q.size(); ++k) v(static_cast<Eigen::Index>(k)) = q[k][i];
  return v;
}

ScaledPath scale_path(const SamplePath& path, double r) {
  if (!(r > 0.0)) throw Error(ErrorCode::NonpositiveScale, "scale factor must be positive");
  ScaledPath out;
  out.horizon = path.horizon / r;
  out.time.reserve(path.size());
  for (double t : path.time) out.time.push_back(t / r);
  out.q.assign(path.q.size(), {});
  for (std::size_t k = 0; k < path.q.size(); ++k) {
    out.q[k].reserve(path.size());
    for (long long v : path.q[k]) out.q[k].push_back(static_cast<double>(v) / r);
  }
  return out;
}

std::vector<Eigen::VectorXd> scale_path(const SamplePath& path, double r, const std::vector<double>& grid) {
  const ScaledPath sp = scale_path(path, r);
  std::vector<Eigen::VectorXd> out;
  out.reserve(grid.size());
  for (double t : grid) out.push_back(sp.at(t));
  return out;
}

PathDistance path_distance(const ScaledPath& path, const Trajectory& fluid, double T) {
  if (path.q.size() != fluid.dim()) throw Error(ErrorCode::DimensionMismatch, "path dimensions differ");
  // Merged evaluation points; jump times appear twice (left and right limits).
  struct Point {
    double t;
    std::size_t idx;  // step index in force at this point
  };
  std::vector<Point> pts;
  std::size_t cur = 0;
  std::size_t fi = 0;
  const std::size_t n = path.time.size();
  auto push_fluid_until = [&](double t_end) {
    while (fi < fluid.size() && fluid.time[fi] < t_end) {
      if (fluid.time[fi] > 0.0 && fluid.time[fi] < T) pts.push_back({fluid.time[fi], cur});
      ++fi;
    }
  };
  pts.push_back({0.0, 0});
  for (std::size_t i = 1; i < n && path.time[i] < T; ++i) {
    push_fluid_until(path.time[i]);
    pts.push_back({path.time[i], cur});  // left limit
    cur = i;
    pts.push_back({path.time[i], cur});  // right value
  }
  push_fluid_until(T);
  pts.push_back({T, cur});

  const std::size_t m = pts.size();
  std::vector<double> times(m), acc(m, 0.0), a(m), b(m);
  for (std::size_t i = 0; i < m; ++i) times[i] = pts[i].t;
  for (std::size_t k = 0; k < fluid.dim(); ++k) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < m; ++i) {
      a[i] = path.q[k][pts[i].idx];
      const double t = pts[i].t;
      if (fluid.size() == 1 || t <= fluid.time.front()) {
        b[i] = fluid.q[k].front();
      } else if (t >= fluid.time.back()) {
        b[i] = fluid.q[k].back();
      } else {
        while (j + 2 < fluid.size() && fluid.time[j + 1] <= t) ++j;
        const double w = (t - fluid.time[j]) / (fluid.time[j + 1] - fluid.time[j]);
        b[i] = fluid.q[k][j] + w * (fluid.q[k][j + 1] - fluid.q[k][j]);
      }
    }
    kernels::accumulate_abs_diff(a, b, acc);
  }
  PathDistance d;
  d.max = kernels::max_value(acc);
  d.mean = T > 0.0 ? kernels::trapezoid(times, acc) / T : d.max;
  return d;
}

namespace {

std::vector<ControlSelector> default_ensemble() {
  std::vector<ControlSelector> e = {ControlSelector::max_drain(), ControlSelector::min_drain(),
                                    ControlSelector::first_vertex()};
  for (std::uint64_t s = 1; s <= 8; ++s) e.push_back(ControlSelector::random_vertex(s));
  return e;
}

struct BestMatch {
  PathDistance dist;
  std::string selector;
};

BestMatch closest_fluid(const std::shared_ptr<ControlSets>& sets, const ScaledPath& sp, const Eigen::VectorXd& x0,
                        double horizon, const CompareOptions& opts) {
  const auto ensemble = opts.ensemble.empty() ? default_ensemble() : opts.ensemble;
  BestMatch best;
  best.dist.max = std::numeric_limits<double>::infinity();
  for (const auto& sel : ensemble) {
    const Trajectory fluid = simulate(sets, x0, sel, horizon, opts.fluid_step);
    const PathDistance d = path_distance(sp, fluid, horizon);
    if (d.max < best.dist.max) best = {d, sel.name()};
  }
  return best;
}

std::vector<long long> scaled_start(const Eigen::VectorXd& dir, double r) {
  std::vector<long long> q(static_cast<std::size_t>(dir.size()));
  for (Eigen::Index k = 0; k < dir.size(); ++k) q[k] = std::llround(r * dir(k));
  return q;
}

Eigen::VectorXd as_fluid(const std::vector<long long>& q, double r) {
  Eigen::VectorXd x(static_cast<Eigen::Index>(q.size()));
  for (std::size_t k = 0; k < q.size(); ++k) x(static_cast<Eigen::Index>(k)) = static_cast<double>(q[k]) / r;
  return x;
}

void check_direction(const QueueingSpec& qs, const Eigen::VectorXd& dir) {
  if (static_cast<std::size_t>(dir.size()) != qs.network.K()) throw Error(ErrorCode::DimensionMismatch, "direction length");
  if ((dir.array() < 0.0).any()) throw Error(ErrorCode::InvalidArgument, "direction must be nonnegative");
}

}  // namespace

std::vector<DistanceRow> fluid_limit_compare(const QueueingSpec& qs, const Eigen::VectorXd& q_direction,
                                             const std::vector<double>& r_list, double horizon,
                                             const std::vector<std::uint64_t>& seeds, const CompareOptions& opts) {
  check_direction(qs, q_direction);
  if (!(horizon > 0.0)) throw Error(ErrorCode::InvalidArgument, "horizon must be positive");
  for (double r : r_list) {
    if (!(r > 0.0)) throw Error(ErrorCode::NonpositiveScale, "scale factors must be positive");
  }
  auto sets = std::make_shared<ControlSets>(qs.network);
  const std::size_t n = r_list.size() * seeds.size();
  return parallel_map(n, [&](std::size_t i) {
    const double r = r_list[i / seeds.size()];
    const std::uint64_t seed = seeds[i % seeds.size()];
    const auto q0 = scaled_start(q_direction, r);
    const QueueingState x = fresh_state(qs, q0, seed);
    const SamplePath path = simulate_queueing(qs, x, r * horizon, seed);
    const ScaledPath sp = scale_path(path, r);
    const BestMatch best = closest_fluid(sets, sp, as_fluid(q0, r), horizon, opts);
    return DistanceRow{r, seed, best.dist.mean, best.dist.max, best.selector, path.events};
  });
}

void write_distance_csv(std::ostream& os, const std::vector<DistanceRow>& rows) {
  os << "r,seed,mean_dist,max_dist\n" << std::setprecision(17);
  for (const auto& row : rows) os << row.r << ',' << row.seed << ',' << row.mean_dist << ',' << row.max_dist << '\n';
}

void write_sample_path_csv(std::ostream& os, const SamplePath& path) {
  const std::size_t K = path.q.size();
  os << "t";
  for (std::size_t k = 0; k < K; ++k) os << ",Q" << k + 1;
  for (std::size_t k = 0; k < K; ++k) os << ",T" << k + 1;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < path.size(); ++i) {
    os << path.time[i];
    for (std::size_t k = 0; k < K; ++k) os << ',' << path.q[k][i];
    for (std::size_t k = 0; k < K; ++k) os << ',' << path.busy[k][i];
    os << '\n';
  }
}

std::vector<double> scaled_slopes(const ScaledPath& path, double dt) {
  if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "slope window must be positive");
  std::vector<double> out;
  const auto steps = static_cast<std::size_t>(std::floor(path.horizon / dt + 1e-9));
  Eigen::VectorXd prev = path.at(0.0);
  for (std::size_t i = 1; i <= steps; ++i) {
    const Eigen::VectorXd cur = path.at(static_cast<double>(i) * dt);
    out.push_back((cur - prev).lpNorm<1>() / dt);
    prev = cur;
  }
  return out;
}

ConcatenationEvidence concatenation_evidence(const QueueingSpec& qs, const Eigen::VectorXd& q_direction, double r,
                                             double t_star, double horizon, std::uint64_t seed,
                                             const CompareOptions& opts) {
  check_direction(qs, q_direction);
  if (!(t_star > 0.0) || t_star >= horizon) throw Error(ErrorCode::InvalidArgument, "need 0 < t_star < horizon");
  const auto q0 = scaled_start(q_direction, r);
  const SamplePath whole = simulate_queueing(qs, fresh_state(qs, q0, seed), r * horizon, seed);
  const ScaledPath sw = scale_path(whole, r);

  // Level reached at r t_star, then a fresh run from there.
  const Eigen::VectorXd mid = sw.at(t_star) * r;
  std::vector<long long> qm(q0.size());
  for (std::size_t k = 0; k < qm.size(); ++k) qm[k] = std::llround(mid(static_cast<Eigen::Index>(k)));
  const std::uint64_t seed2 = mix64(seed + 0x9E37ULL);
  const SamplePath tail = simulate_queueing(qs, fresh_state(qs, qm, seed2), r * (horizon - t_star), seed2);
  const ScaledPath st = scale_path(tail, r);

  ScaledPath splice;
  splice.horizon = horizon;
  splice.q.assign(q0.size(), {});
  for (std::size_t i = 0; i < sw.time.size() && sw.time[i] < t_star; ++i) {
    splice.time.push_back(sw.time[i]);
    for (std::size_t k = 0; k < q0.size(); ++k) splice.q[k].push_back(sw.q[k][i]);
  }
  for (std::size_t i = 0; i < st.time.size(); ++i) {
    splice.time.push_back(t_star + st.time[i]);
    for (std::size_t k = 0; k < q0.size(); ++k) splice.q[k].push_back(st.q[k][i]);
  }

  auto sets = std::make_shared<ControlSets>(qs.network);
  ConcatenationEvidence ev;
  ev.t_star = t_star;
  ev.dist_to_fluid = closest_fluid(sets, splice, as_fluid(q0, r), horizon, opts).dist.max;
  // Distance between the two step functions: compare on the union of jumps.
  std::vector<double> grid = splice.time;
  grid.insert(grid.end(), sw.time.begin(), sw.time.end());
  std::sort(grid.begin(), grid.end());
  double worst = 0.0;
  for (double t : grid) {
    if (t <= horizon) worst = std::max(worst, (splice.at(t) - sw.at(t)).lpNorm<1>());
  }
  ev.dist_to_unspliced = worst;
  return ev;
}

}  // namespace fluidnet
