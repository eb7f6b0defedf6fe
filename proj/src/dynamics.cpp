#include "fluidnet/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluidnet/error.hpp"
#include "fluidnet/lp.hpp"
#include "fluidnet/polytope.hpp"

namespace fluidnet {

Eigen::VectorXd rhs(const NetworkSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& u) {
  if (static_cast<std::size_t>(u.size()) != spec.K()) throw Error(ErrorCode::DimensionMismatch, "control length");
  return spec.alpha() - spec.B() * u;
}

ClassMask empty_mask(const Eigen::Ref<const Eigen::VectorXd>& Q, double eps) {
  if (Q.size() > 64) throw Error(ErrorCode::DimensionTooLarge, "at most 64 classes are supported");
  ClassMask m = 0;
  for (Eigen::Index k = 0; k < Q.size(); ++k) {
    if (Q(k) < eps) m |= ClassMask{1} << k;
  }
  return m;
}

std::vector<bool> mask_to_vector(ClassMask mask, std::size_t K) {
  std::vector<bool> v(K);
  for (std::size_t k = 0; k < K; ++k) v[k] = ((mask >> k) & 1U) != 0;
  return v;
}

// ---------------------------------------------------------------------------

ControlSets::ControlSets(const NetworkSpec& spec) : spec_(spec) {}

std::vector<Eigen::VectorXd> ControlSets::build(ClassMask empty, ClassMask leaving) const {
  const std::size_t K = spec_.K();
  HalfspaceSystem sys = control_constraints(spec_, mask_to_vector(empty, K));
  for (std::size_t k = 0; k < K; ++k) {
    const auto ki = static_cast<Eigen::Index>(k);
    if ((empty >> k) & 1U) {
      sys.add_eq(spec_.B().row(ki), spec_.alpha()(ki));
    } else if ((leaving >> k) & 1U) {
      sys.add_le(spec_.B().row(ki), spec_.alpha()(ki));
    }
  }
  return enumerate_vertices(sys);
}

const std::vector<Eigen::VectorXd>& ControlSets::consistent(ClassMask mask) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = consistent_.find(mask);
  if (it != consistent_.end()) return it->second;
  std::vector<Eigen::VectorXd> all;
  for (ClassMask w = mask;; w = (w - 1) & mask) {
    auto part = build(mask & ~w, w);
    all.insert(all.end(), part.begin(), part.end());
    if (w == 0) break;
  }
  sort_unique(all);
  if (all.empty()) throw Error(ErrorCode::InfeasibleActiveSet, "no admissible control keeps the state nonnegative");
  return consistent_.emplace(mask, std::move(all)).first->second;
}

const std::vector<Eigen::VectorXd>& ControlSets::sliding(ClassMask mask) {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = sliding_.find(mask);
  if (it != sliding_.end()) return it->second;
  return sliding_.emplace(mask, build(mask, 0)).first->second;
}

// ---------------------------------------------------------------------------

ControlSelector ControlSelector::parse(const std::string& text) {
  if (text == "first") return first_vertex();
  if (text == "max_drain") return max_drain();
  if (text == "min_drain") return min_drain();
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (head == "random" && !tail.empty()) return random_vertex(std::stoull(tail));
    if (head == "sequence" && !tail.empty()) {
      std::vector<std::size_t> seq;
      std::stringstream ss(tail);
      std::string item;
      while (std::getline(ss, item, ',')) seq.push_back(std::stoull(item));
      return fixed_sequence(std::move(seq));
    }
  } catch (const std::logic_error&) {
    // fall through to the error below
  }
  throw Error(ErrorCode::InvalidArgument, "unknown selector '" + text + "'");
}

std::string ControlSelector::name() const {
  switch (kind) {
    case Kind::FirstVertex: return "first";
    case Kind::MaxDrain: return "max_drain";
    case Kind::MinDrain: return "min_drain";
    case Kind::RandomVertex: return "random:" + std::to_string(seed);
    case Kind::FixedSequence: {
      std::string s = "sequence:";
      for (std::size_t i = 0; i < sequence.size(); ++i) s += (i ? "," : "") + std::to_string(sequence[i]);
      return s;
    }
  }
  return "first";
}

std::size_t SelectorRun::pick(const NetworkSpec& spec, const std::vector<Eigen::VectorXd>& vertices) {
  const std::size_t n = vertices.size();
  if (n == 0) throw Error(ErrorCode::InfeasibleActiveSet, "empty vertex set");
  switch (sel_.kind) {
    case ControlSelector::Kind::FirstVertex: return 0;
    case ControlSelector::Kind::RandomVertex: return static_cast<std::size_t>(rng_.below(n));
    case ControlSelector::Kind::FixedSequence:
      if (sel_.sequence.empty()) return 0;
      return sel_.sequence[cursor_++ % sel_.sequence.size()] % n;
    case ControlSelector::Kind::MaxDrain:
    case ControlSelector::Kind::MinDrain: {
      // Total velocity e^T v; vertices are sorted, so the first optimum is the
      // lexicographically smallest one.
      const double sign = sel_.kind == ControlSelector::Kind::MaxDrain ? 1.0 : -1.0;
      std::size_t best = 0;
      double best_val = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double val = sign * rhs(spec, vertices[i]).sum();
        if (i == 0 || val < best_val - 1e-12) {
          best = i;
          best_val = val;
        }
      }
      return best;
    }
  }
  return 0;
}

// ---------------------------------------------------------------------------

Integrator::Integrator(std::shared_ptr<ControlSets> sets, double eps) : sets_(std::move(sets)), eps_(eps) {}

bool Integrator::zero_velocity_available(const Eigen::VectorXd& Q) { return !sets_->sliding(mask(Q)).empty(); }

bool Integrator::advance(FluidState& s, const Eigen::VectorXd& u, double t_limit) const {
  const Eigen::VectorXd v = rhs(spec(), u);
  const double dt = t_limit - s.t;
  double tau = dt;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (v(k) >= 0.0) continue;
    // Roundoff-level drift of a class held at zero is not an event.
    if (s.Q(k) < eps_ && v(k) > -1e-9) continue;
    tau = std::min(tau, std::max(0.0, s.Q(k)) / -v(k));
  }
  const bool crossed = tau < dt;
  s.Q += tau * v;
  s.T += tau * u;
  if (crossed) {
    s.t += tau;
    for (Eigen::Index k = 0; k < v.size(); ++k) {
      if (v(k) < 0.0 && s.Q(k) <= std::abs(v(k)) * tau * 1e-12 + 1e-300) s.Q(k) = 0.0;
    }
  } else {
    s.t = t_limit;
  }
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (s.Q(k) < 0.0) s.Q(k) = 0.0;
  }
  return crossed;
}

std::size_t Integrator::idle_dim() const {
  return spec().discipline() == Discipline::WorkConserving ? spec().J() : spec().K();
}

Eigen::VectorXd Integrator::idle_of(const FluidState& s) const {
  const NetworkSpec& sp = spec();
  if (sp.discipline() == Discipline::WorkConserving) {
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(sp.J()), s.t) - sp.C() * s.T;
  }
  Eigen::VectorXd Y(static_cast<Eigen::Index>(sp.K()));
  for (std::size_t k = 0; k < sp.K(); ++k) {
    double used = 0.0;
    for (std::size_t l : sp.higher_or_equal(k)) used += s.T(static_cast<Eigen::Index>(l));
    Y(static_cast<Eigen::Index>(k)) = s.t - used;
  }
  return Y;
}

// ---------------------------------------------------------------------------

Trajectory simulate(const NetworkSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x0,
                    const ControlSelector& selector, double horizon, double h, const SimOptions& opts) {
  return simulate(std::make_shared<ControlSets>(spec), x0, selector, horizon, h, opts);
}

void Walker::reset(const Eigen::VectorXd& x0, double eps) {
  s = FluidState{0.0, x0, Eigen::VectorXd::Zero(x0.size())};
  checkpoint = 1;
  substeps = 0;
  const double n = x0.lpNorm<1>();
  low_prev = n < eps;
  low_since = low_prev ? 0.0 : std::nan("");
  drained = false;
  drain_time = std::nan("");
  integral = 0.0;
  min_norm = n;
}

void Walker::step(Integrator& integ, const Eigen::VectorXd& u, double h, double horizon, std::size_t max_substeps) {
  const double n0 = s.Q.lpNorm<1>();
  const double t0 = s.t;
  const double next = std::min(static_cast<double>(checkpoint) * h, horizon);
  const bool crossed = integ.advance(s, u, next);
  if (++substeps > max_substeps) {
    throw Error(ErrorCode::StepTooLarge, "event splitting exceeded " + std::to_string(max_substeps) + " sub-steps");
  }
  if (!crossed || next - s.t <= 1e-12 * std::max(1.0, next)) {
    s.t = next;
    ++checkpoint;
  }
  const double n1 = s.Q.lpNorm<1>();
  // Q >= 0 and linear on the piece, so ||Q||_1 is linear too.
  integral += 0.5 * (n0 + n1) * (s.t - t0);
  min_norm = std::min(min_norm, n1);
  const bool low = n1 < integ.eps();
  if (low && !low_prev) low_since = s.t;
  if (low && low_prev && !drained && integ.zero_velocity_available(s.Q)) {
    drained = true;
    drain_time = low_since;
  }
  low_prev = low;
}

Trajectory simulate(std::shared_ptr<ControlSets> sets, const Eigen::Ref<const Eigen::VectorXd>& x0,
                    const ControlSelector& selector, double horizon, double h, const SimOptions& opts) {
  const NetworkSpec& spec = sets->spec();
  const auto K = static_cast<Eigen::Index>(spec.K());
  if (x0.size() != K) throw Error(ErrorCode::DimensionMismatch, "initial state length");
  if ((x0.array() < 0.0).any() || !x0.allFinite()) throw Error(ErrorCode::InvalidArgument, "initial state must be >= 0");
  if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "step must be positive");
  if (!(horizon >= 0.0) || !std::isfinite(horizon)) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 0");

  Integrator integ(sets, emptiness_threshold(x0.lpNorm<1>()));
  SelectorRun run(selector);
  Walker w;
  w.reset(x0, integ.eps());
  Trajectory traj(spec.K(), true, integ.idle_dim());

  auto record = [&](const Eigen::VectorXd& u) {
    if (!traj.empty() && w.s.t <= traj.time.back()) {
      for (Eigen::Index k = 0; k < K; ++k) traj.ctrl[k].back() = u(k);
      return;
    }
    traj.push(w.s.t, w.s.Q, w.s.T, u, integ.idle_of(w.s));
  };
  auto choose = [&]() -> Eigen::VectorXd {
    const auto& verts = integ.admissible(w.s.Q);
    return verts[run.pick(spec, verts)];
  };

  Eigen::VectorXd u = choose();
  record(u);
  while (w.s.t < horizon) {
    w.step(integ, u, h, horizon, opts.max_substeps);
    if (w.s.t >= horizon) {
      record(u);
      break;
    }
    if (w.drained && opts.stop_on_drain) {
      record(sets->sliding(integ.mask(w.s.Q)).front());
      break;
    }
    u = choose();
    record(u);
  }
  traj.drained = w.drained;
  traj.drain_time = w.drain_time;
  return traj;
}

// ---------------------------------------------------------------------------

bool viability_check(const NetworkSpec& spec, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (static_cast<std::size_t>(x.size()) != spec.K()) throw Error(ErrorCode::DimensionMismatch, "state length");
  const ClassMask mask = empty_mask(x, emptiness_threshold(x.lpNorm<1>()));
  if (mask == 0) return true;
  const ControlPolytope poly = control_polytope(spec, mask_to_vector(mask, spec.K()));
  const std::size_t m = poly.vertices.size();
  std::vector<Eigen::VectorXd> vel;
  for (const auto& u : poly.vertices) vel.push_back(rhs(spec, u));
  LinearProgram lp(m);
  for (std::size_t k = 0; k < spec.K(); ++k) {
    if (!((mask >> k) & 1U)) continue;
    Eigen::VectorXd row(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) row(static_cast<Eigen::Index>(i)) = vel[i](static_cast<Eigen::Index>(k));
    lp.add_constraint(row, Sense::GreaterEqual, -1e-12);
  }
  lp.add_constraint(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(m)), Sense::Equal, 1.0);
  lp.minimize(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m)));
  return lp.solve().optimal();
}

double flow_balance_residual(const NetworkSpec& spec, const Trajectory& traj) {
  if (traj.dim() != spec.K() || !traj.has_alloc()) {
    throw Error(ErrorCode::DimensionMismatch, "trajectory does not match the network");
  }
  if (traj.empty()) return 0.0;
  const Eigen::VectorXd Q0 = traj.state(0);
  double worst = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Eigen::VectorXd pred = Q0 + spec.alpha() * traj.time[i] - spec.B() * traj.allocation(i);
    worst = std::max(worst, (traj.state(i) - pred).lpNorm<1>());
  }
  return worst;
}

double complementarity_residual(const NetworkSpec& spec, const Trajectory& traj) {
  if (traj.dim() != spec.K() || traj.ctrl.size() != spec.K()) {
    throw Error(ErrorCode::DimensionMismatch, "trajectory does not match the network");
  }
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double dt = traj.time[i + 1] - traj.time[i];
    const Eigen::VectorXd Qm = 0.5 * (traj.state(i) + traj.state(i + 1));
    const Eigen::VectorXd u = traj.control(i);
    if (spec.discipline() == Discipline::WorkConserving) {
      const Eigen::VectorXd slack = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(spec.J())) - spec.C() * u;
      total += (spec.C() * Qm).dot(slack) * dt;
    } else {
      for (std::size_t k = 0; k < spec.K(); ++k) {
        double used = 0.0;
        for (std::size_t l : spec.higher_or_equal(k)) used += u(static_cast<Eigen::Index>(l));
        total += Qm(static_cast<Eigen::Index>(k)) * (1.0 - used) * dt;
      }
    }
  }
  return total;
}

double lipschitz_constant(const NetworkSpec& spec) {
  const ControlPolytope all = control_polytope(spec, std::vector<bool>(spec.K(), true));
  double u_max = 0.0;
  for (const auto& u : all.vertices) u_max = std::max(u_max, u.lpNorm<1>());
  const double b_norm = spec.B().cwiseAbs().colwise().sum().maxCoeff();
  return spec.alpha().lpNorm<1>() + b_norm * u_max;
}

InvariantReport check_invariants(const NetworkSpec& spec, const Trajectory& traj) {
  InvariantReport r;
  if (traj.empty()) {
    r.ok = true;
    return r;
  }
  r.min_level = 0.0;
  for (const auto& comp : traj.q) r.min_level = std::min(r.min_level, *std::min_element(comp.begin(), comp.end()));
  for (const auto& comp : traj.alloc) {
    for (std::size_t i = 0; i + 1 < comp.size(); ++i) r.max_alloc_decrease = std::max(r.max_alloc_decrease, comp[i] - comp[i + 1]);
  }
  for (const auto& comp : traj.idle) {
    for (std::size_t i = 0; i + 1 < comp.size(); ++i) r.max_idle_decrease = std::max(r.max_idle_decrease, comp[i] - comp[i + 1]);
  }
  r.flow_residual = flow_balance_residual(spec, traj);
  r.complementarity = complementarity_residual(spec, traj);
  const double q0 = traj.state(0).lpNorm<1>();
  const bool t0 = traj.allocation(0).cwiseAbs().maxCoeff() == 0.0;
  r.ok = r.min_level >= -1e-9 && t0 && r.max_alloc_decrease <= 1e-12 && r.max_idle_decrease <= 1e-9 &&
         r.flow_residual <= 1e-7 * (1.0 + q0) && r.complementarity <= 1e-6 * std::max(traj.end_time(), 1e-300);
  return r;
}

}  // namespace fluidnet
