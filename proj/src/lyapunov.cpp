#include "fluidnet/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fluidnet/error.hpp"
#include "fluidnet/kernels.hpp"
#include "fluidnet/lp.hpp"
#include "fluidnet/parallel.hpp"

namespace fluidnet {

namespace {
bool ends_at_zero(const Trajectory& traj) {
  if (traj.empty()) return true;
  return traj.state(traj.size() - 1).lpNorm<1>() <= 1e-15;
}
}  // namespace

FluidIntegral total_fluid(const Trajectory& traj) {
  FluidIntegral out;
  if (traj.size() >= 2) {
    const std::vector<double> norms = traj.l1_norms();
    out.value = kernels::trapezoid(traj.time, norms);
  }
  out.truncated = !(traj.drained || ends_at_zero(traj));
  return out;
}

FluidIntegral v_functional(const Trajectory& traj, double t) {
  FluidIntegral out;
  out.truncated = !(traj.drained || ends_at_zero(traj));
  if (traj.size() < 2 || t >= traj.end_time()) return out;
  if (t <= traj.time.front()) return total_fluid(traj);
  std::vector<double> grid{t};
  std::vector<double> norms{traj.state_at(t).lpNorm<1>()};
  const std::vector<double> all = traj.l1_norms();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.time[i] > t) {
      grid.push_back(traj.time[i]);
      norms.push_back(all[i]);
    }
  }
  out.value = kernels::trapezoid(grid, norms);
  return out;
}

std::string to_string(VStatus s) {
  switch (s) {
    case VStatus::Exact: return "Exact";
    case VStatus::LowerBound: return "LowerBound";
    case VStatus::NotDrained: return "NotDrained";
    case VStatus::Diverged: return "Diverged";
  }
  return "LowerBound";
}

VEstimate approximate_V(const PathFamily& family, const Eigen::VectorXd& x, const SearchBudget& budget) {
  VEstimate est;
  if (family.kind() == PathFamily::Kind::Explicit) {
    const auto paths = family.generate(x);
    if (paths.empty()) throw Error(ErrorCode::InvalidArgument, "family has no path through the state");
    std::size_t best = 0;
    double best_val = -1.0;
    for (std::size_t i = 0; i < paths.size(); ++i) {
      const double v = total_fluid(paths[i]).value;
      if (v > best_val + 1e-15) {
        best_val = v;
        best = i;
      }
    }
    est.value = est.lower_bound = best_val;
    est.status = VStatus::Exact;
    est.argmax = paths[best];
    est.strategy = "path:" + std::to_string(best);
    return est;
  }
  SearchResult res = receding_horizon_search(family.sets(), x, budget, SearchObjective::TotalFluid);
  est.lower_bound = est.value = res.value;
  est.strategy = res.strategy;
  est.argmax = std::move(res.best);
  if (est.argmax.drained) {
    est.status = VStatus::LowerBound;
  } else {
    const auto norms = est.argmax.l1_norms();
    const double inf_norm = *std::min_element(norms.begin(), norms.end());
    const double x_norm = x.lpNorm<1>();
    if (x_norm > 0.0 && inf_norm >= x_norm * (1.0 - 1e-6)) {
      est.status = VStatus::Diverged;
      est.value = std::numeric_limits<double>::infinity();
    } else {
      est.status = VStatus::NotDrained;
    }
  }
  return est;
}

// ---------------------------------------------------------------------------

ComparisonFunction ComparisonFunction::linear(double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "linear comparison function needs c > 0");
  ComparisonFunction f;
  f.kind_ = Kind::Linear;
  f.c_ = c;
  return f;
}

ComparisonFunction ComparisonFunction::quadratic(double c) {
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidArgument, "quadratic comparison function needs c > 0");
  ComparisonFunction f;
  f.kind_ = Kind::Quadratic;
  f.c_ = c;
  return f;
}

ComparisonFunction ComparisonFunction::table(std::vector<double> r, std::vector<double> w) {
  if (r.size() != w.size() || r.size() < 2) throw Error(ErrorCode::InvalidArgument, "table needs >= 2 matching points");
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    if (!(r[i + 1] > r[i])) throw Error(ErrorCode::InvalidArgument, "table abscissae must increase");
  }
  ComparisonFunction f;
  f.kind_ = Kind::Table;
  f.r_ = std::move(r);
  f.w_ = std::move(w);
  return f;
}

double ComparisonFunction::operator()(double r) const {
  switch (kind_) {
    case Kind::Linear: return c_ * r;
    case Kind::Quadratic: return c_ * r * r;
    case Kind::Table: {
      const std::size_t i = locate(r_, r);
      const double slope = (w_[i + 1] - w_[i]) / (r_[i + 1] - r_[i]);
      return w_[i] + slope * (r - r_[i]);
    }
  }
  return 0.0;
}

bool ComparisonFunction::is_class_k(double r_max, int samples) const {
  if (std::abs((*this)(0.0)) > 1e-15) return false;
  double prev = 0.0;
  for (int i = 1; i <= samples; ++i) {
    const double v = (*this)(r_max * i / samples);
    if (!(v > prev) || !std::isfinite(v)) return false;
    prev = v;
  }
  return true;
}

std::string ComparisonFunction::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::Linear: os << c_ << "*r"; break;
    case Kind::Quadratic: os << c_ << "*r^2"; break;
    case Kind::Table: os << "table(" << r_.size() << " points)"; break;
  }
  return os.str();
}

ComparisonTriple comparison_functions(double L, double tau) {
  if (!(L > 0.0) || !(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "need L > 0 and tau > 0");
  return {ComparisonFunction::quadratic(1.0 / (2.0 * L)), ComparisonFunction::quadratic((1.0 + L * tau) * tau),
          ComparisonFunction::linear(1.0)};
}

SandwichReport check_sandwich(const std::vector<std::pair<Eigen::VectorXd, double>>& values,
                              const ComparisonTriple& triple) {
  SandwichReport rep;
  for (const auto& [x, V] : values) {
    const double r = x.lpNorm<1>();
    const double lo = triple.w1(r);
    const double hi = triple.w2(r);
    const double tol = 1e-9 * (1.0 + std::abs(V));
    ++rep.checked;
    if (!(lo <= V + tol && V <= hi + tol)) rep.violations.push_back({x, V, lo, hi});
  }
  return rep;
}

DecreaseReport check_decrease(const std::function<double(const Eigen::VectorXd&)>& V, const Trajectory& traj,
                              const ComparisonFunction& w3, double tol_rel, std::size_t max_points) {
  DecreaseReport rep;
  const std::size_t n = traj.size();
  if (n == 0) return rep;
  // Cumulative integral of w3(||Q||); ||Q||_1 is linear per piece, so
  // Simpson's rule is exact for linear and quadratic w3.
  const std::vector<double> norms = traj.l1_norms();
  std::vector<double> W(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double dt = traj.time[i + 1] - traj.time[i];
    const double mid = 0.5 * (norms[i] + norms[i + 1]);
    W[i + 1] = W[i] + dt / 6.0 * (w3(norms[i]) + 4.0 * w3(mid) + w3(norms[i + 1]));
  }
  std::vector<std::size_t> idx;
  if (max_points == 0 || max_points >= n) {
    for (std::size_t i = 0; i < n; ++i) idx.push_back(i);
  } else {
    const std::size_t m = std::max<std::size_t>(max_points, 2);
    for (std::size_t j = 0; j < m; ++j) idx.push_back(j * (n - 1) / (m - 1));
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  }
  std::vector<double> M(idx.size());
  for (std::size_t j = 0; j < idx.size(); ++j) M[j] = V(traj.state(idx[j])) + W[idx[j]];
  const double v0 = M[0] - W[idx[0]];
  rep.tolerance = tol_rel * (1.0 + std::abs(v0));
  std::size_t argmin = 0;
  for (std::size_t j = 1; j < idx.size(); ++j) {
    const double margin = M[j] - M[argmin];
    if (margin > rep.worst_margin) {
      rep.worst_margin = margin;
      rep.witness_s = traj.time[idx[argmin]];
      rep.witness_t = traj.time[idx[j]];
    }
    if (M[j] < M[argmin]) argmin = j;
  }
  rep.pairs = idx.size() * (idx.size() - 1) / 2;
  if (rep.pairs == 0) rep.worst_margin = 0.0;
  rep.holds = rep.worst_margin <= rep.tolerance;
  return rep;
}

// ---------------------------------------------------------------------------

std::string to_string(Certificate::Kind k) {
  switch (k) {
    case Certificate::Kind::Linear: return "linear";
    case Certificate::Kind::PiecewiseLinear: return "piecewise_linear";
    case Certificate::Kind::Quadratic: return "quadratic";
  }
  return "linear";
}

std::string to_string(Certificate::Status s) {
  switch (s) {
    case Certificate::Status::Verified: return "Verified";
    case Certificate::Status::Falsified: return "Falsified";
    case Certificate::Status::Unknown: return "Unknown";
  }
  return "Unknown";
}

namespace {

void require_small(const NetworkSpec& spec) {
  if (spec.K() > 20) throw Error(ErrorCode::DimensionTooLarge, "boundary patterns are enumerated for K <= 20");
}

/// Boundary patterns with at least one nonempty class and a nonempty sliding set.
std::vector<std::pair<ClassMask, std::vector<Eigen::VectorXd>>> face_velocities(const NetworkSpec& spec) {
  require_small(spec);
  ControlSets sets(spec);
  const ClassMask full = (ClassMask{1} << spec.K()) - 1;
  std::vector<std::pair<ClassMask, std::vector<Eigen::VectorXd>>> out;
  for (ClassMask z = 0; z < full; ++z) {
    std::vector<Eigen::VectorXd> vel;
    for (const auto& u : sets.sliding(z)) vel.push_back(u);
    if (!vel.empty()) out.emplace_back(z, std::move(vel));
  }
  return out;
}

}  // namespace

Certificate linear_certificate_search(const NetworkSpec& spec) {
  const std::size_t K = spec.K();
  std::vector<Eigen::VectorXd> velocities;
  for (const auto& [z, controls] : face_velocities(spec)) {
    for (const auto& u : controls) velocities.push_back(rhs(spec, u));
  }
  sort_unique(velocities, 1e-12);

  LinearProgram lp(K + 1);
  for (std::size_t k = 0; k < K; ++k) {
    lp.set_lower(k, 1e-6);
    lp.set_upper(k, 1.0);
  }
  lp.set_free(K);
  for (const auto& v : velocities) {
    Eigen::VectorXd row(static_cast<Eigen::Index>(K + 1));
    row << v, 1.0;
    lp.add_constraint(row, Sense::LessEqual, 0.0);
  }
  Eigen::VectorXd cost = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K + 1));
  cost(static_cast<Eigen::Index>(K)) = 1.0;
  lp.maximize(cost);
  const LpResult res = lp.solve();

  Certificate cert;
  cert.kind = Certificate::Kind::Linear;
  cert.required_epsilon = 1e-6;
  cert.samples = velocities.size();
  if (!res.optimal()) {
    cert.status = Certificate::Status::Unknown;
    return cert;
  }
  cert.h = {res.x.head(static_cast<Eigen::Index>(K))};
  cert.epsilon = res.x(static_cast<Eigen::Index>(K));
  cert.status = cert.epsilon > 1e-6 ? Certificate::Status::Verified : Certificate::Status::Unknown;
  return cert;
}

Eigen::VectorXd sample_simplex(CounterRng& rng, std::size_t K, ClassMask zeros) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(K));
  for (std::size_t k = 0; k < K; ++k) {
    if (!((zeros >> k) & 1U)) x(static_cast<Eigen::Index>(k)) = rng.exponential(1.0);
  }
  const double s = x.sum();
  if (s > 0.0) x /= s;
  return x;
}

namespace {

struct DriftSample {
  double margin = std::numeric_limits<double>::infinity();
  Eigen::VectorXd x, u;
};

/// Smallest margin -D(x)/||x||_1 over sampled states on every face, where
/// drift(x, v) is the derivative of the candidate along velocity v.
Certificate sampled_check(const NetworkSpec& spec, Certificate cert, const SamplingOptions& opts,
                          const std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>& drift,
                          const std::function<void(const Eigen::VectorXd&)>& validate_state) {
  const auto faces = face_velocities(spec);
  const CounterRng root(opts.seed);
  const std::size_t K = spec.K();
  auto per_face = parallel_map(faces.size(), [&](std::size_t f) {
    const auto& [z, controls] = faces[f];
    CounterRng rng = root.split(z);
    DriftSample worst;
    for (std::size_t s = 0; s < opts.samples_per_pattern; ++s) {
      const Eigen::VectorXd x = sample_simplex(rng, K, z);
      validate_state(x);
      for (const auto& u : controls) {
        const double m = -drift(x, rhs(spec, u)) / x.lpNorm<1>();
        if (m < worst.margin) worst = {m, x, u};
      }
    }
    return worst;
  });
  DriftSample worst;
  for (const auto& w : per_face) {
    if (w.margin < worst.margin) worst = w;
  }
  cert.seed = opts.seed;
  cert.samples = opts.samples_per_pattern * faces.size();
  cert.required_epsilon = opts.required_epsilon;
  cert.epsilon = worst.margin;
  if (worst.margin >= opts.required_epsilon) {
    cert.status = Certificate::Status::Verified;
  } else {
    cert.status = Certificate::Status::Falsified;
    cert.witness_state = worst.x;
    cert.witness_control = worst.u;
  }
  return cert;
}

}  // namespace

Certificate piecewise_linear_check(const NetworkSpec& spec, const std::vector<Eigen::VectorXd>& h_list,
                                   const SamplingOptions& opts) {
  if (h_list.empty()) throw Error(ErrorCode::InvalidCertificate, "piecewise-linear certificate needs pieces");
  Eigen::VectorXd cover = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.K()));
  for (const auto& h : h_list) {
    if (static_cast<std::size_t>(h.size()) != spec.K()) throw Error(ErrorCode::InvalidCertificate, "piece length");
    if ((h.array() < 0.0).any()) throw Error(ErrorCode::InvalidCertificate, "pieces must be nonnegative");
    cover = cover.cwiseMax(h);
  }
  if ((cover.array() <= 0.0).any()) {
    throw Error(ErrorCode::InvalidCertificate, "max of pieces vanishes on some nonzero state");
  }
  Certificate cert;
  cert.kind = Certificate::Kind::PiecewiseLinear;
  cert.h = h_list;
  auto drift = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& h : h_list) top = std::max(top, h.dot(x));
    // Upper Dini derivative of a max: the largest slope among active pieces.
    double d = -std::numeric_limits<double>::infinity();
    for (const auto& h : h_list) {
      if (h.dot(x) >= top - 1e-12 * (1.0 + std::abs(top))) d = std::max(d, h.dot(v));
    }
    return d;
  };
  return sampled_check(spec, cert, opts, drift, [](const Eigen::VectorXd&) {});
}

Certificate quadratic_check(const NetworkSpec& spec, const Eigen::MatrixXd& A, const SamplingOptions& opts) {
  const auto K = static_cast<Eigen::Index>(spec.K());
  if (A.rows() != K || A.cols() != K) throw Error(ErrorCode::InvalidCertificate, "matrix must be K x K");
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw Error(ErrorCode::InvalidCertificate, "matrix must be symmetric");
  Certificate cert;
  cert.kind = Certificate::Kind::Quadratic;
  cert.A = A;
  auto drift = [&](const Eigen::VectorXd& x, const Eigen::VectorXd& v) { return 2.0 * x.dot(A * v); };
  auto copositive = [&](const Eigen::VectorXd& x) {
    if (!(x.dot(A * x) > 0.0)) throw Error(ErrorCode::InvalidCertificate, "matrix is not strictly copositive on a sampled ray");
  };
  return sampled_check(spec, cert, opts, drift, copositive);
}

}  // namespace fluidnet
