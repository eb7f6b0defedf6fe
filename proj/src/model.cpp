#include "fluidnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fluidnet/error.hpp"

namespace fluidnet {

namespace {

// Strongly connected components of the support graph (edge i -> j when A_ij > 0).
std::vector<std::vector<Eigen::Index>> components(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0);
  std::vector<char> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> stack;
  std::vector<std::vector<Eigen::Index>> out;
  int counter = 0;
  auto visit = [&](auto&& self, Eigen::Index v) -> void {
    const auto sv = static_cast<std::size_t>(v);
    index[sv] = low[sv] = counter++;
    stack.push_back(v);
    on_stack[sv] = 1;
    for (Eigen::Index w = 0; w < n; ++w) {
      if (!(A(v, w) > 0.0)) continue;
      const auto sw = static_cast<std::size_t>(w);
      if (index[sw] < 0) {
        self(self, w);
        low[sv] = std::min(low[sv], low[sw]);
      } else if (on_stack[sw]) {
        low[sv] = std::min(low[sv], index[sw]);
      }
    }
    if (low[sv] == index[sv]) {
      std::vector<Eigen::Index> comp;
      Eigen::Index w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[static_cast<std::size_t>(w)] = 0;
        comp.push_back(w);
      } while (w != v);
      out.push_back(std::move(comp));
    }
  };
  for (Eigen::Index v = 0; v < n; ++v) {
    if (index[static_cast<std::size_t>(v)] < 0) visit(visit, v);
  }
  return out;
}

// Power iteration on an irreducible block. Shifting by I makes the iteration
// aperiodic without moving eigenvectors; rho(B + I) = rho(B) + 1.
SpectralRadius irreducible_radius(const Eigen::MatrixXd& B) {
  const Eigen::Index n = B.rows();
  SpectralRadius out;
  const Eigen::MatrixXd S = B + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= 10000; ++it) {
    Eigen::VectorXd y = S * x;
    const Eigen::ArrayXd ratio = y.array() / x.array();
    lo = std::max(lo, ratio.minCoeff());
    hi = std::min(hi, ratio.maxCoeff());
    out.iterations = it;
    if (hi - lo <= 1e-12 * hi) {
      out.value = 0.5 * (lo + hi) - 1.0;
      out.converged = true;
      return out;
    }
    x = (y / y.maxCoeff()).cwiseMax(1e-300);
  }
  out.value = std::min(hi - 1.0, B.rowwise().sum().maxCoeff());
  return out;
}

}  // namespace

SpectralRadius spectral_radius(const Eigen::MatrixXd& A) {
  SpectralRadius out;
  out.converged = true;
  // rho is the max over diagonal blocks of the Frobenius normal form. Each
  // block is irreducible, so the Collatz-Wielandt bounds converge geometrically.
  for (const auto& comp : components(A)) {
    const auto m = static_cast<Eigen::Index>(comp.size());
    if (m == 1) {
      out.value = std::max(out.value, A(comp[0], comp[0]));
      continue;
    }
    Eigen::MatrixXd B(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) B(i, j) = A(comp[static_cast<std::size_t>(i)], comp[static_cast<std::size_t>(j)]);
    }
    const SpectralRadius r = irreducible_radius(B);
    out.value = std::max(out.value, r.value);
    out.iterations += r.iterations;
    out.converged = out.converged && r.converged;
  }
  return out;
}

RawNetworkSpec NetworkSpec::raw() const {
  RawNetworkSpec r;
  r.alpha = alpha_;
  r.mu = mu_;
  r.P = P_;
  r.C = C_;
  r.discipline = discipline_;
  r.priority_order = order_;
  return r;
}

NetworkSpec validate(const RawNetworkSpec& raw) {
  const Eigen::Index K = raw.alpha.size();
  if (K == 0) throw Error(ErrorCode::DimensionMismatch, "network has no classes");
  if (raw.mu.size() != K || raw.P.rows() != K || raw.P.cols() != K || raw.C.cols() != K) {
    throw Error(ErrorCode::DimensionMismatch, "alpha, mu, routing and constituency disagree on K");
  }
  const Eigen::Index J = raw.C.rows();
  if (J == 0) throw Error(ErrorCode::ConstituencyNotPartition, "no stations");
  if (!raw.alpha.allFinite() || !raw.mu.allFinite() || !raw.P.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "non-finite network data");
  }
  for (Eigen::Index k = 0; k < K; ++k) {
    if (raw.alpha(k) < 0.0) throw Error(ErrorCode::NegativeRate, "alpha_" + std::to_string(k + 1) + " < 0");
    if (!(raw.mu(k) > 0.0)) throw Error(ErrorCode::NegativeRate, "mu_" + std::to_string(k + 1) + " <= 0");
  }

  NetworkSpec s;
  s.station_of_.assign(static_cast<std::size_t>(K), 0);
  s.classes_at_.assign(static_cast<std::size_t>(J), {});
  for (Eigen::Index k = 0; k < K; ++k) {
    int ones = 0;
    for (Eigen::Index j = 0; j < J; ++j) {
      const double c = raw.C(j, k);
      if (c == 1.0) {
        ++ones;
        s.station_of_[k] = static_cast<std::size_t>(j);
      } else if (c != 0.0) {
        throw Error(ErrorCode::ConstituencyNotPartition, "constituency entries must be 0 or 1");
      }
    }
    if (ones != 1) {
      throw Error(ErrorCode::ConstituencyNotPartition,
                  "class " + std::to_string(k + 1) + " is served at " + std::to_string(ones) + " stations");
    }
    s.classes_at_[s.station_of_[k]].push_back(static_cast<std::size_t>(k));
  }
  for (Eigen::Index j = 0; j < J; ++j) {
    if (s.classes_at_[j].empty()) {
      throw Error(ErrorCode::ConstituencyNotPartition, "station " + std::to_string(j + 1) + " serves no class");
    }
  }

  if ((raw.P.array() < 0.0).any()) throw Error(ErrorCode::InvalidRouting, "negative routing entry");
  for (Eigen::Index k = 0; k < K; ++k) {
    if (raw.P.row(k).sum() > 1.0 + 1e-12) {
      throw Error(ErrorCode::InvalidRouting, "routing row " + std::to_string(k + 1) + " sums above 1");
    }
  }
  const SpectralRadius rho = spectral_radius(raw.P);
  if (rho.value >= 1.0 - 1e-10) {
    throw Error(ErrorCode::SpectralRadiusTooLarge, "routing spectral radius " + std::to_string(rho.value));
  }

  s.rank_.assign(static_cast<std::size_t>(K), 0);
  if (raw.discipline == Discipline::Priority) {
    std::vector<bool> seen(static_cast<std::size_t>(K), false);
    if (raw.priority_order.size() != static_cast<std::size_t>(K)) {
      throw Error(ErrorCode::BadPermutation, "priority order must list every class once");
    }
    for (std::size_t pos = 0; pos < raw.priority_order.size(); ++pos) {
      const int k = raw.priority_order[pos];
      if (k < 0 || k >= K || seen[k]) throw Error(ErrorCode::BadPermutation, "priority order is not a permutation");
      seen[k] = true;
      s.rank_[k] = pos;
    }
    s.order_ = raw.priority_order;
  }

  s.pi_sets_.assign(static_cast<std::size_t>(K), {});
  for (std::size_t k = 0; k < static_cast<std::size_t>(K); ++k) {
    for (std::size_t l : s.classes_at_[s.station_of_[k]]) {
      if (s.rank_[l] <= s.rank_[k]) s.pi_sets_[k].push_back(l);
    }
  }

  s.alpha_ = raw.alpha;
  s.mu_ = raw.mu;
  s.P_ = raw.P;
  s.C_ = raw.C;
  s.discipline_ = raw.discipline;
  s.rho_ = rho.value;
  s.B_ = (Eigen::MatrixXd::Identity(K, K) - raw.P.transpose()) * raw.mu.asDiagonal();
  return s;
}

bool ControlPolytope::contains(const Eigen::Ref<const Eigen::VectorXd>& u, double tol) const {
  return in_convex_hull(vertices, u, tol);
}

std::vector<bool> empty_stations_of(const NetworkSpec& spec, const std::vector<bool>& empty_classes) {
  std::vector<bool> out(spec.J(), true);
  for (std::size_t k = 0; k < spec.K(); ++k) {
    if (!empty_classes.at(k)) out[spec.station_of(k)] = false;
  }
  return out;
}

namespace {

void check_mask(std::size_t got, std::size_t want, const char* what) {
  if (got != want) throw Error(ErrorCode::InvalidStation, std::string(what) + " mask has wrong length");
}

HalfspaceSystem work_conserving_system(const NetworkSpec& spec, const std::vector<bool>& empty_stations) {
  const auto K = static_cast<Eigen::Index>(spec.K());
  HalfspaceSystem sys(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(K);
    e(k) = 1.0;
    sys.add_ge(e, 0.0);
  }
  for (std::size_t j = 0; j < spec.J(); ++j) {
    const Eigen::RowVectorXd c = spec.C().row(static_cast<Eigen::Index>(j));
    if (empty_stations[j]) {
      sys.add_le(c, 1.0);
    } else {
      sys.add_eq(c, 1.0);
    }
  }
  return sys;
}

HalfspaceSystem priority_system(const NetworkSpec& spec, const std::vector<bool>& empty_classes) {
  const auto K = static_cast<Eigen::Index>(spec.K());
  HalfspaceSystem sys(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(K);
    e(k) = 1.0;
    sys.add_ge(e, 0.0);
  }
  for (std::size_t k = 0; k < spec.K(); ++k) {
    Eigen::RowVectorXd a = Eigen::RowVectorXd::Zero(K);
    for (std::size_t l : spec.higher_or_equal(k)) a(static_cast<Eigen::Index>(l)) = 1.0;
    if (empty_classes[k]) {
      sys.add_le(a, 1.0);
    } else {
      sys.add_eq(a, 1.0);
    }
  }
  return sys;
}

}  // namespace

HalfspaceSystem control_constraints(const NetworkSpec& spec, const std::vector<bool>& empty_classes) {
  check_mask(empty_classes.size(), spec.K(), "class");
  if (spec.discipline() == Discipline::WorkConserving) {
    return work_conserving_system(spec, empty_stations_of(spec, empty_classes));
  }
  return priority_system(spec, empty_classes);
}

ControlPolytope work_conserving_polytope(const NetworkSpec& spec, const std::vector<bool>& empty_stations) {
  if (spec.discipline() != Discipline::WorkConserving) {
    throw Error(ErrorCode::InvalidArgument, "work-conserving polytope requested for a priority network");
  }
  check_mask(empty_stations.size(), spec.J(), "station");
  ControlPolytope poly;
  poly.dim = spec.K();
  poly.active_set = empty_stations;
  poly.vertices = enumerate_vertices(work_conserving_system(spec, empty_stations));
  return poly;
}

ControlPolytope priority_polytope(const NetworkSpec& spec, const std::vector<bool>& empty_classes) {
  if (spec.discipline() != Discipline::Priority) {
    throw Error(ErrorCode::InvalidArgument, "priority polytope requested for a work-conserving network");
  }
  check_mask(empty_classes.size(), spec.K(), "class");
  ControlPolytope poly;
  poly.dim = spec.K();
  poly.active_set = empty_classes;
  poly.vertices = enumerate_vertices(priority_system(spec, empty_classes));
  if (poly.vertices.empty()) {
    throw Error(ErrorCode::InfeasibleActiveSet, "priority equalities have no nonnegative solution");
  }
  return poly;
}

ControlPolytope control_polytope(const NetworkSpec& spec, const std::vector<bool>& empty_classes) {
  check_mask(empty_classes.size(), spec.K(), "class");
  if (spec.discipline() == Discipline::WorkConserving) {
    return work_conserving_polytope(spec, empty_stations_of(spec, empty_classes));
  }
  return priority_polytope(spec, empty_classes);
}

}  // namespace fluidnet
