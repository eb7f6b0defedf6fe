// Acceptance harness: one PASS/FAIL line per criterion.
//   fluidnet_acceptance [--only N]...
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "fluidnet/fluidlimit.hpp"
#include "fluidnet/gfn.hpp"
#include "fluidnet/io.hpp"
#include "fluidnet/lyapunov.hpp"
#include "fluidnet/parallel.hpp"
#include "fluidnet/polytope.hpp"
#include "fluidnet/skorokhod.hpp"
#include "fluidnet/stability.hpp"

using namespace fluidnet;
using fixtures::vec;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

Outcome lsc_values() {
  const auto fam = example_family("lsc_counterexample");
  const SearchBudget budget;
  double worst = std::abs(approximate_V(fam, vec({1, 1}), budget).value - 2.0);
  for (int n : {1, 2, 5, 10}) {
    const double a = 1.0 + 1.0 / n, b = 1.0 - 1.0 / n;
    worst = std::max(worst, std::abs(approximate_V(fam, vec({a, b}), budget).value - 0.5 * (a * a + b * b)));
  }
  return {worst <= 1e-6, "max abs error " + fmt(worst)};
}

Outcome lsc_gap() {
  const auto fam = example_family("lsc_counterexample");
  const SearchBudget budget;
  const double v0 = approximate_V(fam, vec({1, 1}), budget).value;
  std::vector<double> vn;
  for (int n : {10, 100, 1000, 10000}) vn.push_back(approximate_V(fam, vec({1.0 + 1.0 / n, 1.0 - 1.0 / n}), budget).value);
  const double gap = v0 - vn[1];
  const bool limit_one = std::abs(vn.back() - 1.0) <= 1e-6;
  return {gap >= 0.99 && limit_one && v0 == 2.0,
          "V(x0)=" + fmt(v0) + " V(x_100)=" + fmt(vn[1]) + " V(x_10000)=" + fmt(vn.back()) + " gap=" + fmt(gap)};
}

Outcome concat_counterexample() {
  const auto fam = example_family("concat_counterexample");
  std::vector<Eigen::VectorXd> starts = {vec({1, 1}), vec({0.5, 1.5}), vec({2, 0.3}), vec({0.2, 0.2}), vec({3, 1})};
  const auto rep = concatenation_closure_check(fam, starts, {0.1, 0.25, 0.5, 0.75, 0.9}, 10.0);
  return {rep.candidates > 0 && rep.members == 0,
          std::to_string(rep.candidates) + " candidates, " + std::to_string(rep.members) +
              " members, min residual " + fmt(rep.min_residual)};
}

struct FixtureData {
  std::string name;
  NetworkSpec spec;
  double L = 0.0;
  double tau = 0.0;
  PathFamily family;
};

std::vector<FixtureData> stable_fixture_data() {
  const std::vector<std::string> names = {"single queue", "tandem", "two-station", "two-class priority",
                                          "reentrant line"};
  const auto specs = fixtures::stable_fixtures();
  std::vector<FixtureData> out;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    StabilityOptions opts;
    opts.samples = 20;
    opts.horizon = 40.0;
    const Verdict v = draining_time(specs[i], opts);
    out.push_back({names[i], specs[i], lipschitz_constant(specs[i]), v.status == Verdict::Status::Stable ? v.tau : 0.0,
                   PathFamily::network(specs[i], opts.selectors, 40.0, 0.1)});
  }
  return out;
}

const SearchBudget kVBudget{40.0, 0.1, 1, 2, 42};

Outcome sandwich() {
  std::size_t states = 0, violations = 0, undrained = 0;
  std::ostringstream detail;
  for (const auto& f : stable_fixture_data()) {
    if (!(f.tau > 0.0)) return {false, f.name + " not judged stable"};
    CounterRng rng = CounterRng(42).split(f.spec.K());
    std::vector<Eigen::VectorXd> xs;
    for (int i = 0; i < 45; ++i) xs.push_back(sample_simplex(rng, f.spec.K()) * (0.1 + 2.9 * rng.uniform()));
    const auto est = parallel_map(xs.size(), [&](std::size_t i) { return approximate_V(f.family, xs[i], kVBudget); });
    std::vector<std::pair<Eigen::VectorXd, double>> values;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (!est[i].argmax.drained) ++undrained;
      values.emplace_back(xs[i], est[i].value);
    }
    const auto rep = check_sandwich(values, comparison_functions(f.L, f.tau));
    states += rep.checked;
    violations += rep.violations.size();
    detail << f.name << ": L=" << fmt(f.L) << " tau=" << fmt(f.tau) << " viol=" << rep.violations.size() << "; ";
  }
  detail << states << " states, " << violations << " violations";
  return {states >= 200 && violations == 0 && undrained == 0, detail.str()};
}

Outcome decrease() {
  double worst = -1.0;
  std::size_t paths = 0;
  bool ok = true;
  for (const auto& f : stable_fixture_data()) {
    CounterRng rng = CounterRng(7).split(f.spec.K());
    for (int i = 0; i < 4; ++i) {
      const Eigen::VectorXd x = sample_simplex(rng, f.spec.K()) * (0.5 + rng.uniform());
      const auto est = approximate_V(f.family, x, kVBudget);
      if (!est.argmax.drained) return {false, f.name + ": argmax path not drained"};
      auto V = [&](const Eigen::VectorXd& y) { return approximate_V(f.family, y, kVBudget).value; };
      const auto rep = check_decrease(V, est.argmax, ComparisonFunction::linear(1.0), 1e-4, 25);
      worst = std::max(worst, rep.worst_margin);
      ok = ok && rep.worst_margin <= 1e-3;
      ++paths;
    }
  }
  return {ok, std::to_string(paths) + " argmax paths, worst slack " + fmt(worst)};
}

Outcome gfn_axioms() {
  std::vector<NetworkSpec> specs = fixtures::stable_fixtures();
  specs.push_back(fixtures::lu_kumar());
  const std::size_t ops = 1000;
  struct Row {
    double residual = 0.0;
    double lip_excess = -1.0;
  };
  std::vector<std::shared_ptr<ControlSets>> sets;
  std::vector<PathFamily> fams;
  for (const auto& s : specs) fams.push_back(PathFamily::network(s, {ControlSelector::max_drain()}, 8.0, 0.1));
  const auto rows = parallel_map(ops, [&](std::size_t i) {
    CounterRng rng = CounterRng(42).split(i);
    const PathFamily& fam = fams[i % fams.size()];
    const NetworkSpec& spec = fam.sets()->spec();
    const Eigen::VectorXd x0 = sample_simplex(rng, spec.K()) * (0.2 + 2.0 * rng.uniform());
    SimOptions keep;
    keep.stop_on_drain = false;
    const ControlSelector sel = ControlSelector::random_vertex(rng.next_u64());
    const double T = 8.0;
    const Trajectory base = simulate(fam.sets(), x0, sel, T, 0.1, keep);
    Row row;
    Trajectory out;
    double horizon = T;
    switch (i % 3) {
      case 0: {
        const double r = 0.25 + 3.75 * rng.uniform();
        out = scale(base, r);
        horizon = T / r;
        break;
      }
      case 1: {
        const double s = T * rng.uniform();
        out = shift(base, s);
        horizon = T - s;
        break;
      }
      default: {
        const double t_star = T * rng.uniform();
        const Trajectory second = simulate(fam.sets(), base.state_at(t_star), ControlSelector::random_vertex(rng.next_u64()),
                                           T - t_star, 0.1, keep);
        out = concatenate(base, t_star, second);
        break;
      }
    }
    row.residual = membership_residual(fam, out, horizon);
    row.lip_excess = lipschitz_estimate(out) - lipschitz_constant(spec);
    return row;
  });
  double worst = 0.0, excess = -1e300;
  for (const auto& r : rows) {
    worst = std::max(worst, r.residual);
    excess = std::max(excess, r.lip_excess);
  }
  return {worst < 1e-7 && excess <= 1e-9,
          std::to_string(ops) + " operations, max residual " + fmt(worst) + ", max Lipschitz excess " + fmt(excess)};
}

Outcome lu_kumar() {
  const auto w = instability_witness(fixtures::lu_kumar(), 50.0, SearchBudget{50.0, 0.5, 1, 2, 42});
  if (!w) return {false, "no witness"};
  const auto norms = w->l1_norms();
  const double inf = *std::min_element(norms.begin(), norms.end());
  const double end = w->state_at(50.0).lpNorm<1>();
  return {inf >= 1.0 - 1e-12 && end >= 5.0 && w->end_time() >= 50.0,
          "inf ||Q|| = " + fmt(inf) + ", ||Q(50)|| = " + fmt(end)};
}

Outcome linear_certificates() {
  const auto tandem = fixtures::tandem();
  const auto cert = linear_certificate_search(tandem);
  const auto over = linear_certificate_search(fixtures::single_queue(2.0, 1.0));
  if (cert.status != Certificate::Status::Verified) return {false, "tandem certificate " + to_string(cert.status)};
  const std::vector<ControlSelector> sels = {ControlSelector::first_vertex(), ControlSelector::max_drain(),
                                             ControlSelector::min_drain()};
  const double h = 0.1;
  const auto ok = parallel_map(100, [&](std::size_t i) {
    CounterRng rng = CounterRng(42).split(i);
    const Eigen::VectorXd x0 = sample_simplex(rng, 2) * (0.1 + 3.0 * rng.uniform());
    const ControlSelector sel = i % 4 == 3 ? ControlSelector::random_vertex(i) : sels[i % 3];
    const Trajectory t = simulate(tandem, x0, sel, 100.0, h);
    return static_cast<int>(t.drained && t.drain_time <= cert.h[0].dot(x0) / cert.epsilon + 2 * h);
  });
  const int good = std::accumulate(ok.begin(), ok.end(), 0);
  return {over.status == Certificate::Status::Unknown && good == 100,
          "tandem " + to_string(cert.status) + " eps=" + fmt(cert.epsilon) + ", overloaded " + to_string(over.status) +
              ", " + std::to_string(good) + "/100 runs within bound"};
}

/// Independent oracle: R is an S-matrix iff max t over {Rx >= t e, x >= 0,
/// sum x = 1} is positive; the max is taken over enumerated vertices.
bool s_matrix_by_vertices(const Eigen::MatrixXd& R) {
  const auto n = R.rows();
  HalfspaceSystem sys(n + 1);
  const double M = 10.0 * (1.0 + R.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n + 1);
    row.head(n) = -R.row(i);
    row(n) = 1.0;
    sys.add_le(row, 0.0);
    Eigen::RowVectorXd nonneg = Eigen::RowVectorXd::Zero(n + 1);
    nonneg(i) = 1.0;
    sys.add_ge(nonneg, 0.0);
  }
  Eigen::RowVectorXd tb = Eigen::RowVectorXd::Zero(n + 1);
  tb(n) = 1.0;
  sys.add_ge(tb, -M);
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(n + 1);
  sum.head(n).setOnes();
  sys.add_eq(sum, 1.0);
  double best = -M;
  for (const auto& v : enumerate_vertices(sys)) best = std::max(best, v(n));
  return best > 1e-10;
}

bool completely_s_by_brute_force(const Eigen::MatrixXd& R) {
  const auto n = static_cast<int>(R.rows());
  for (int mask = 1; mask < (1 << n); ++mask) {
    std::vector<Eigen::Index> idx;
    for (int i = 0; i < n; ++i) {
      if (mask & (1 << i)) idx.push_back(i);
    }
    Eigen::MatrixXd sub(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = R(idx[a], idx[b]);
    }
    if (!s_matrix_by_vertices(sub)) return false;
  }
  return true;
}

Outcome completely_s() {
  std::size_t agree = 0, positives = 0;
  const std::size_t total = 500;
  for (std::size_t i = 0; i < total; ++i) {
    CounterRng rng = CounterRng(42).split(i);
    const Eigen::Index n = i % 2 == 0 ? 3 : 4;
    Eigen::MatrixXd R(n, n);
    for (Eigen::Index a = 0; a < n; ++a) {
      for (Eigen::Index b = 0; b < n; ++b) R(a, b) = a == b ? -0.3 + 2.0 * rng.uniform() : -1.0 + 2.0 * rng.uniform();
    }
    const bool fast = is_completely_s(R);
    positives += fast ? 1 : 0;
    agree += fast == completely_s_by_brute_force(R) ? 1 : 0;
  }
  return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " agree (" + std::to_string(positives) +
                              " completely-S)"};
}

Outcome lsp() {
  const double T = 3.0;
  double worst_ratio_err = 0.0;
  const LspInstance one{vec({-1}), fixtures::mat({{1}}), vec({1}), 0.0};
  const LspInstance two{vec({-1, -2}), Eigen::MatrixXd::Identity(2, 2), vec({1, 1}), 0.0};
  auto closed_error = [&](double h) {
    double e = 0.0;
    const auto s1 = solve_lsp(one, T, h);
    const auto s2 = solve_lsp(two, T, h);
    for (int i = 0; i <= 3000; ++i) {
      const double t = T * i / 3000.0;
      e = std::max(e, std::abs(s1.Z_at(t)(0) - std::max(0.0, 1 - t)));
      e = std::max(e, std::abs(s1.Y_at(t)(0) - std::max(0.0, t - 1)));
      e = std::max(e, std::abs(s2.Z_at(t)(0) - std::max(0.0, 1 - t)));
      e = std::max(e, std::abs(s2.Z_at(t)(1) - std::max(0.0, 1 - 2 * t)));
      e = std::max(e, std::abs(s2.Y_at(t)(0) - std::max(0.0, t - 1)));
      e = std::max(e, std::abs(s2.Y_at(t)(1) - std::max(0.0, 2 * t - 1)));
    }
    return e;
  };
  bool closed_ok = true;
  for (double h : {0.1, 0.03, 0.01}) {
    const double e = closed_error(h);
    worst_ratio_err = std::max(worst_ratio_err, e / h);
    closed_ok = closed_ok && e <= 2 * h;
  }
  const std::vector<LspInstance> fixtures_lsp = {
      one, two, {vec({-1.0, 0.5}), fixtures::mat({{1, -0.5}, {-0.4, 1}}), vec({0.5, 0.0}), 0.0},
      {vec({-0.7, -0.3}), fixtures::mat({{1, 0.3}, {0.2, 1}}), vec({0.37, 0.11}), 0.0}};
  double coarse = 0.0, fine = 0.0;
  for (const auto& inst : fixtures_lsp) {
    coarse += lsp_complementarity(solve_lsp(inst, 5.0, 0.1));
    fine += lsp_complementarity(solve_lsp(inst, 5.0, 0.05));
  }
  const double ratio = fine / coarse;
  const bool ratio_ok = ratio >= 0.3 && ratio <= 0.7;
  return {closed_ok && ratio_ok, "closed-form sup error <= " + fmt(worst_ratio_err) + " h; complementarity " +
                                     fmt(coarse) + " (h=0.1) -> " + fmt(fine) + " (h=0.05), ratio " + fmt(ratio)};
}

Outcome fluid_limit() {
  const auto det = make_queueing_spec(fixtures::single_queue(0.0), {Law::None}, {Law::Deterministic});
  const std::vector<double> rs = {10, 100, 1000};
  std::vector<std::uint64_t> seeds(10);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = CounterRng(42).split(i).next_u64();
  const auto rows1 = fluid_limit_compare(det, vec({1}), rs, 2.0, {seeds[0]});
  bool ok1 = true;
  std::ostringstream detail;
  detail << "deterministic max dist:";
  for (const auto& row : rows1) {
    ok1 = ok1 && row.max_dist <= 1.5 / row.r;
    detail << " " << fmt(row.max_dist);
  }
  const auto prio = make_queueing_spec(fixtures::priority_two_class(), {Law::Exponential, Law::None},
                                       {Law::Exponential, Law::Exponential});
  const auto rows2 = fluid_limit_compare(prio, vec({1, 0}), rs, 5.0, seeds);
  std::vector<double> mean(rs.size(), 0.0);
  for (const auto& row : rows2) {
    for (std::size_t j = 0; j < rs.size(); ++j) {
      if (row.r == rs[j]) mean[j] += row.mean_dist / static_cast<double>(seeds.size());
    }
  }
  const bool ok2 = mean[0] >= mean[1] && mean[1] >= mean[2];
  detail << "; priority mean dist: " << fmt(mean[0]) << " " << fmt(mean[1]) << " " << fmt(mean[2]);
  return {ok1 && ok2, detail.str()};
}

Outcome determinism(const fs::path& cli, const fs::path& data) {
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"simulate", "lu_kumar.json"},       {"stability", "lu_kumar.json"},  {"stability", "tandem.json"},
      {"lyapunov", "tandem.json"},         {"skorokhod", "skorokhod_2d.json"}, {"fluidlimit", "priority_two_class.json"},
      {"gfn-check", "two_station.json"}};
  const fs::path root = fs::temp_directory_path() / "fluidnet_acceptance_determinism";
  fs::remove_all(root);
  std::size_t same = 0;
  std::string failed;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::string outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      const fs::path out = root / (std::to_string(i) + "_" + std::to_string(rep));
      const std::string cmd = "\"" + cli.string() + "\" --command " + runs[i].first + " --input \"" +
                              (data / runs[i].second).string() + "\" --out \"" + out.string() +
                              "\" --seed 42 --samples 8 2>/dev/null";
      const int rc = std::system(cmd.c_str());
      (void)rc;
      std::vector<fs::path> files;
      if (fs::exists(out)) {
        for (const auto& e : fs::directory_iterator(out)) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) outputs[rep] += f.filename().string() + "\n" + read_file(f);
    }
    if (!outputs[0].empty() && outputs[0] == outputs[1]) {
      ++same;
    } else {
      failed += " " + runs[i].first + ":" + runs[i].second;
    }
  }
  return {same == runs.size(), std::to_string(same) + "/" + std::to_string(runs.size()) +
                                   " commands byte-identical" + (failed.empty() ? "" : " (differs:" + failed + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> only;
  for (int i = 1; i + 1 < argc; i += 2) {
    if (std::string(argv[i]) == "--only") only.push_back(std::atoi(argv[i + 1]));
  }
  const fs::path cli = FLUIDNET_CLI_PATH;
  const fs::path data = FLUIDNET_DATA_DIR;
  const std::vector<Criterion> criteria = {
      {1, "lsc counterexample values", 1, lsc_values},
      {2, "lower-semicontinuity gap", 1, lsc_gap},
      {3, "concatenation counterexample", 5, concat_counterexample},
      {4, "comparison-function sandwich", 120, sandwich},
      {5, "Lyapunov decrease along argmax paths", 120, decrease},
      {6, "GFN axiom property suite", 60, gfn_axioms},
      {7, "Lu-Kumar instability witness", 10, lu_kumar},
      {8, "linear certificate LP", 30, linear_certificates},
      {9, "completely-S checker", 30, completely_s},
      {10, "LSP solver", 30, lsp},
      {11, "fluid-limit convergence", 300, fluid_limit},
      {12, "CLI determinism", 60, [&] { return determinism(cli, data); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_seconds;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " " << c.id << " " << c.title << ": " << o.detail << " [" << fmt(secs)
              << " s, limit " << fmt(c.budget_seconds) << " s" << (in_time ? "" : ", over time") << "]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
