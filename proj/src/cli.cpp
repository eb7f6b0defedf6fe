#include "fluidnet/cli.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "fluidnet/error.hpp"
#include "fluidnet/fluidlimit.hpp"
#include "fluidnet/gfn.hpp"
#include "fluidnet/io.hpp"
#include "fluidnet/kernels.hpp"
#include "fluidnet/lyapunov.hpp"
#include "fluidnet/parallel.hpp"
#include "fluidnet/skorokhod.hpp"
#include "fluidnet/stability.hpp"

namespace fluidnet {

namespace {

using Json = nlohmann::ordered_json;

Json num(double x) {
  if (std::isfinite(x)) return x;
  if (std::isnan(x)) return "nan";
  return x > 0 ? "inf" : "-inf";
}

Json vec(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json mat(const Eigen::MatrixXd& m) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec(m.row(i).transpose()));
  return a;
}

struct Context {
  RunConfig cfg;
  SpecFile spec;
  Json params = Json::object();
  Json report = Json::object();
  std::vector<std::pair<std::string, std::string>> files;  // name, content
  int exit = kExitOk;

  const NetworkSpec& network() const {
    if (!spec.network) throw Error(ErrorCode::InvalidArgument, "command '" + cfg.command + "' needs a network");
    return *spec.network;
  }
  double step(double def) {
    const double h = cfg.step.value_or(def);
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "--step must be positive");
    params["step"] = h;
    return h;
  }
  double horizon(double def) {
    const double T = cfg.horizon.value_or(def);
    if (!(T > 0.0)) throw Error(ErrorCode::InvalidArgument, "--horizon must be positive");
    params["horizon"] = T;
    return T;
  }
  std::size_t samples(std::size_t def) {
    const std::size_t n = cfg.samples.value_or(def);
    params["samples"] = n;
    return n;
  }
  SearchBudget budget(const SearchBudget& def) {
    SearchBudget b = def;
    b.depth = cfg.depth.value_or(def.depth);
    b.multistarts = cfg.multistarts.value_or(def.multistarts);
    if (b.depth < 0 || b.multistarts < 0) throw Error(ErrorCode::InvalidArgument, "--depth/--multistarts must be >= 0");
    b.seed = cfg.seed;
    params["depth"] = b.depth;
    params["multistarts"] = b.multistarts;
    return b;
  }
  Eigen::VectorXd initial_state() const {
    const auto K = static_cast<Eigen::Index>(network().K());
    if (spec.initial_state) return *spec.initial_state;
    return Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
  }
};

Json invariants_json(const InvariantReport& r) {
  Json j = Json::object();
  j["ok"] = r.ok;
  j["min_level"] = num(r.min_level);
  j["flow_residual"] = num(r.flow_residual);
  j["complementarity_residual"] = num(r.complementarity);
  j["max_alloc_decrease"] = num(r.max_alloc_decrease);
  j["max_idle_decrease"] = num(r.max_idle_decrease);
  return j;
}

Json certificate_json(const Certificate& c) {
  Json j = Json::object();
  j["kind"] = to_string(c.kind);
  j["status"] = to_string(c.status);
  j["epsilon"] = num(c.epsilon);
  j["required_epsilon"] = num(c.required_epsilon);
  if (c.kind == Certificate::Kind::Quadratic) {
    j["A"] = mat(c.A);
  } else {
    Json h = Json::array();
    for (const auto& v : c.h) h.push_back(vec(v));
    j["h"] = h;
  }
  if (c.witness_state.size() > 0) {
    j["witness_state"] = vec(c.witness_state);
    j["witness_control"] = vec(c.witness_control);
  }
  j["seed"] = c.seed;
  j["samples"] = c.samples;
  return j;
}

Json trajectory_summary(const Trajectory& t) {
  Json j = Json::object();
  j["stamps"] = t.size();
  j["end_time"] = t.size() ? num(t.time.back()) : Json(0.0);
  j["drained"] = t.drained;
  j["drain_time"] = t.drained ? num(t.drain_time) : Json(nullptr);
  if (t.size()) {
    j["end_state"] = vec(t.state(t.size() - 1));
    const auto norms = t.l1_norms();
    j["min_norm"] = num(*std::min_element(norms.begin(), norms.end()));
  }
  return j;
}

void cmd_simulate(Context& c) {
  const NetworkSpec& spec = c.network();
  const Eigen::VectorXd x0 = c.initial_state();
  const double h = c.step(0.01);
  const double T = c.horizon(20.0);
  const ControlSelector sel = ControlSelector::parse(c.cfg.selector.value_or("max_drain"));
  c.params["selector"] = sel.name();
  c.params["initial_state"] = vec(x0);
  const Trajectory traj = simulate(spec, x0, sel, T, h);
  c.report["trajectory"] = trajectory_summary(traj);
  c.report["invariants"] = invariants_json(check_invariants(spec, traj));
  c.report["lipschitz_constant"] = num(lipschitz_constant(spec));
  c.files.emplace_back("trajectory.csv", trajectory_csv(traj));
}

void cmd_stability(Context& c) {
  const NetworkSpec& spec = c.network();
  StabilityOptions opts;
  opts.step = c.step(opts.step);
  opts.horizon = c.horizon(opts.horizon);
  opts.samples = c.samples(opts.samples);
  opts.seed = c.cfg.seed;
  opts.witness_budget = c.budget(opts.witness_budget);
  if (c.cfg.selector) opts.selectors = {ControlSelector::parse(*c.cfg.selector)};
  Json sels = Json::array();
  for (const auto& s : opts.selectors) sels.push_back(s.name());
  c.params["selectors"] = sels;

  const Verdict v = draining_time(spec, opts);
  Json j = Json::object();
  j["status"] = to_string(v.status);
  j["tau"] = num(v.tau);
  j["certified"] = v.certified;
  j["runs"] = v.runs;
  j["undrained"] = v.undrained;
  j["starts"] = v.starts.size();
  c.report["verdict"] = j;
  c.report["linear_certificate"] = certificate_json(linear_certificate_search(spec));
  if (v.witness) {
    c.report["witness"] = trajectory_summary(*v.witness);
    c.files.emplace_back("witness.csv", trajectory_csv(*v.witness));
  }
  if (v.status == Verdict::Status::Unstable) c.exit = kExitUnstable;
}

void cmd_lyapunov(Context& c) {
  const NetworkSpec& spec = c.network();
  StabilityOptions sopts;
  sopts.step = c.step(0.05);
  sopts.horizon = c.horizon(30.0);
  sopts.samples = c.samples(10);
  sopts.seed = c.cfg.seed;
  SearchBudget budget = c.budget(SearchBudget{});
  budget.horizon = sopts.horizon;
  budget.step = sopts.step;
  sopts.witness_budget = budget;

  const Verdict v = draining_time(spec, sopts);
  const double L = lipschitz_constant(spec);
  c.report["lipschitz_constant"] = num(L);
  c.report["stability_status"] = to_string(v.status);
  c.report["tau"] = num(v.tau);

  const PathFamily family = PathFamily::network(spec, sopts.selectors, sopts.horizon, sopts.step);
  std::vector<Eigen::VectorXd> states = v.starts;
  if (c.spec.initial_state) states.insert(states.begin(), *c.spec.initial_state);
  const auto estimates = parallel_map(states.size(), [&](std::size_t i) { return approximate_V(family, states[i], budget); });

  Json values = Json::array();
  std::vector<std::pair<Eigen::VectorXd, double>> pairs;
  for (std::size_t i = 0; i < states.size(); ++i) {
    Json e = Json::object();
    e["state"] = vec(states[i]);
    e["V"] = num(estimates[i].value);
    e["lower_bound"] = num(estimates[i].lower_bound);
    e["status"] = to_string(estimates[i].status);
    e["strategy"] = estimates[i].strategy;
    values.push_back(e);
    pairs.emplace_back(states[i], estimates[i].value);
  }
  c.report["values"] = values;

  if (v.status == Verdict::Status::Stable && v.tau > 0.0) {
    const ComparisonTriple triple = comparison_functions(L, v.tau);
    const SandwichReport sw = check_sandwich(pairs, triple);
    Json j = Json::object();
    j["w1"] = triple.w1.describe();
    j["w2"] = triple.w2.describe();
    j["w3"] = triple.w3.describe();
    j["checked"] = sw.checked;
    j["violations"] = sw.violations.size();
    c.report["sandwich"] = j;

    // Decrease along the argmax path of the first state, with V estimated by
    // the same search at each visited state.
    const Trajectory& path = estimates.front().argmax;
    auto V = [&](const Eigen::VectorXd& x) { return approximate_V(family, x, budget).value; };
    const DecreaseReport dr = check_decrease(V, path, triple.w3, 1e-4, 20);
    Json d = Json::object();
    d["pairs"] = dr.pairs;
    d["worst_margin"] = num(dr.worst_margin);
    d["tolerance"] = num(dr.tolerance);
    d["holds"] = dr.holds;
    c.report["decrease"] = d;
    c.files.emplace_back("argmax.csv", trajectory_csv(path));
  }

  Json certs = Json::array();
  certs.push_back(certificate_json(linear_certificate_search(spec)));
  if (c.spec.certificate) {
    SamplingOptions so;
    so.seed = c.cfg.seed;
    const auto& ci = *c.spec.certificate;
    if (ci.kind == Certificate::Kind::PiecewiseLinear) certs.push_back(certificate_json(piecewise_linear_check(spec, ci.h, so)));
    if (ci.kind == Certificate::Kind::Quadratic) certs.push_back(certificate_json(quadratic_check(spec, ci.A, so)));
  }
  c.report["certificates"] = certs;
}

void cmd_skorokhod(Context& c) {
  if (!c.spec.skorokhod) throw Error(ErrorCode::InvalidArgument, "command 'skorokhod' needs a skorokhod section");
  const LspInstance& inst = *c.spec.skorokhod;
  const double h = c.step(0.01);
  const double T = c.horizon(10.0);
  const LspSolution sol = solve_lsp(inst, T, h);
  const LipschitzReport lip = lipschitz_bound(inst, sol);
  c.report["completely_s"] = is_completely_s(inst.R);
  c.report["push_bound"] = num(sol.push_bound);
  c.report["stamps"] = sol.size();
  c.report["end_Z"] = vec(sol.Z.back());
  c.report["end_Y"] = vec(sol.Y.back());
  c.report["residual"] = num(lsp_residual(inst, sol));
  c.report["complementarity"] = num(lsp_complementarity(sol));
  c.report["min_increment"] = num(lsp_min_increment(sol));
  Json l = Json::object();
  l["bound"] = num(lip.bound);
  l["observed"] = num(lip.observed);
  l["ok"] = lip.ok;
  c.report["lipschitz"] = l;
  c.files.emplace_back("lsp.csv", lsp_solution_csv(sol));
}

void cmd_fluidlimit(Context& c) {
  const NetworkSpec& spec = c.network();
  const std::size_t K = spec.K();
  QueueingLaws laws;
  if (c.spec.queueing) {
    laws = *c.spec.queueing;
  } else {
    for (std::size_t k = 0; k < K; ++k) {
      laws.interarrival.push_back(spec.alpha()(static_cast<Eigen::Index>(k)) > 0.0 ? Law::Exponential : Law::None);
    }
    laws.service.assign(K, Law::Exponential);
  }
  const QueueingSpec qs = make_queueing_spec(spec, laws.interarrival, laws.service);
  FluidLimitInput fl = c.spec.fluidlimit.value_or(FluidLimitInput{});
  Eigen::VectorXd dir = fl.direction ? *fl.direction : c.initial_state();
  const double mass = dir.lpNorm<1>();
  if (!(mass > 0.0)) throw Error(ErrorCode::InvalidArgument, "fluid-limit direction must be nonzero");
  dir /= mass;
  if (fl.r_list.empty()) fl.r_list = {10.0, 100.0, 1000.0};
  const std::size_t n_seeds = c.samples(fl.seeds ? fl.seeds : 10);
  const double T = c.horizon(5.0);
  CompareOptions opts;
  opts.fluid_step = c.step(0.01);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < n_seeds; ++i) seeds.push_back(CounterRng(c.cfg.seed).split(i).next_u64());
  c.params["direction"] = vec(dir);
  Json rl = Json::array();
  for (double r : fl.r_list) rl.push_back(r);
  c.params["r_list"] = rl;
  Json il = Json::array(), sl = Json::array();
  for (Law l : laws.interarrival) il.push_back(to_string(l));
  for (Law l : laws.service) sl.push_back(to_string(l));
  c.params["interarrival"] = il;
  c.params["service"] = sl;

  const auto rows = fluid_limit_compare(qs, dir, fl.r_list, T, seeds, opts);
  Json table = Json::array();
  for (double r : fl.r_list) {
    double mean = 0.0, worst = 0.0;
    std::size_t n = 0;
    for (const auto& row : rows) {
      if (row.r != r) continue;
      mean += row.mean_dist;
      worst = std::max(worst, row.max_dist);
      ++n;
    }
    Json e = Json::object();
    e["r"] = r;
    e["mean_of_mean_dist"] = num(n ? mean / static_cast<double>(n) : 0.0);
    e["max_of_max_dist"] = num(worst);
    table.push_back(e);
  }
  c.report["by_scale"] = table;
  c.files.emplace_back("distance.csv", distance_csv(rows));

  const double r0 = fl.r_list.front();
  std::vector<long long> q0(K);
  for (std::size_t k = 0; k < K; ++k) q0[k] = std::llround(r0 * dir(static_cast<Eigen::Index>(k)));
  const SamplePath path = simulate_queueing(qs, fresh_state(qs, q0, seeds.front()), r0 * T, seeds.front());
  c.files.emplace_back("sample_path.csv", sample_path_csv(path));
}

void cmd_gfn_check(Context& c) {
  const NetworkSpec& spec = c.network();
  const double h = c.step(0.05);
  const double T = c.horizon(10.0);
  const std::size_t n = c.samples(20);
  const double L = lipschitz_constant(spec);
  const std::vector<ControlSelector> sels = {ControlSelector::first_vertex(), ControlSelector::max_drain(),
                                             ControlSelector::min_drain()};
  const PathFamily family = PathFamily::network(spec, sels, T, h);
  CounterRng rng = CounterRng(c.cfg.seed).split(0x47464E);
  std::vector<Eigen::VectorXd> starts;
  for (std::size_t i = 0; i < n; ++i) starts.push_back(sample_simplex(rng, spec.K()));

  struct Row {
    double scale = 0.0, shift = 0.0, lip = 0.0;
  };
  const auto rows = parallel_map(n, [&](std::size_t i) {
    Row row;
    CounterRng local = CounterRng(c.cfg.seed).split(i + 1);
    const ControlSelector sel = sels[i % sels.size()];
    const Trajectory base = simulate(family.sets(), starts[i], sel, T, h, SimOptions{false});
    const double r = 0.5 + 1.5 * local.uniform();
    const double s = T * 0.5 * local.uniform();
    row.scale = membership_residual(family, scale(base, r), std::min(T, T / r));
    row.shift = membership_residual(family, shift(base, s), T - s);
    row.lip = lipschitz_estimate(base);
    return row;
  });
  double worst_scale = 0.0, worst_shift = 0.0, worst_lip = 0.0;
  for (const auto& r : rows) {
    worst_scale = std::max(worst_scale, r.scale);
    worst_shift = std::max(worst_shift, r.shift);
    worst_lip = std::max(worst_lip, r.lip);
  }
  std::vector<double> cuts = {0.25, 0.5};
  const std::vector<Eigen::VectorXd> few(starts.begin(), starts.begin() + static_cast<std::ptrdiff_t>(std::min<std::size_t>(n, 4)));
  const ConcatenationReport cr = concatenation_closure_check(family, few, cuts, T);
  c.report["lipschitz_constant"] = num(L);
  c.report["max_lipschitz_estimate"] = num(worst_lip);
  c.report["max_scale_residual"] = num(worst_scale);
  c.report["max_shift_residual"] = num(worst_shift);
  Json j = Json::object();
  j["candidates"] = cr.candidates;
  j["members"] = cr.members;
  j["min_residual"] = num(cr.min_residual);
  c.report["concatenation"] = j;
}

}  // namespace

int run(const RunConfig& config, std::ostream& log, std::ostream& err) {
  try {
    Context c;
    c.cfg = config;
    const auto& names = cli_commands();
    if (std::find(names.begin(), names.end(), config.command) == names.end()) {
      throw Error(ErrorCode::InvalidArgument, "unknown command '" + config.command + "'");
    }
    c.spec = load_spec(config.input);
    c.params["command"] = config.command;
    c.params["input"] = config.input.filename().string();
    c.params["seed"] = config.seed;

    if (config.command == "simulate") cmd_simulate(c);
    if (config.command == "stability") cmd_stability(c);
    if (config.command == "lyapunov") cmd_lyapunov(c);
    if (config.command == "skorokhod") cmd_skorokhod(c);
    if (config.command == "fluidlimit") cmd_fluidlimit(c);
    if (config.command == "gfn-check") cmd_gfn_check(c);

    log << "fluidnet: resolved parameters " << c.params.dump() << '\n';
    Json doc = Json::object();
    doc["parameters"] = c.params;
    doc["result"] = c.report;
    std::filesystem::create_directories(config.out);
    for (const auto& [name, content] : c.files) write_file_atomic(config.out / name, content);
    write_file_atomic(config.out / "report.json", doc.dump(2) + "\n");
    return c.exit;
  } catch (const std::exception& e) {
    err << "fluidnet: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace fluidnet
