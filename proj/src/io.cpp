#include "fluidnet/io.hpp"

#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "json.hpp"

#include "fluidnet/error.hpp"

namespace fluidnet {

namespace {

using nlohmann::json;

struct Location {
  std::size_t line = 1;
  std::size_t column = 1;
};

Location location_of(const std::string& text, std::size_t offset) {
  Location loc;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++loc.line;
      loc.column = 1;
    } else {
      ++loc.column;
    }
  }
  return loc;
}

/// The DOM keeps no positions, so schema errors point at the first
/// occurrence of the offending key along its path.
class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      const auto found = text_.find('"' + key + '"', pos);
      if (found == std::string::npos) break;
      pos = found;
    }
    const Location loc = location_of(text_, pos);
    std::string where;
    for (const auto& key : path) where += (where.empty() ? "" : ".") + key;
    throw Error(ErrorCode::ParseError, std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": " +
                                           (where.empty() ? "" : where + ": ") + msg);
  }

  void check_keys(const json& obj, const std::vector<std::string>& path, const std::set<std::string>& allowed) const {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (!allowed.count(it.key())) {
        auto p = path;
        p.push_back(it.key());
        fail(p, "unknown key");
      }
    }
  }

  double number(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  std::size_t count(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(path, "expected a nonnegative integer");
    return v.get<std::size_t>();
  }

  Eigen::VectorXd vector(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = number(v[i], path);
    return out;
  }

  /// Nested rows, or a flat row-major list when the shape is known.
  Eigen::MatrixXd matrix(const json& v, const std::vector<std::string>& path, std::optional<std::size_t> rows,
                         std::optional<std::size_t> cols) const {
    if (!v.is_array()) fail(path, "expected a matrix");
    if (!v.empty() && v[0].is_array()) {
      const std::size_t r = v.size();
      const std::size_t c = v[0].size();
      Eigen::MatrixXd out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      for (std::size_t i = 0; i < r; ++i) {
        if (!v[i].is_array() || v[i].size() != c) fail(path, "rows must have equal length");
        for (std::size_t j = 0; j < c; ++j) {
          out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i][j], path);
        }
      }
      return out;
    }
    if (!rows || !cols) fail(path, "a flat matrix needs a known shape");
    if (v.size() != *rows * *cols) fail(path, "flat matrix has the wrong number of entries");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(*rows), static_cast<Eigen::Index>(*cols));
    for (std::size_t i = 0; i < *rows; ++i) {
      for (std::size_t j = 0; j < *cols; ++j) {
        out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = number(v[i * *cols + j], path);
      }
    }
    return out;
  }

  std::vector<Law> laws(const json& v, const std::vector<std::string>& path) const {
    if (!v.is_array()) fail(path, "expected an array of law names");
    std::vector<Law> out;
    for (const auto& item : v) {
      if (!item.is_string()) fail(path, "law names are strings");
      try {
        out.push_back(parse_law(item.get<std::string>()));
      } catch (const Error& e) {
        fail(path, e.what());
      }
    }
    return out;
  }

 private:
  const std::string& text_;
};

}  // namespace

SpecFile parse_spec(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const Location loc = location_of(text, e.byte > 0 ? e.byte - 1 : 0);
    throw Error(ErrorCode::ParseError,
                std::to_string(loc.line) + ":" + std::to_string(loc.column) + ": malformed JSON");
  }
  const Parser p(text);
  p.check_keys(doc, {},
               {"name", "classes", "stations", "alpha", "mu", "routing", "constituency", "discipline",
                "priority_order", "initial_state", "queueing", "skorokhod", "certificate", "fluidlimit"});

  SpecFile out;
  const bool has_network = doc.contains("classes") || doc.contains("alpha") || doc.contains("mu");
  if (has_network) {
    for (const char* key : {"classes", "stations", "alpha", "mu", "routing", "constituency", "discipline"}) {
      if (!doc.contains(key)) p.fail({key}, "missing required key");
    }
    const std::size_t K = p.count(doc["classes"], {"classes"});
    const std::size_t J = p.count(doc["stations"], {"stations"});
    RawNetworkSpec raw;
    raw.alpha = p.vector(doc["alpha"], {"alpha"});
    raw.mu = p.vector(doc["mu"], {"mu"});
    raw.P = p.matrix(doc["routing"], {"routing"}, K, K);
    raw.C = p.matrix(doc["constituency"], {"constituency"}, J, K);
    if (static_cast<std::size_t>(raw.alpha.size()) != K || static_cast<std::size_t>(raw.mu.size()) != K) {
      p.fail({"alpha"}, "alpha and mu need one entry per class");
    }
    if (static_cast<std::size_t>(raw.C.rows()) != J) p.fail({"constituency"}, "need one row per station");
    if (!doc["discipline"].is_string()) p.fail({"discipline"}, "expected a string");
    const auto disc = doc["discipline"].get<std::string>();
    if (disc == "work_conserving") {
      raw.discipline = Discipline::WorkConserving;
      if (doc.contains("priority_order")) p.fail({"priority_order"}, "only valid with discipline priority");
    } else if (disc == "priority") {
      raw.discipline = Discipline::Priority;
      if (!doc.contains("priority_order")) p.fail({"priority_order"}, "required with discipline priority");
      const auto& order = doc["priority_order"];
      if (!order.is_array()) p.fail({"priority_order"}, "expected a list of classes");
      for (const auto& k : order) {
        if (!k.is_number_integer() || k.get<long long>() < 1) {
          p.fail({"priority_order"}, "classes are numbered from 1");
        }
        raw.priority_order.push_back(k.get<std::size_t>() - 1);
      }
    } else {
      p.fail({"discipline"}, "expected work_conserving or priority");
    }
    out.network = validate(raw);

    if (doc.contains("initial_state")) {
      out.initial_state = p.vector(doc["initial_state"], {"initial_state"});
      if (static_cast<std::size_t>(out.initial_state->size()) != K) {
        p.fail({"initial_state"}, "need one entry per class");
      }
      if ((out.initial_state->array() < 0.0).any()) p.fail({"initial_state"}, "levels must be nonnegative");
    }
    if (doc.contains("queueing")) {
      const auto& q = doc["queueing"];
      p.check_keys(q, {"queueing"}, {"interarrival", "service"});
      QueueingLaws laws;
      if (q.contains("interarrival")) {
        laws.interarrival = p.laws(q["interarrival"], {"queueing", "interarrival"});
      } else {
        for (std::size_t k = 0; k < K; ++k) {
          laws.interarrival.push_back(raw.alpha(static_cast<Eigen::Index>(k)) > 0.0 ? Law::Exponential : Law::None);
        }
      }
      laws.service = q.contains("service") ? p.laws(q["service"], {"queueing", "service"})
                                           : std::vector<Law>(K, Law::Exponential);
      try {
        make_queueing_spec(*out.network, laws.interarrival, laws.service);
      } catch (const Error& e) {
        p.fail({"queueing"}, e.what());
      }
      out.queueing = laws;
    }
    if (doc.contains("certificate")) {
      const auto& c = doc["certificate"];
      p.check_keys(c, {"certificate"}, {"kind", "h", "A"});
      CertificateInput cert;
      const std::string kind = c.contains("kind") && c["kind"].is_string() ? c["kind"].get<std::string>() : "";
      if (kind == "linear") {
        cert.kind = Certificate::Kind::Linear;
      } else if (kind == "piecewise_linear") {
        cert.kind = Certificate::Kind::PiecewiseLinear;
        if (!c.contains("h") || !c["h"].is_array()) p.fail({"certificate", "h"}, "list of vectors required");
        for (const auto& v : c["h"]) cert.h.push_back(p.vector(v, {"certificate", "h"}));
      } else if (kind == "quadratic") {
        cert.kind = Certificate::Kind::Quadratic;
        if (!c.contains("A")) p.fail({"certificate", "A"}, "matrix required");
        cert.A = p.matrix(c["A"], {"certificate", "A"}, K, K);
      } else {
        p.fail({"certificate", "kind"}, "expected linear, piecewise_linear or quadratic");
      }
      out.certificate = cert;
    }
    if (doc.contains("fluidlimit")) {
      const auto& f = doc["fluidlimit"];
      p.check_keys(f, {"fluidlimit"}, {"direction", "r_list", "seeds"});
      FluidLimitInput fl;
      if (f.contains("direction")) fl.direction = p.vector(f["direction"], {"fluidlimit", "direction"});
      if (f.contains("r_list")) {
        const Eigen::VectorXd r = p.vector(f["r_list"], {"fluidlimit", "r_list"});
        fl.r_list.assign(r.data(), r.data() + r.size());
      }
      if (f.contains("seeds")) fl.seeds = p.count(f["seeds"], {"fluidlimit", "seeds"});
      out.fluidlimit = fl;
    }
  } else {
    for (const char* key : {"stations", "routing", "constituency", "discipline", "priority_order", "initial_state",
                            "queueing", "certificate", "fluidlimit"}) {
      if (doc.contains(key)) p.fail({key}, "requires a network (classes, alpha, mu)");
    }
  }

  if (doc.contains("skorokhod")) {
    const auto& s = doc["skorokhod"];
    p.check_keys(s, {"skorokhod"}, {"theta", "R", "Z0", "M_u"});
    for (const char* key : {"theta", "R", "Z0"}) {
      if (!s.contains(key)) p.fail({"skorokhod", key}, "missing required key");
    }
    LspInstance inst;
    inst.theta = p.vector(s["theta"], {"skorokhod", "theta"});
    const auto J = static_cast<std::size_t>(inst.theta.size());
    inst.R = p.matrix(s["R"], {"skorokhod", "R"}, J, J);
    inst.Z0 = p.vector(s["Z0"], {"skorokhod", "Z0"});
    if (s.contains("M_u")) inst.M_u = p.number(s["M_u"], {"skorokhod", "M_u"});
    if (static_cast<std::size_t>(inst.R.rows()) != J || static_cast<std::size_t>(inst.R.cols()) != J ||
        static_cast<std::size_t>(inst.Z0.size()) != J) {
      p.fail({"skorokhod"}, "theta, R and Z0 dimensions differ");
    }
    out.skorokhod = inst;
  }
  if (!out.network && !out.skorokhod) p.fail({}, "file holds neither a network nor a skorokhod section");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SpecFile load_spec(const std::filesystem::path& path) { return parse_spec(read_file(path)); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::IoError, "cannot rename into " + path.string());
  }
}

std::string trajectory_csv(const Trajectory& traj) {
  std::ostringstream os;
  write_trajectory_csv(os, traj);
  return os.str();
}

std::string lsp_solution_csv(const LspSolution& sol) {
  std::ostringstream os;
  const std::size_t J = sol.Z.empty() ? 0 : static_cast<std::size_t>(sol.Z.front().size());
  os << "t";
  for (std::size_t j = 0; j < J; ++j) os << ",Z" << j + 1;
  for (std::size_t j = 0; j < J; ++j) os << ",Y" << j + 1;
  os << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < sol.size(); ++i) {
    os << sol.time[i];
    for (std::size_t j = 0; j < J; ++j) os << ',' << sol.Z[i](static_cast<Eigen::Index>(j));
    for (std::size_t j = 0; j < J; ++j) os << ',' << sol.Y[i](static_cast<Eigen::Index>(j));
    os << '\n';
  }
  return os.str();
}

std::string distance_csv(const std::vector<DistanceRow>& rows) {
  std::ostringstream os;
  write_distance_csv(os, rows);
  return os.str();
}

std::string sample_path_csv(const SamplePath& path) {
  std::ostringstream os;
  write_sample_path_csv(os, path);
  return os.str();
}

}  // namespace fluidnet
