#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fluidnet/fluidlimit.hpp"
#include "fluidnet/lyapunov.hpp"
#include "fluidnet/model.hpp"
#include "fluidnet/skorokhod.hpp"

namespace fluidnet {

struct QueueingLaws {
  std::vector<Law> interarrival;
  std::vector<Law> service;
};

struct CertificateInput {
  Certificate::Kind kind = Certificate::Kind::Linear;
  std::vector<Eigen::VectorXd> h;  // piecewise-linear pieces
  Eigen::MatrixXd A;               // quadratic form
};

struct FluidLimitInput {
  std::optional<Eigen::VectorXd> direction;
  std::vector<double> r_list;
  std::size_t seeds = 0;
};

/// Contents of a spec file. The network part is optional so that a file can
/// carry a Skorokhod instance alone.
struct SpecFile {
  std::optional<NetworkSpec> network;
  std::optional<Eigen::VectorXd> initial_state;
  std::optional<QueueingLaws> queueing;
  std::optional<LspInstance> skorokhod;
  std::optional<CertificateInput> certificate;
  std::optional<FluidLimitInput> fluidlimit;
};

/// Parses the JSON spec format documented in the README. Syntax and schema
/// problems raise ParseError with a line:column prefix; invalid network data
/// raises the validation error unchanged.
SpecFile parse_spec(const std::string& text);
SpecFile load_spec(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string trajectory_csv(const Trajectory& traj);
std::string lsp_solution_csv(const LspSolution& sol);
std::string distance_csv(const std::vector<DistanceRow>& rows);
std::string sample_path_csv(const SamplePath& path);

}  // namespace fluidnet
