#pragma once

#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "fluidnet/model.hpp"

namespace fixtures {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

inline Eigen::MatrixXd mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows.begin()->size());
  Eigen::MatrixXd m(r, c);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

inline fluidnet::NetworkSpec single_queue(double alpha = 0.0, double mu = 1.0) {
  fluidnet::RawNetworkSpec raw;
  raw.alpha = vec({alpha});
  raw.mu = vec({mu});
  raw.P = mat({{0.0}});
  raw.C = mat({{1.0}});
  return fluidnet::validate(raw);
}

inline fluidnet::NetworkSpec tandem() {
  fluidnet::RawNetworkSpec raw;
  raw.alpha = vec({1.0, 0.0});
  raw.mu = vec({2.0, 3.0});
  raw.P = mat({{0, 1}, {0, 0}});
  raw.C = mat({{1, 0}, {0, 1}});
  return fluidnet::validate(raw);
}

/// Station 1 serves classes 1 and 3, station 2 serves class 2; class 1 feeds class 2.
inline fluidnet::NetworkSpec two_station_wc() {
  fluidnet::RawNetworkSpec raw;
  raw.alpha = vec({0.3, 0.0, 0.3});
  raw.mu = vec({2.0, 1.5, 2.0});
  raw.P = mat({{0, 1, 0}, {0, 0, 0}, {0, 0, 0}});
  raw.C = mat({{1, 0, 1}, {0, 1, 0}});
  return fluidnet::validate(raw);
}

/// One station, class 1 feeds class 2, class 2 has priority.
inline fluidnet::NetworkSpec priority_two_class() {
  fluidnet::RawNetworkSpec raw;
  raw.alpha = vec({0.3, 0.0});
  raw.mu = vec({1.0, 1.0});
  raw.P = mat({{0, 1}, {0, 0}});
  raw.C = mat({{1, 1}});
  raw.discipline = fluidnet::Discipline::Priority;
  raw.priority_order = {1, 0};
  return fluidnet::validate(raw);
}

/// Three visits, stations 1-2-1, light load.
inline fluidnet::NetworkSpec reentrant_line() {
  fluidnet::RawNetworkSpec raw;
  raw.alpha = vec({0.2, 0.0, 0.0});
  raw.mu = vec({1.0, 1.0, 1.0});
  raw.P = mat({{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});
  raw.C = mat({{1, 0, 1}, {0, 1, 0}});
  return fluidnet::validate(raw);
}

/// Route 1-2-3-4; station A = {1,4}, station B = {2,3}; classes 4 and 2 have priority.
inline fluidnet::NetworkSpec lu_kumar() {
  fluidnet::RawNetworkSpec raw;
  raw.alpha = vec({1.0, 0.0, 0.0, 0.0});
  raw.mu = vec({1.0 / 0.1, 1.0 / 0.6, 1.0 / 0.1, 1.0 / 0.6});
  raw.P = mat({{0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}});
  raw.C = mat({{1, 0, 0, 1}, {0, 1, 1, 0}});
  raw.discipline = fluidnet::Discipline::Priority;
  raw.priority_order = {3, 1, 0, 2};
  return fluidnet::validate(raw);
}

inline std::vector<fluidnet::NetworkSpec> stable_fixtures() {
  return {single_queue(0.5), tandem(), two_station_wc(), priority_two_class(), reentrant_line()};
}

}  // namespace fixtures
