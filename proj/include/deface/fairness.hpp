// Copyright 2026 The deface-bench Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Equality-of-Opportunity bias test between demographic groups and its two
// aggregates: Average Bias (share of biased group pairs) and Demographic
// Bias (share of a group's pairings in which it is the disadvantaged side).
//
// For success rates p_a, p_b the test computes r = min(p_a, p_b) / max(p_a, p_b)
// and flags bias when r <= 1 - eps. Two zero rates give r = 1 (no gap).

#ifndef DEFACE_FAIRNESS_HPP_
#define DEFACE_FAIRNESS_HPP_

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace deface {

/// Slack values reported for every bias vector, in rendering order.
inline const std::vector<double> kDefaultEpsGrid = {0.2, 0.15, 0.1, 0.05, 0.02};

struct RateEntry {
  std::string demographic;
  double rate = 0.0;
  std::size_t count = 0;

  bool operator==(const RateEntry&) const = default;
};

/// Per-demographic success rates of one metric. Entry order is the
/// rendering order.
struct RateTable {
  std::string metric_name;
  std::vector<RateEntry> entries;

  /// Throws InvalidArgument on fewer than two demographics, duplicate names,
  /// or a rate outside [0, 1].
  void validate() const;
  const RateEntry* find(const std::string& demographic) const;
  bool operator==(const RateTable&) const = default;
};

/// Rows `metric,demographic,rate,count`; one table per metric, in order of
/// first appearance.
std::vector<RateTable> parse_rates(std::istream& in, const std::string& source);
std::vector<RateTable> load_rates(const std::filesystem::path& path);
void write_rates(std::ostream& out, const std::vector<RateTable>& tables);

struct EoResult {
  bool biased = false;
  /// 0 when the first group is disadvantaged, 1 for the second.
  std::optional<int> against;

  bool operator==(const EoResult&) const = default;
};

/// min/max ratio of two rates in [0, 1]; 1 when both are 0.
double rate_ratio(double rate_a, double rate_b);

/// Requires rates in [0, 1] and 0 < eps < 1. The boundary is inclusive.
EoResult eo_bias(double rate_a, double rate_b, double eps);

/// 100 * biased pairs / C(n, 2).
double average_bias(const RateTable& table, double eps);

/// 100 * (pairs where `demographic` is the disadvantaged side) / (n - 1).
/// Throws InvalidArgument for an unknown demographic.
double demographic_bias(const RateTable& table, const std::string& demographic, double eps);

struct PairFlag {
  std::string a;
  std::string b;
  double eps = 0.0;
  bool biased = false;
  /// Name of the disadvantaged group when biased.
  std::optional<std::string> against;

  bool operator==(const PairFlag&) const = default;
};

struct BiasReport {
  std::string metric_name;
  std::vector<double> eps_grid;
  /// Pairs (i < j in table order) for every grid value.
  std::vector<PairFlag> pair_flags;
  /// Average Bias per grid value, aligned with eps_grid.
  std::vector<double> ab;
  /// Demographic Bias per group, aligned with eps_grid.
  std::vector<std::pair<std::string, std::vector<double>>> db;

  bool operator==(const BiasReport&) const = default;
};

/// Throws InvalidArgument unless the grid is nonempty, strictly descending,
/// and every value lies in (0, 1).
void check_eps_grid(const std::vector<double>& eps_grid);

BiasReport bias_table(const RateTable& table, const std::vector<double>& eps_grid = kDefaultEpsGrid);

}  // namespace deface

#endif  // DEFACE_FAIRNESS_HPP_
