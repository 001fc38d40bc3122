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

#include "deface/fairness.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <set>

#include "deface/csv.hpp"
#include "deface/error.hpp"

namespace deface {

namespace {

// Absorbs rounding in min/max and 1 - eps so that ratios sitting exactly on
// the boundary (0.4 / 0.5 vs 1 - 0.2) count as biased.
constexpr double kBoundaryTolerance = 1e-12;

bool valid_rate(double r) { return r >= 0.0 && r <= 1.0; }

}  // namespace

void RateTable::validate() const {
  if (entries.size() < 2) {
    throw InvalidArgument("rate table `" + metric_name + "` needs at least two demographics");
  }
  std::set<std::string> names;
  for (const auto& e : entries) {
    if (!names.insert(e.demographic).second) {
      throw InvalidArgument("rate table `" + metric_name + "` repeats `" + e.demographic + "`");
    }
    if (!valid_rate(e.rate)) {
      throw InvalidArgument(fmt::format("rate table `{}`: rate {} for `{}` outside [0, 1]",
                                        metric_name, e.rate, e.demographic));
    }
  }
}

const RateEntry* RateTable::find(const std::string& demographic) const {
  for (const auto& e : entries) {
    if (e.demographic == demographic) return &e;
  }
  return nullptr;
}

std::vector<RateTable> parse_rates(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header({"metric", "demographic", "rate", "count"});
  std::vector<RateTable> tables;
  while (auto row = reader.next()) {
    const auto& f = *row;
    if (f.size() != 4) reader.fail("expected 4 fields");
    if (f[0].empty() || f[1].empty()) reader.fail("empty metric or demographic");
    const auto rate = csv::parse_double(f[2]);
    if (!rate || !valid_rate(*rate)) reader.fail("rate must be a number in [0, 1]: `" + f[2] + "`");
    const auto count = csv::parse_int(f[3]);
    if (!count || *count < 0) reader.fail("count must be a non-negative integer: `" + f[3] + "`");
    auto it = std::find_if(tables.begin(), tables.end(), [&](const auto& t) { return t.metric_name == f[0]; });
    if (it == tables.end()) {
      tables.push_back({f[0], {}});
      it = std::prev(tables.end());
    }
    if (it->find(f[1])) reader.fail("demographic `" + f[1] + "` repeated for metric `" + f[0] + "`");
    it->entries.push_back({f[1], *rate, static_cast<std::size_t>(*count)});
  }
  return tables;
}

std::vector<RateTable> load_rates(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_rates(in, path.string());
}

void write_rates(std::ostream& out, const std::vector<RateTable>& tables) {
  out << "metric,demographic,rate,count\n";
  for (const auto& t : tables) {
    for (const auto& e : t.entries) {
      out << csv::join({t.metric_name, e.demographic, csv::format_double(e.rate), std::to_string(e.count)})
          << '\n';
    }
  }
}

double rate_ratio(double rate_a, double rate_b) {
  const double hi = std::max(rate_a, rate_b);
  if (hi == 0.0) return 1.0;
  return std::min(rate_a, rate_b) / hi;
}

EoResult eo_bias(double rate_a, double rate_b, double eps) {
  if (!valid_rate(rate_a) || !valid_rate(rate_b)) throw InvalidArgument("EO rates must lie in [0, 1]");
  if (!(eps > 0.0 && eps < 1.0)) throw InvalidArgument("EO slack must lie in (0, 1)");
  const double r = rate_ratio(rate_a, rate_b);
  if (r > (1.0 - eps) + kBoundaryTolerance) return {false, std::nullopt};
  return {true, rate_a < rate_b ? 0 : 1};
}

double average_bias(const RateTable& table, double eps) {
  table.validate();
  const auto& e = table.entries;
  std::size_t biased = 0;
  for (std::size_t i = 0; i < e.size(); ++i)
    for (std::size_t j = i + 1; j < e.size(); ++j) biased += eo_bias(e[i].rate, e[j].rate, eps).biased;
  const double pairs = double(e.size()) * double(e.size() - 1) / 2.0;
  return 100.0 * double(biased) / pairs;
}

double demographic_bias(const RateTable& table, const std::string& demographic, double eps) {
  table.validate();
  const RateEntry* d = table.find(demographic);
  if (!d) throw InvalidArgument("demographic `" + demographic + "` not in rate table `" + table.metric_name + "`");
  std::size_t against = 0;
  for (const auto& other : table.entries) {
    if (&other == d) continue;
    const EoResult r = eo_bias(d->rate, other.rate, eps);
    against += r.biased && r.against == 0;
  }
  return 100.0 * double(against) / double(table.entries.size() - 1);
}

void check_eps_grid(const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) throw InvalidArgument("empty epsilon grid");
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0.0 && eps_grid[i] < 1.0)) throw InvalidArgument("epsilon values must lie in (0, 1)");
    if (i && !(eps_grid[i] < eps_grid[i - 1])) throw InvalidArgument("epsilon grid must be strictly descending");
  }
}

BiasReport bias_table(const RateTable& table, const std::vector<double>& eps_grid) {
  table.validate();
  check_eps_grid(eps_grid);
  BiasReport report;
  report.metric_name = table.metric_name;
  report.eps_grid = eps_grid;
  const auto& e = table.entries;
  const std::size_t n = e.size();
  std::vector<std::vector<double>> against_counts(n, std::vector<double>(eps_grid.size(), 0.0));
  report.ab.assign(eps_grid.size(), 0.0);
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    std::size_t biased = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const EoResult r = eo_bias(e[i].rate, e[j].rate, eps_grid[k]);
        PairFlag flag{e[i].demographic, e[j].demographic, eps_grid[k], r.biased, std::nullopt};
        if (r.biased) {
          ++biased;
          const std::size_t loser = *r.against == 0 ? i : j;
          flag.against = e[loser].demographic;
          against_counts[loser][k] += 1.0;
        }
        report.pair_flags.push_back(std::move(flag));
      }
    }
    report.ab[k] = 100.0 * double(biased) / (double(n) * double(n - 1) / 2.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> db(eps_grid.size());
    for (std::size_t k = 0; k < eps_grid.size(); ++k) db[k] = 100.0 * against_counts[i][k] / double(n - 1);
    report.db.emplace_back(e[i].demographic, std::move(db));
  }
  return report;
}

}  // namespace deface
