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

// Report bundle: every number an experiment produced, each tagged with the
// id of the stage artifact it came from, plus table emission in csv, json
// and markdown.

#ifndef DEFACE_REPORT_HPP_
#define DEFACE_REPORT_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deface/fairness.hpp"
#include "deface/focus.hpp"
#include "deface/identification.hpp"
#include "deface/verification.hpp"

namespace deface {

/// Something a stage produced; cells cite it by id.
struct Artifact {
  std::string id;
  std::string stage;
};

struct StageStatus {
  std::string stage;
  std::string target;
  /// "ok", "failed" or "skipped".
  std::string status;
  std::string message;
};

struct Cell {
  double value = 0.0;
  /// Artifact ids joined by '+'.
  std::string source;
};

/// Columns of the overall and per-dataset tables, in rendering order.
const std::vector<std::string>& overall_columns();

struct MethodRow {
  std::string dataset;
  std::string method;
  /// Column name -> value in percent.
  std::map<std::string, Cell> cells;
};

struct SourcedRates {
  std::string id;
  std::string method;
  RateTable table;
};

struct SourcedBias {
  std::string id;
  std::string source;
  std::string method;
  BiasReport report;
};

struct SourcedVerification {
  std::string id;
  std::string method;
  VerificationMode mode = VerificationMode::kBaseline;
  RocSummary overall;
};

struct SourcedIdentification {
  std::string id;
  std::string method;
  Scenario scenario = Scenario::kS1;
  ThreatModel threat = ThreatModel::kM3;
  std::size_t n = 0;
  std::size_t correct = 0;
  double ir = 0.0;
  double osr = 1.0;
};

struct FocusCount {
  std::string id;
  std::string method;
  std::string group_by;
  std::string group;
  std::string region;
  std::size_t count = 0;
};

struct FocusCorrelationRow {
  std::string id;
  std::string method;
  GroupCorrelation value;
};

struct ReportBundle {
  int version = 1;
  std::string name;
  std::string dataset;
  std::uint64_t seed = 42;
  std::vector<Artifact> artifacts;
  std::vector<StageStatus> stages;
  std::vector<MethodRow> rows;
  std::vector<SourcedVerification> verification;
  std::vector<SourcedIdentification> identification;
  std::vector<SourcedRates> rates;
  std::vector<SourcedBias> bias;
  std::vector<FocusCount> focus_distribution;
  std::vector<FocusCorrelationRow> focus_correlation;

  bool has_failures() const;
};

/// Throws IntegrityError naming the first cell or row whose source does not
/// resolve to an artifact.
void check_provenance(const ReportBundle& bundle);

/// Per-method means across bundles (one bundle per dataset), each cell
/// citing every contributing source.
std::vector<MethodRow> overall_rows(const std::vector<ReportBundle>& bundles);

nlohmann::ordered_json to_json(const ReportBundle& bundle);
ReportBundle bundle_from_json(const nlohmann::ordered_json& j);
void save_bundle(const std::filesystem::path& path, const ReportBundle& bundle);
ReportBundle load_bundle(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const RocSummary& s);
nlohmann::ordered_json to_json(const VerificationReport& r);
nlohmann::ordered_json to_json(const IdentificationReport& r);
nlohmann::ordered_json to_json(const BiasReport& r);

/// `[v1, v2, ...]` in grid order, each value rounded to an integer percent.
std::string render_eps_vector(const std::vector<double>& values);
/// One decimal, fixed.
std::string render_mean(double value);

enum class TableFormat { kCsv, kJson, kMarkdown };
std::optional<TableFormat> parse_table_format(std::string_view text);
std::string_view extension(TableFormat f);

/// A rendered table: header and rows of display strings.
struct TextTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// The report tables of one or more bundles: overall, datasets, rates,
/// bias, verification, identification, focus_distribution,
/// focus_correlation, stages.
std::vector<TextTable> report_tables(const std::vector<ReportBundle>& bundles);

std::string render_table(const TextTable& table, TableFormat format);
/// All tables as one json document keyed by table name.
std::string render_json(const std::vector<TextTable>& tables);

/// Writes <dir>/<table>.csv or .md per table, or <dir>/tables.json.
/// Returns the written paths. Throws Error when a file cannot be written.
std::vector<std::filesystem::path> emit_tables(const std::vector<ReportBundle>& bundles, TableFormat format,
                                               const std::filesystem::path& dir);

}  // namespace deface

#endif  // DEFACE_REPORT_HPP_
