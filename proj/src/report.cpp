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

#include "deface/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "deface/csv.hpp"
#include "deface/error.hpp"

namespace deface {

using json = nlohmann::ordered_json;

const std::vector<std::string>& overall_columns() {
  static const std::vector<std::string> cols = {"passing",     "detection",   "verify_m1",   "verify_m2",
                                                "identify_m3", "identify_m4", "identify_m5", "identify_m6"};
  return cols;
}

bool ReportBundle::has_failures() const {
  return std::any_of(stages.begin(), stages.end(), [](const StageStatus& s) { return s.status == "failed"; });
}

namespace {

std::vector<std::string> split_sources(const std::string& source) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= source.size()) {
    const std::size_t end = std::min(source.find('+', start), source.size());
    out.push_back(source.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

}  // namespace

void check_provenance(const ReportBundle& bundle) {
  std::set<std::string> ids;
  for (const auto& a : bundle.artifacts) ids.insert(a.id);
  const auto need = [&](const std::string& source, const std::string& where) {
    for (const auto& id : split_sources(source)) {
      if (!ids.count(id)) throw IntegrityError(where + " cites unknown artifact '" + id + "'");
    }
  };
  for (const auto& row : bundle.rows)
    for (const auto& [col, cell] : row.cells) need(cell.source, "row " + row.method + "/" + col);
  for (const auto& v : bundle.verification) need(v.id, "verification row");
  for (const auto& v : bundle.identification) need(v.id, "identification row");
  for (const auto& r : bundle.rates) need(r.id, "rate table");
  for (const auto& b : bundle.bias) {
    need(b.id, "bias report");
    need(b.source, "bias report " + b.id);
  }
  for (const auto& f : bundle.focus_distribution) need(f.id, "focus distribution row");
  for (const auto& f : bundle.focus_correlation) need(f.id, "focus correlation row");
}

std::vector<MethodRow> overall_rows(const std::vector<ReportBundle>& bundles) {
  std::vector<std::string> methods;
  std::map<std::string, std::map<std::string, std::vector<const Cell*>>> cells;
  for (const auto& b : bundles) {
    for (const auto& row : b.rows) {
      if (std::find(methods.begin(), methods.end(), row.method) == methods.end()) methods.push_back(row.method);
      for (const auto& [col, cell] : row.cells) cells[row.method][col].push_back(&cell);
    }
  }
  std::vector<MethodRow> out;
  for (const auto& m : methods) {
    MethodRow row{"all", m, {}};
    for (const auto& [col, list] : cells[m]) {
      Cell c;
      for (const Cell* p : list) {
        c.value += p->value;
        c.source += (c.source.empty() ? "" : "+") + p->source;
      }
      c.value /= double(list.size());
      row.cells.emplace(col, std::move(c));
    }
    out.push_back(std::move(row));
  }
  return out;
}

// ---- json ------------------------------------------------------------------

json to_json(const RocSummary& s) {
  return json{{"threshold", s.threshold}, {"f1", s.f1},
              {"auc", s.auc},             {"tpr", s.tpr},
              {"fpr", s.fpr},             {"osr", s.osr},
              {"fpr_target", s.fpr_target}, {"tpr_at_fpr", s.tpr_at_fpr},
              {"positives", s.positives}, {"negatives", s.negatives}};
}

namespace {

RocSummary roc_from_json(const json& j) {
  RocSummary s;
  s.threshold = j.at("threshold").get<double>();
  s.f1 = j.at("f1").get<double>();
  s.auc = j.at("auc").get<double>();
  s.tpr = j.at("tpr").get<double>();
  s.fpr = j.at("fpr").get<double>();
  s.osr = j.at("osr").get<double>();
  s.fpr_target = j.at("fpr_target").get<double>();
  s.tpr_at_fpr = j.at("tpr_at_fpr").get<double>();
  s.positives = j.at("positives").get<std::size_t>();
  s.negatives = j.at("negatives").get<std::size_t>();
  return s;
}

json rates_json(const RateTable& t) {
  json entries = json::array();
  for (const auto& e : t.entries)
    entries.push_back({{"demographic", e.demographic}, {"rate", e.rate}, {"count", e.count}});
  return json{{"metric", t.metric_name}, {"entries", std::move(entries)}};
}

RateTable rates_from_json(const json& j) {
  RateTable t{j.at("metric").get<std::string>(), {}};
  for (const auto& e : j.at("entries"))
    t.entries.push_back({e.at("demographic").get<std::string>(), e.at("rate").get<double>(),
                         e.at("count").get<std::size_t>()});
  return t;
}

BiasReport bias_from_json(const json& j) {
  BiasReport r;
  r.metric_name = j.at("metric").get<std::string>();
  r.eps_grid = j.at("eps_grid").get<std::vector<double>>();
  r.ab = j.at("ab").get<std::vector<double>>();
  for (const auto& d : j.at("db")) r.db.emplace_back(d.at("demographic").get<std::string>(), d.at("values").get<std::vector<double>>());
  for (const auto& f : j.at("pair_flags")) {
    PairFlag p{f.at("a").get<std::string>(), f.at("b").get<std::string>(), f.at("eps").get<double>(),
               f.at("biased").get<bool>(), std::nullopt};
    if (!f.at("against").is_null()) p.against = f.at("against").get<std::string>();
    r.pair_flags.push_back(std::move(p));
  }
  return r;
}

}  // namespace

json to_json(const BiasReport& r) {
  json db = json::array();
  for (const auto& [name, values] : r.db) db.push_back({{"demographic", name}, {"values", values}});
  json flags = json::array();
  for (const auto& f : r.pair_flags) {
    flags.push_back({{"a", f.a},
                     {"b", f.b},
                     {"eps", f.eps},
                     {"biased", f.biased},
                     {"against", f.against ? json(*f.against) : json(nullptr)}});
  }
  return json{{"metric", r.metric_name}, {"eps_grid", r.eps_grid}, {"ab", r.ab}, {"db", std::move(db)},
              {"pair_flags", std::move(flags)}};
}

json to_json(const VerificationReport& r) {
  json groups = json::array();
  for (const auto& g : r.groups)
    groups.push_back({{"group", g.group}, {"positives", g.positives}, {"matched", g.matched}, {"tpr", g.tpr},
                      {"osr", g.osr}});
  return json{{"mode", std::string(to_string(r.mode))},
              {"dataset", r.dataset},
              {"group_by", std::string(to_string(r.group_by))},
              {"overall", to_json(r.overall)},
              {"groups", std::move(groups)}};
}

json to_json(const IdentificationReport& r) {
  json groups = json::array();
  for (const auto& g : r.per_demographic)
    groups.push_back({{"group", g.group}, {"n", g.n}, {"correct", g.correct}, {"ir", g.ir}, {"osr", g.osr}});
  return json{{"scenario", std::string(to_string(r.scenario))},
              {"threat", std::string(to_string(r.threat))},
              {"dataset", r.dataset},
              {"n", r.n},
              {"correct", r.correct},
              {"ir", r.ir},
              {"osr", r.osr},
              {"groups", std::move(groups)}};
}

json to_json(const ReportBundle& b) {
  json j;
  j["version"] = b.version;
  j["name"] = b.name;
  j["dataset"] = b.dataset;
  j["seed"] = b.seed;
  json artifacts = json::array();
  for (const auto& a : b.artifacts) artifacts.push_back({{"id", a.id}, {"stage", a.stage}});
  j["artifacts"] = std::move(artifacts);
  json stages = json::array();
  for (const auto& s : b.stages)
    stages.push_back({{"stage", s.stage}, {"target", s.target}, {"status", s.status}, {"message", s.message}});
  j["stages"] = std::move(stages);
  json rows = json::array();
  for (const auto& r : b.rows) {
    json cells = json::object();
    for (const auto& col : overall_columns()) {
      auto it = r.cells.find(col);
      if (it != r.cells.end()) cells[col] = {{"value", it->second.value}, {"source", it->second.source}};
    }
    rows.push_back({{"dataset", r.dataset}, {"method", r.method}, {"cells", std::move(cells)}});
  }
  j["rows"] = std::move(rows);
  json ver = json::array();
  for (const auto& v : b.verification)
    ver.push_back({{"id", v.id}, {"method", v.method}, {"mode", std::string(to_string(v.mode))},
                   {"overall", to_json(v.overall)}});
  j["verification"] = std::move(ver);
  json ident = json::array();
  for (const auto& v : b.identification)
    ident.push_back({{"id", v.id},
                     {"method", v.method},
                     {"scenario", std::string(to_string(v.scenario))},
                     {"threat", std::string(to_string(v.threat))},
                     {"n", v.n},
                     {"correct", v.correct},
                     {"ir", v.ir},
                     {"osr", v.osr}});
  j["identification"] = std::move(ident);
  json rates = json::array();
  for (const auto& r : b.rates) {
    json t = rates_json(r.table);
    rates.push_back({{"id", r.id}, {"method", r.method}, {"table", std::move(t)}});
  }
  j["rates"] = std::move(rates);
  json bias = json::array();
  for (const auto& r : b.bias)
    bias.push_back({{"id", r.id}, {"source", r.source}, {"method", r.method}, {"report", to_json(r.report)}});
  j["bias"] = std::move(bias);
  json dist = json::array();
  for (const auto& f : b.focus_distribution)
    dist.push_back({{"id", f.id},
                    {"method", f.method},
                    {"group_by", f.group_by},
                    {"group", f.group},
                    {"region", f.region},
                    {"count", f.count}});
  j["focus_distribution"] = std::move(dist);
  json corr = json::array();
  for (const auto& f : b.focus_correlation)
    corr.push_back({{"id", f.id},
                    {"method", f.method},
                    {"group", f.value.group},
                    {"mean_r", f.value.mean_r},
                    {"n", f.value.n},
                    {"skipped", f.value.skipped}});
  j["focus_correlation"] = std::move(corr);
  return j;
}

ReportBundle bundle_from_json(const json& j) {
  try {
    ReportBundle b;
    b.version = j.at("version").get<int>();
    if (b.version != 1) throw ParseError("bundle", 0, "unsupported bundle version " + std::to_string(b.version));
    b.name = j.at("name").get<std::string>();
    b.dataset = j.at("dataset").get<std::string>();
    b.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& a : j.at("artifacts")) b.artifacts.push_back({a.at("id"), a.at("stage")});
    for (const auto& s : j.at("stages")) b.stages.push_back({s.at("stage"), s.at("target"), s.at("status"), s.at("message")});
    for (const auto& r : j.at("rows")) {
      MethodRow row{r.at("dataset"), r.at("method"), {}};
      for (const auto& [col, c] : r.at("cells").items())
        row.cells.emplace(col, Cell{c.at("value").get<double>(), c.at("source").get<std::string>()});
      b.rows.push_back(std::move(row));
    }
    for (const auto& v : j.at("verification")) {
      auto mode = parse_verification_mode(v.at("mode").get<std::string>());
      if (!mode) throw ParseError("bundle", 0, "unknown verification mode");
      b.verification.push_back({v.at("id"), v.at("method"), *mode, roc_from_json(v.at("overall"))});
    }
    for (const auto& v : j.at("identification")) {
      auto sc = parse_scenario(v.at("scenario").get<std::string>());
      auto th = parse_threat(v.at("threat").get<std::string>());
      if (!sc || !th) throw ParseError("bundle", 0, "unknown identification setting");
      b.identification.push_back({v.at("id"), v.at("method"), *sc, *th, v.at("n").get<std::size_t>(),
                                  v.at("correct").get<std::size_t>(), v.at("ir").get<double>(),
                                  v.at("osr").get<double>()});
    }
    for (const auto& r : j.at("rates")) b.rates.push_back({r.at("id"), r.at("method"), rates_from_json(r.at("table"))});
    for (const auto& r : j.at("bias"))
      b.bias.push_back({r.at("id"), r.at("source"), r.at("method"), bias_from_json(r.at("report"))});
    for (const auto& f : j.at("focus_distribution"))
      b.focus_distribution.push_back({f.at("id"), f.at("method"), f.at("group_by"), f.at("group"), f.at("region"),
                                      f.at("count").get<std::size_t>()});
    for (const auto& f : j.at("focus_correlation"))
      b.focus_correlation.push_back({f.at("id"), f.at("method"),
                                     GroupCorrelation{f.at("group"), f.at("mean_r").get<double>(),
                                                      f.at("n").get<std::size_t>(),
                                                      f.at("skipped").get<std::size_t>()}});
    return b;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bundle", 0, e.what());
  }
}

void save_bundle(const std::filesystem::path& path, const ReportBundle& bundle) {
  auto out = csv::open_output(path);
  out << to_json(bundle).dump(2) << '\n';
  if (!out) throw Error("cannot write " + path.string());
}

ReportBundle load_bundle(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
  try {
    return bundle_from_json(j);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

// ---- rendering -------------------------------------------------------------

std::string render_eps_vector(const std::vector<double>& values) {
  std::string out = "[";
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(std::lround(values[i]));
  }
  return out + "]";
}

std::string render_mean(double value) {
  std::string s = fmt::format("{:.1f}", value);
  return s == "-0.0" ? "0.0" : s;
}

std::optional<TableFormat> parse_table_format(std::string_view text) {
  if (text == "csv") return TableFormat::kCsv;
  if (text == "json") return TableFormat::kJson;
  if (text == "md") return TableFormat::kMarkdown;
  return std::nullopt;
}

std::string_view extension(TableFormat f) {
  switch (f) {
    case TableFormat::kCsv: return "csv";
    case TableFormat::kJson: return "json";
    case TableFormat::kMarkdown: return "md";
  }
  return "";
}

namespace {

std::string render_r(double r) {
  std::string s = fmt::format("{:.2f}", r);
  return s == "-0.00" ? "0.00" : s;
}

TextTable method_table(std::string name, const std::vector<MethodRow>& rows) {
  TextTable t{std::move(name), {"dataset", "method"}, {}};
  for (const auto& c : overall_columns()) t.header.push_back(c);
  for (const auto& r : rows) {
    std::vector<std::string> line{r.dataset, r.method};
    for (const auto& c : overall_columns()) {
      auto it = r.cells.find(c);
      line.push_back(it == r.cells.end() ? "-" : render_mean(it->second.value));
    }
    t.rows.push_back(std::move(line));
  }
  return t;
}

}  // namespace

std::vector<TextTable> report_tables(const std::vector<ReportBundle>& bundles) {
  std::vector<TextTable> out;
  out.push_back(method_table("overall", overall_rows(bundles)));
  std::vector<MethodRow> all_rows;
  for (const auto& b : bundles) all_rows.insert(all_rows.end(), b.rows.begin(), b.rows.end());
  out.push_back(method_table("datasets", all_rows));

  TextTable rates{"rates", {"dataset", "source", "method", "metric", "demographic", "rate", "count"}, {}};
  TextTable bias{"bias", {"dataset", "source", "method", "metric", "scope", "eps", "values"}, {}};
  TextTable ver{"verification",
                {"dataset", "source", "method", "mode", "threshold", "f1", "auc", "tpr", "osr", "tpr_at_fpr"},
                {}};
  TextTable ident{"identification", {"dataset", "source", "method", "scenario", "threat", "n", "ir", "osr"}, {}};
  TextTable dist{"focus_distribution", {"dataset", "source", "method", "group_by", "group", "region", "count"}, {}};
  TextTable corr{"focus_correlation", {"dataset", "source", "method", "group", "mean_r", "n", "skipped"}, {}};
  TextTable stages{"stages", {"dataset", "stage", "target", "status", "message"}, {}};
  for (const auto& b : bundles) {
    for (const auto& r : b.rates)
      for (const auto& e : r.table.entries)
        rates.rows.push_back({b.dataset, r.id, r.method, r.table.metric_name, e.demographic,
                              render_mean(100.0 * e.rate), std::to_string(e.count)});
    for (const auto& r : b.bias) {
      std::vector<std::string> eps;
      for (double e : r.report.eps_grid) eps.push_back(csv::format_double(e));
      std::string grid = "[";
      for (std::size_t i = 0; i < eps.size(); ++i) grid += (i ? ", " : "") + eps[i];
      grid += "]";
      bias.rows.push_back({b.dataset, r.id, r.method, r.report.metric_name, "AB", grid, render_eps_vector(r.report.ab)});
      for (const auto& [name, values] : r.report.db)
        bias.rows.push_back({b.dataset, r.id, r.method, r.report.metric_name, "DB " + name, grid,
                             render_eps_vector(values)});
    }
    for (const auto& v : b.verification)
      ver.rows.push_back({b.dataset, v.id, v.method, std::string(to_string(v.mode)),
                          fmt::format("{:.4f}", v.overall.threshold), render_mean(100.0 * v.overall.f1),
                          render_mean(100.0 * v.overall.auc), render_mean(100.0 * v.overall.tpr),
                          render_mean(100.0 * v.overall.osr), render_mean(100.0 * v.overall.tpr_at_fpr)});
    for (const auto& v : b.identification)
      ident.rows.push_back({b.dataset, v.id, v.method, std::string(to_string(v.scenario)),
                            std::string(to_string(v.threat)), std::to_string(v.n), render_mean(100.0 * v.ir),
                            render_mean(100.0 * v.osr)});
    for (const auto& f : b.focus_distribution)
      dist.rows.push_back({b.dataset, f.id, f.method, f.group_by, f.group, f.region, std::to_string(f.count)});
    for (const auto& f : b.focus_correlation)
      corr.rows.push_back({b.dataset, f.id, f.method, f.value.group, render_r(f.value.mean_r),
                           std::to_string(f.value.n), std::to_string(f.value.skipped)});
    for (const auto& s : b.stages) stages.rows.push_back({b.dataset, s.stage, s.target, s.status, s.message});
  }
  for (auto* t : {&rates, &bias, &ver, &ident, &dist, &corr, &stages}) out.push_back(std::move(*t));
  return out;
}

std::string render_table(const TextTable& table, TableFormat format) {
  std::ostringstream out;
  switch (format) {
    case TableFormat::kCsv:
      out << csv::join(table.header) << '\n';
      for (const auto& r : table.rows) out << csv::join(r) << '\n';
      break;
    case TableFormat::kMarkdown: {
      const auto cell = [](const std::string& s) {
        std::string o;
        for (char c : s) {
          if (c == '|') o += '\\';
          o += (c == '\n' ? ' ' : c);
        }
        return o;
      };
      const auto line = [&](const std::vector<std::string>& r) {
        out << '|';
        for (const auto& c : r) out << ' ' << cell(c) << " |";
        out << '\n';
      };
      line(table.header);
      out << '|';
      for (std::size_t i = 0; i < table.header.size(); ++i) out << " --- |";
      out << '\n';
      for (const auto& r : table.rows) line(r);
      break;
    }
    case TableFormat::kJson:
      return render_json({table});
  }
  return out.str();
}

std::string render_json(const std::vector<TextTable>& tables) {
  json j = json::object();
  for (const auto& t : tables) {
    json rows = json::array();
    for (const auto& r : t.rows) {
      json row = json::object();
      for (std::size_t i = 0; i < t.header.size(); ++i) row[t.header[i]] = r[i];
      rows.push_back(std::move(row));
    }
    j[t.name] = std::move(rows);
  }
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit_tables(const std::vector<ReportBundle>& bundles, TableFormat format,
                                               const std::filesystem::path& dir) {
  const auto tables = report_tables(bundles);
  std::vector<std::filesystem::path> written;
  const auto write = [&](const std::filesystem::path& path, const std::string& text) {
    auto out = csv::open_output(path);
    out << text;
    out.flush();
    if (!out) throw Error("cannot write " + path.string());
    written.push_back(path);
  };
  if (format == TableFormat::kJson) {
    write(dir / "tables.json", render_json(tables));
  } else {
    for (const auto& t : tables) write(dir / (t.name + "." + std::string(extension(format))), render_table(t, format));
  }
  return written;
}

}  // namespace deface
