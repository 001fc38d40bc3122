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

#include <doctest.h>

#include <sstream>

#include "deface/error.hpp"
#include "deface/experiment.hpp"
#include "deface/report.hpp"
#include "test_support.hpp"

using namespace deface;
using deface::testing::TempDir;
using deface::testing::read_file;

namespace {

ExperimentConfig small_config(const std::filesystem::path& out, const std::string& name = "tiny") {
  ExperimentConfig cfg;
  cfg.name = name;
  cfg.output_dir = out;
  for (int s = 0; s < 6; ++s) cfg.stages.insert(static_cast<Stage>(s));
  SynthConfig sc;
  sc.spec.name = name;
  sc.spec.groups = {DemographicKey{Gender::kMale, Race::kWhite}, DemographicKey{Gender::kFemale, Race::kAsian}};
  sc.spec.ids_per_group = 6;
  sc.spec.imgs_per_id = 4;
  sc.spec.dim = 16;
  sc.heatmap_side = 16;
  cfg.synthetic = sc;
  cfg.attacks = attack_names();
  cfg.svm.epochs = 10;
  MethodConfig m;
  m.name = "blur";
  m.synth.strength = 0.8;
  m.synth.fail_rate = 0.1;
  cfg.methods.push_back(m);
  return cfg;
}

ReportBundle tiny_bundle(const std::filesystem::path& out, const std::string& name = "tiny") {
  RunOptions opt;
  opt.write_artifacts = false;
  return run_experiment(small_config(out, name), opt);
}

}  // namespace

TEST_CASE("eps vector rendering") {
  CHECK(render_eps_vector({0, 0, 0, 0, 0}) == "[0, 0, 0, 0, 0]");
  CHECK(render_eps_vector({100, 100, 100, 100, 100}) == "[100, 100, 100, 100, 100]");
  CHECK(render_eps_vector({0, 0, 100.0 / 3, 50, 66.67}) == "[0, 0, 33, 50, 67]");
  CHECK(render_eps_vector({}) == "[]");
}

TEST_CASE("mean rendering uses one decimal") {
  CHECK(render_mean(83.44) == "83.4");
  CHECK(render_mean(16.6) == "16.6");
  CHECK(render_mean(100) == "100.0");
  CHECK(render_mean(-0.01) == "0.0");
}

TEST_CASE("bias rows render in descending eps order") {
  ReportBundle b;
  b.dataset = "d";
  b.artifacts = {{"rates/x", "ingest"}, {"bias/x", "bias"}};
  RateTable t{"osr", {{"A", 1.0, 5}, {"B", 0.87, 5}}};
  b.bias.push_back({"bias/x", "rates/x", "m", bias_table(t)});
  check_provenance(b);
  const auto tables = report_tables({b});
  const auto it = std::find_if(tables.begin(), tables.end(), [](const auto& x) { return x.name == "bias"; });
  REQUIRE(it != tables.end());
  REQUIRE(it->rows.size() == 3);
  CHECK(it->rows[0] == std::vector<std::string>{"d", "bias/x", "m", "osr", "AB", "[0.2, 0.15, 0.1, 0.05, 0.02]",
                                                "[0, 0, 100, 100, 100]"});
  CHECK(it->rows[2][4] == "DB B");
  CHECK(it->rows[2][6] == "[0, 0, 100, 100, 100]");
}

TEST_CASE("markdown tables are pipe delimited with a header row") {
  const TextTable t{"x", {"a", "b"}, {{"1", "p|q"}, {"2", "3"}}};
  CHECK(render_table(t, TableFormat::kMarkdown) == "| a | b |\n| --- | --- |\n| 1 | p\\|q |\n| 2 | 3 |\n");
  CHECK(render_table(t, TableFormat::kCsv) == "a,b\n1,p|q\n2,3\n");
  const std::string json = render_table(t, TableFormat::kJson);
  CHECK(json.find("\"x\"") != std::string::npos);
  CHECK(parse_table_format("md") == TableFormat::kMarkdown);
  CHECK_FALSE(parse_table_format("html").has_value());
}

TEST_CASE("bundle provenance closes over artifacts") {
  TempDir dir("rep");
  const ReportBundle b = tiny_bundle(dir.path());
  CHECK_NOTHROW(check_provenance(b));
  std::set<std::string> ids;
  for (const auto& a : b.artifacts) ids.insert(a.id);
  for (const auto& row : b.rows)
    for (const auto& [col, cell] : row.cells) {
      std::size_t start = 0;
      while (start <= cell.source.size()) {
        const std::size_t end = std::min(cell.source.find('+', start), cell.source.size());
        CHECK(ids.count(cell.source.substr(start, end - start)) == 1);
        start = end + 1;
      }
    }
  ReportBundle broken = b;
  REQUIRE_FALSE(broken.rows.empty());
  broken.rows[0].cells.begin()->second.source = "nowhere";
  CHECK_THROWS_AS(check_provenance(broken), IntegrityError);
  ReportBundle broken_bias = b;
  REQUIRE_FALSE(broken_bias.bias.empty());
  broken_bias.bias[0].source = "rates/none";
  CHECK_THROWS_AS(check_provenance(broken_bias), IntegrityError);
}

TEST_CASE("bundle json round trip") {
  TempDir dir("rep");
  const ReportBundle b = tiny_bundle(dir.path());
  const auto j = to_json(b);
  const ReportBundle back = bundle_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
  save_bundle(dir / "bundle.json", b);
  CHECK(to_json(load_bundle(dir / "bundle.json")).dump() == j.dump());
  deface::testing::write_file(dir / "bad.json", "{\"version\": 1");
  CHECK_THROWS_AS(load_bundle(dir / "bad.json"), ParseError);
}

TEST_CASE("emit_tables is idempotent and writes every table") {
  TempDir dir("rep");
  const ReportBundle b = tiny_bundle(dir.path());
  for (auto fmt : {TableFormat::kCsv, TableFormat::kMarkdown, TableFormat::kJson}) {
    const auto sub = dir / std::string(extension(fmt));
    std::filesystem::create_directories(sub);
    const auto first = emit_tables({b}, fmt, sub);
    std::vector<std::string> bytes;
    for (const auto& p : first) bytes.push_back(read_file(p));
    const auto second = emit_tables({b}, fmt, sub);
    REQUIRE(first == second);
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(read_file(second[i]) == bytes[i]);
    CHECK(first.size() == (fmt == TableFormat::kJson ? 1u : 9u));
  }
  deface::testing::write_file(dir / "file", "x");
  CHECK_THROWS(emit_tables({b}, TableFormat::kCsv, dir / "file" / "sub"));
}

TEST_CASE("overall rows average across datasets and cite every source") {
  TempDir dir("rep");
  const ReportBundle a = tiny_bundle(dir / "a", "one");
  const ReportBundle b = tiny_bundle(dir / "b", "two");
  const auto rows = overall_rows({a, b});
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].method == "blur");
  for (const auto& r : rows) {
    CHECK(r.dataset == "all");
    for (const auto& [col, cell] : r.cells) {
      double sum = 0;
      int n = 0;
      for (const auto* bundle : {&a, &b})
        for (const auto& row : bundle->rows)
          if (row.method == r.method && row.cells.count(col)) sum += row.cells.at(col).value, ++n;
      CHECK(cell.value == doctest::Approx(sum / n));
      CHECK(cell.source.find('+') != std::string::npos);
    }
  }
}
