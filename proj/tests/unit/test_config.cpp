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

#include "deface/config_text.hpp"
#include "deface/error.hpp"
#include "deface/experiment.hpp"
#include "test_support.hpp"

using namespace deface;
using deface::testing::TempDir;
using deface::testing::write_file;

namespace {

ConfigDocument doc(const std::string& text) {
  std::istringstream in(text);
  return ConfigDocument::parse(in, "test.toml");
}

ExperimentConfig experiment(const std::string& text, const std::filesystem::path& base = ".") {
  return parse_experiment(doc(text), base);
}

const char* kSynthetic = R"(version = 1
[experiment]
name = "t"
[synthetic]
groups = ["White Male", "Black Female"]
)";

}  // namespace

TEST_CASE("config text: values, sections and quoting") {
  const auto d = doc(R"(# header comment
version = 1
[a]
s = "x \"q\" \\ y"   # trailing comment
i = -42
f = 2.5e-1
b = true
list = [0.2, 0.1, 3]
names = ["one", "two # not a comment"]
"White Male" = 1.5
[a.b]
empty = []
)");
  CHECK(d.sections() == std::vector<std::string>{"", "a", "a.b"});
  CHECK(d.get_int("", "version") == 1);
  CHECK(d.get_string("a", "s") == R"(x "q" \ y)");
  CHECK(d.get_int("a", "i") == -42);
  CHECK(d.get_double("a", "f") == 0.25);
  CHECK(d.get_double("a", "i") == -42.0);
  CHECK(d.get_bool("a", "b") == true);
  CHECK(d.get_doubles("a", "list") == std::vector<double>{0.2, 0.1, 3.0});
  CHECK(d.get_strings("a", "names") == std::vector<std::string>{"one", "two # not a comment"});
  CHECK(d.get_double("a", "White Male") == 1.5);
  CHECK(d.get_doubles("a.b", "empty") == std::vector<double>{});
  CHECK_FALSE(d.get_string("a", "missing").has_value());
  CHECK(d.keys("a").front() == "White Male");
}

TEST_CASE("config text: type errors and unused keys") {
  const auto d = doc("[s]\nx = \"text\"\ny = 1.5\nz = 3\n");
  CHECK_THROWS_AS(d.get_double("s", "x"), ValidationError);
  CHECK_THROWS_AS(d.get_int("s", "y"), ValidationError);
  CHECK_THROWS_AS(d.get_bool("s", "z"), ValidationError);
  const auto fresh = doc("[s]\nx = 1\ny = 2\n");
  fresh.get_int("s", "x");
  CHECK(fresh.unused() == std::vector<std::string>{"s.y"});
}

TEST_CASE("config text: parse errors carry line numbers") {
  const auto fails_at = [](const std::string& text, int line) {
    try {
      doc(text);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(":" + std::to_string(line)) != std::string::npos);
      return true;
    }
    return false;
  };
  CHECK(fails_at("a = 1\nb\n", 2));
  CHECK(fails_at("[s\n", 1));
  CHECK(fails_at("a = \"open\n", 1));
  CHECK(fails_at("a = 1\na = 2\n", 2));
  CHECK(fails_at("[s]\n[s]\n", 2));
  CHECK(fails_at("a = [1, [2]]\n", 1));
  CHECK(fails_at("a = nope\n", 1));
  CHECK(fails_at("a = 1 junk\n", 1));
}

TEST_CASE("experiment config: defaults") {
  const ExperimentConfig cfg = experiment(kSynthetic);
  CHECK(cfg.name == "t");
  CHECK(cfg.seed == 42);
  CHECK(cfg.stages.size() == 6);
  CHECK(cfg.attacks == attack_names());
  CHECK(cfg.eps_grid == kDefaultEpsGrid);
  REQUIRE(cfg.synthetic.has_value());
  CHECK(cfg.synthetic->spec.groups.size() == 2);
  CHECK(cfg.synthetic->spec.cluster_spread == 0.5);
  CHECK(cfg.svm.lambda == 1e-4);
  CHECK(cfg.svm.epochs == 50);
  CHECK(cfg.group_by == GroupBy::kPair);
}

TEST_CASE("experiment config: methods and noise") {
  const ExperimentConfig cfg = experiment(std::string(kSynthetic) + R"(
[synthetic.noise]
"Black Female" = 2.0
[method.blur]
strength = 0.7
fail_rate = 0.1
[method.blur.noise]
"White Male" = 1.5
[method.swap]
)");
  REQUIRE(cfg.methods.size() == 2);
  CHECK(cfg.methods[0].name == "blur");
  CHECK(cfg.methods[0].synth.strength == 0.7);
  CHECK(cfg.methods[0].synth.fail_rate == 0.1);
  CHECK(cfg.methods[0].synth.noise_scale.size() == 1);
  CHECK(cfg.methods[1].synth.strength == 0.5);
  CHECK(cfg.synthetic->spec.demographic_noise_scale.size() == 1);
}

TEST_CASE("experiment config: validation errors") {
  const std::string base = kSynthetic;
  CHECK_THROWS_AS(experiment("[experiment]\nname = \"x\"\n"), ValidationError);
  CHECK_THROWS_AS(experiment("version = 2\n[synthetic]\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[experiment.extra]\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[bogus]\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[fairness]\neps = [0.1, 0.2]\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[fairness]\neps = [1.5]\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[fairness]\ngroup_by = \"age\"\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[fairness]\nrates = [\"missing.csv\"]\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[attacks]\nlist = [\"m9\"]\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[attacks]\nfpr_target = 0\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[method.a]\nfail_rate = 1.5\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[method.a]\nkind = \"blur\"\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[method.a]\ntypo = 1\n"), ValidationError);
  CHECK_THROWS_AS(experiment(base + "[method.a.noise]\n\"White Male\" = 1\n"), ValidationError);
  CHECK_THROWS_AS(experiment("version = 1\n[synthetic]\ngroups = [\"Green Male\"]\n"), ValidationError);
  CHECK_THROWS_AS(experiment("version = 1\n[experiment]\nstages = [\"train\"]\n[synthetic]\n"), ValidationError);
  CHECK_THROWS_AS(experiment("version = 1\n[dataset]\nmanifest = \"nope.csv\"\n"), ValidationError);
  CHECK_THROWS_AS(experiment("version = 1\n"), ValidationError);
}

TEST_CASE("experiment config: fairness-only with relative rate paths") {
  TempDir dir("cfg");
  write_file(dir / "rates.csv", "metric,demographic,rate,count\nosr,A,0.5,1\nosr,B,1,1\n");
  write_file(dir / "exp.toml", "version = 1\n[experiment]\nstages = [\"bias\"]\n[fairness]\nrates = [\"rates.csv\"]\n");
  const ExperimentConfig cfg = load_experiment(dir / "exp.toml");
  REQUIRE(cfg.rate_files.size() == 1);
  CHECK(cfg.rate_files[0] == (dir / "rates.csv").lexically_normal());
  CHECK(cfg.stages == std::set<Stage>{Stage::kBias});
  CHECK(cfg.output_dir == (dir / "out").lexically_normal());
}
