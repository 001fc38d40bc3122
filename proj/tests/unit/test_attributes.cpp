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

#include <algorithm>

#include "deface/attributes.hpp"
#include "deface/error.hpp"
#include "deface/random.hpp"
#include "test_support.hpp"

using namespace deface;
using deface::testing::key;

using Cat = std::pair<std::string, std::string>;
using Num = std::pair<double, double>;
using Pose = std::pair<Eigen::Vector3d, Eigen::Vector3d>;

TEST_CASE("categorical_pr examples") {
  CHECK(categorical_pr({{"happy", "happy"}, {"sad", "neutral"}}) == 0.5);
  CHECK(categorical_pr({{"a", "a"}, {"b", "b"}}) == 1.0);
  std::vector<Cat> gender;
  for (int i = 0; i < 100; ++i) gender.emplace_back("Male", i < 84 ? "Male" : "Female");
  CHECK(categorical_pr(gender) == doctest::Approx(0.84));
  CHECK_THROWS_AS(categorical_pr({}), InvalidArgument);
}

TEST_CASE("categorical_pr is order invariant") {
  Rng rng(1);
  std::vector<Cat> pairs;
  for (int i = 0; i < 50; ++i) pairs.emplace_back(std::to_string(rng.below(3)), std::to_string(rng.below(3)));
  const double pr = categorical_pr(pairs);
  for (int t = 0; t < 10; ++t) {
    for (std::size_t i = pairs.size() - 1; i > 0; --i) std::swap(pairs[i], pairs[rng.below(i + 1)]);
    CHECK(categorical_pr(pairs) == pr);
  }
}

TEST_CASE("numerical_pr examples") {
  CHECK(numerical_pr({{20, 25}}) == doctest::Approx(0.8));
  CHECK(numerical_pr({{33, 33}}) == 1.0);
  CHECK(numerical_pr({{0, 50}}) == 0.0);
  CHECK(numerical_pr({{0, 0}}) == 1.0);
  CHECK(numerical_pr({{20, 25}, {0, 50}}) == doctest::Approx(0.4));
  CHECK_THROWS_AS(numerical_pr({{-1, 5}}), InvalidArgument);
  CHECK_THROWS_AS(numerical_pr({}), InvalidArgument);
}

TEST_CASE("numerical_pr is scale invariant and bounded") {
  Rng rng(2);
  for (int t = 0; t < 200; ++t) {
    std::vector<Num> pairs, scaled;
    const double c = 0.01 + 100 * rng.uniform();
    for (int i = 0; i < 10; ++i) {
      const double a = rng.below(6) == 0 ? 0.0 : 100 * rng.uniform();
      const double b = 100 * rng.uniform();
      pairs.emplace_back(a, b);
      scaled.emplace_back(c * a, c * b);
    }
    const double pr = numerical_pr(pairs);
    CHECK(pr >= 0.0);
    CHECK(pr <= 1.0);
    CHECK(numerical_pr(scaled) == doctest::Approx(pr).epsilon(1e-12));
  }
}

TEST_CASE("pose_pr examples") {
  const Eigen::Vector3d p(10, -5, 3);
  CHECK(pose_pr({{p, p}}) == doctest::Approx(1.0));
  CHECK(pose_pr({{Eigen::Vector3d(1, 0, 0), Eigen::Vector3d(0, 2, 0)}}) == doctest::Approx(0.0));
  CHECK(pose_pr({{p, -p}}) == 0.0);
  CHECK(pose_pr({{p, p}, {p, -p}}) == doctest::Approx(0.5));
  CHECK_THROWS_AS(pose_pr({{p, Eigen::Vector3d::Zero()}}), InvalidArgument);
  CHECK_THROWS_AS(pose_pr({}), InvalidArgument);
}

TEST_CASE("pose_pr stays in [0, 1]") {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    std::vector<Pose> pairs;
    for (int i = 0; i < 5; ++i)
      pairs.emplace_back(Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()),
                         Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal()));
    const double pr = pose_pr(pairs);
    CHECK(pr >= 0.0);
    CHECK(pr <= 1.0);
  }
}

TEST_CASE("attribute_rates per group feed the bias engine") {
  const Dataset ds =
      deface::testing::small_dataset({key(Gender::kMale, Race::kWhite), key(Gender::kFemale, Race::kBlack)}, 2, 2);
  AttributeTable orig, obf;
  for (const auto& r : ds.records()) {
    const bool g0 = r.demographic.gender == Gender::kMale;
    orig.entries[r.image_id] = {"Male", "White", "happy", 40.0, Eigen::Vector3d(1, 0, 0)};
    obf.entries[r.image_id] = {g0 ? "Male" : "Female", "White", std::nullopt, g0 ? 40.0 : 20.0,
                               Eigen::Vector3d(1, 0, 0)};
  }
  obf.entries["stray"] = {};
  const auto tables = attribute_rates(ds, orig, obf, GroupBy::kPair);
  std::vector<std::string> metrics;
  for (const auto& t : tables) metrics.push_back(t.metric_name);
  CHECK(metrics == std::vector<std::string>{"gender", "race", "age", "pose"});  // no emotion pairs
  const auto& gender = tables[0];
  REQUIRE(gender.entries.size() == 2);
  CHECK(gender.entries[0].demographic == group_label(key(Gender::kMale, Race::kWhite), GroupBy::kPair));
  CHECK(gender.entries[0].rate == 1.0);
  CHECK(gender.entries[1].rate == 0.0);
  CHECK(gender.entries[0].count == 4);
  CHECK(tables[2].entries[1].rate == doctest::Approx(0.5));
  for (const auto& t : tables) CHECK_NOTHROW(t.validate());
  CHECK_NOTHROW(bias_table(gender));
  CHECK(bias_table(gender).ab == std::vector<double>{100, 100, 100, 100, 100});
}

TEST_CASE("detection and passing rates per group") {
  const Dataset ds =
      deface::testing::small_dataset({key(Gender::kMale, Race::kWhite), key(Gender::kFemale, Race::kBlack)}, 2, 2);
  DetectionTable det{"mtcnn", {}};
  std::set<std::string> produced;
  for (const auto& r : ds.records()) {
    const bool g0 = r.demographic.gender == Gender::kMale;
    det.entries[r.image_id] = g0 || r.image_id.back() == '0';
    if (g0 || r.identity_id.back() == '0') produced.insert(r.image_id);
  }
  const RateTable d = detection_rates(ds, det, GroupBy::kPair);
  CHECK(d.metric_name == "detection");
  REQUIRE(d.entries.size() == 2);
  CHECK(d.entries[0].rate == 1.0);
  CHECK(d.entries[1].rate == 0.5);
  const RateTable p = passing_rates(ds, make_run(ds, "m", produced), GroupBy::kGender);
  CHECK(p.metric_name == "passing");
  REQUIRE(p.entries.size() == 2);
  std::map<std::string, double> by_label;
  for (const auto& e : p.entries) by_label[e.demographic] = e.rate;
  CHECK(by_label.at("Male") == 1.0);
  CHECK(by_label.at("Female") == 0.5);
  det.entries["unknown"] = true;
  CHECK_THROWS_AS(detection_rates(ds, det, GroupBy::kPair), IntegrityError);
}
