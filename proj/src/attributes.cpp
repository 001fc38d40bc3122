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

#include "deface/attributes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "deface/error.hpp"
#include "deface/similarity.hpp"

namespace deface {

double categorical_pr(const std::vector<std::pair<std::string, std::string>>& pairs) {
  if (pairs.empty()) throw InvalidArgument("categorical preserving rate of no pairs");
  const auto same = std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.first == p.second; });
  return double(same) / double(pairs.size());
}

double numerical_pr(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.empty()) throw InvalidArgument("numerical preserving rate of no pairs");
  double total = 0.0;
  for (const auto& [orig, obf] : pairs) {
    if (!(orig >= 0.0) || !(obf >= 0.0)) throw InvalidArgument("numerical attributes must be >= 0");
    const double hi = std::max(orig, obf);
    if (hi > 0.0) total += std::abs(obf - orig) / hi;
  }
  return 1.0 - total / double(pairs.size());
}

double pose_pr(const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& pairs) {
  if (pairs.empty()) throw InvalidArgument("pose preserving rate of no pairs");
  double total = 0.0;
  for (const auto& [orig, obf] : pairs) total += std::max(0.0, cosine_similarity(orig, obf));
  return std::clamp(total / double(pairs.size()), 0.0, 1.0);
}

namespace {

// Buckets per-image values by group label, then reduces each bucket in the
// dataset's group order.
template <typename T>
using Buckets = std::map<std::string, std::vector<T>>;

template <typename T>
void append_table(std::vector<RateTable>& out, const Dataset& dataset, GroupBy by, const std::string& metric,
                  const Buckets<T>& buckets, const std::function<double(const std::vector<T>&)>& reduce) {
  if (buckets.empty()) return;
  RateTable t{metric, {}};
  for (const auto& label : dataset.group_labels(by)) {
    auto it = buckets.find(label);
    if (it == buckets.end()) continue;
    t.entries.push_back({label, reduce(it->second), it->second.size()});
  }
  out.push_back(std::move(t));
}

}  // namespace

std::vector<RateTable> attribute_rates(const Dataset& dataset, const AttributeTable& original,
                                       const AttributeTable& obfuscated, GroupBy by) {
  using Cat = std::pair<std::string, std::string>;
  Buckets<Cat> gender, race, emotion;
  Buckets<std::pair<double, double>> age;
  Buckets<std::pair<Eigen::Vector3d, Eigen::Vector3d>> pose;
  for (const auto& [id, a] : original.entries) {
    auto it = obfuscated.entries.find(id);
    if (it == obfuscated.entries.end() || !dataset.contains(id)) continue;
    const AttributeRecord& b = it->second;
    const std::string label = group_label(dataset.record(id).demographic, by);
    if (a.gender && b.gender) gender[label].emplace_back(*a.gender, *b.gender);
    if (a.race && b.race) race[label].emplace_back(*a.race, *b.race);
    if (a.emotion && b.emotion) emotion[label].emplace_back(*a.emotion, *b.emotion);
    if (a.age && b.age) age[label].emplace_back(*a.age, *b.age);
    if (a.pose && b.pose) pose[label].emplace_back(*a.pose, *b.pose);
  }
  std::vector<RateTable> out;
  append_table<Cat>(out, dataset, by, "gender", gender, categorical_pr);
  append_table<Cat>(out, dataset, by, "race", race, categorical_pr);
  append_table<Cat>(out, dataset, by, "emotion", emotion, categorical_pr);
  append_table<std::pair<double, double>>(out, dataset, by, "age", age, numerical_pr);
  append_table<std::pair<Eigen::Vector3d, Eigen::Vector3d>>(out, dataset, by, "pose", pose, pose_pr);
  return out;
}

RateTable detection_rates(const Dataset& dataset, const DetectionTable& detections, GroupBy by) {
  check_keys(detections, dataset);
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // found, total
  for (const auto& [id, found] : detections.entries) {
    auto& c = counts[group_label(dataset.record(id).demographic, by)];
    c.first += found;
    ++c.second;
  }
  RateTable t{"detection", {}};
  for (const auto& label : dataset.group_labels(by)) {
    auto it = counts.find(label);
    if (it == counts.end()) continue;
    t.entries.push_back({label, double(it->second.first) / double(it->second.second), it->second.second});
  }
  return t;
}

RateTable passing_rates(const Dataset& dataset, const ObfuscationRun& run, GroupBy by) {
  check_run(run, dataset);
  std::map<std::string, ObfuscationRun> per_group;
  for (const auto& id : run.produced) per_group[group_label(dataset.record(id).demographic, by)].produced.insert(id);
  for (const auto& id : run.failed) per_group[group_label(dataset.record(id).demographic, by)].failed.insert(id);
  RateTable t{"passing", {}};
  for (const auto& label : dataset.group_labels(by)) {
    auto it = per_group.find(label);
    if (it == per_group.end()) continue;
    t.entries.push_back({label, passing_rate(it->second), it->second.produced.size() + it->second.failed.size()});
  }
  return t;
}

}  // namespace deface
