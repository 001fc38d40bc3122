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

#include "deface/focus.hpp"

#include <numeric>
#include <tuple>

#include "deface/parallel.hpp"

namespace deface {

double sample_bilinear(const Heatmap::Grid& values, double px, double py) {
  const Eigen::Index h = values.rows();
  const Eigen::Index w = values.cols();
  if (h == 0 || w == 0) throw InvalidArgument("empty heatmap");
  px = std::clamp(px, 0.0, double(w - 1));
  py = std::clamp(py, 0.0, double(h - 1));
  const auto x0 = Eigen::Index(std::floor(px));
  const auto y0 = Eigen::Index(std::floor(py));
  const Eigen::Index x1 = std::min(x0 + 1, w - 1);
  const Eigen::Index y1 = std::min(y0 + 1, h - 1);
  const double fx = px - double(x0);
  const double fy = py - double(y0);
  const double top = (1.0 - fx) * values(y0, x0) + fx * values(y0, x1);
  const double bottom = (1.0 - fx) * values(y1, x0) + fx * values(y1, x1);
  return (1.0 - fy) * top + fy * bottom;
}

FocusVector sample_focus(const Heatmap& heatmap, const LandmarkSet& landmarks, const RegionMap& map) {
  validate(heatmap);
  if (landmarks.points.rows() != Eigen::Index(kNumLandmarks))
    throw InvalidArgument("landmark set for " + landmarks.image_id + " needs " + std::to_string(kNumLandmarks) +
                          " points");
  const double sx = double(heatmap.values.cols() - 1);
  const double sy = double(heatmap.values.rows() - 1);
  FocusVector fv{landmarks.image_id, RegionScores::Zero()};
  for (std::size_t i = 0; i < kNumLandmarks; ++i) {
    const auto row = Eigen::Index(i);
    fv.scores(index_of(map.region_of(i))) +=
        sample_bilinear(heatmap.values, landmarks.points(row, 0) * sx, landmarks.points(row, 1) * sy);
  }
  for (const Region r : all_regions()) fv.scores(index_of(r)) /= double(map.landmark_count(r));
  fv.scores = fv.scores.cwiseMax(0.0).cwiseMin(1.0);
  return fv;
}

FocusRecord focus_record(const FocusVector& fv, const DemographicKey& demographic) {
  std::array<std::size_t, kNumRegions> order{};
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto regions = all_regions();
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (fv.scores(a) != fv.scores(b)) return fv.scores(a) > fv.scores(b);
    return to_string(regions[a]) < to_string(regions[b]);
  });
  const double top = fv.scores(order[0]);
  FocusRecord rec{fv.image_id, demographic, regions[order[0]], {}};
  for (std::size_t k = 0; k < rec.top5.size(); ++k)
    rec.top5[k] = {regions[order[k]], top > 0.0 ? fv.scores(order[k]) / top : 0.0};
  return rec;
}

std::map<std::pair<std::string, Region>, std::size_t> focus_distribution(const std::vector<FocusRecord>& records,
                                                                         GroupBy by) {
  if (records.empty()) throw InvalidArgument("focus distribution of no records");
  std::map<std::pair<std::string, Region>, std::size_t> counts;
  for (const auto& r : records) ++counts[{group_label(r.demographic, by), r.top_feature}];
  return counts;
}

std::vector<GroupCorrelation> focus_correlation(const std::map<std::string, FocusVector>& obf,
                                                const std::map<std::string, FocusVector>& rec,
                                                const Dataset& dataset, GroupBy by) {
  if (obf.size() != rec.size()) throw IntegrityError("focus correlation: image id sets differ");
  std::map<std::string, GroupCorrelation> acc;
  std::map<std::string, double> sums;
  for (const auto& [id, a] : obf) {
    auto it = rec.find(id);
    if (it == rec.end()) throw IntegrityError("focus correlation: " + id + " has no recognition vector");
    if (!dataset.contains(id)) throw IntegrityError("focus correlation: " + id + " is not in the dataset");
    const std::string label = group_label(dataset.record(id).demographic, by);
    GroupCorrelation& g = acc[label];
    g.group = label;
    const auto constant = [](const RegionScores& s) { return s.maxCoeff() == s.minCoeff(); };
    if (constant(a.scores) || constant(it->second.scores)) {
      ++g.skipped;
      continue;
    }
    sums[label] += pearson(a.scores, it->second.scores);
    ++g.n;
  }
  std::vector<GroupCorrelation> out;
  for (const auto& label : dataset.group_labels(by)) {
    auto it = acc.find(label);
    if (it == acc.end() || it->second.n == 0) continue;
    it->second.mean_r = sums[label] / double(it->second.n);
    out.push_back(it->second);
  }
  return out;
}

std::map<std::string, FocusVector> sample_all(const std::map<std::string, Heatmap>& heatmaps,
                                              const std::map<std::string, LandmarkSet>& landmarks, unsigned workers,
                                              const RegionMap& map) {
  std::vector<std::tuple<const std::string*, const Heatmap*, const LandmarkSet*>> jobs;
  for (const auto& [id, hm] : heatmaps) {
    auto it = landmarks.find(id);
    if (it == landmarks.end()) throw IntegrityError("no landmarks for heatmap " + id);
    jobs.emplace_back(&id, &hm, &it->second);
  }
  std::vector<FocusVector> results(jobs.size());
  parallel_for(jobs.size(), workers, [&](std::size_t i) {
    const auto& [id, hm, lm] = jobs[i];
    results[i] = sample_focus(*hm, *lm, map);
    results[i].image_id = *id;
  });
  std::map<std::string, FocusVector> out;
  for (auto& fv : results) out.emplace(fv.image_id, std::move(fv));
  return out;
}

}  // namespace deface
