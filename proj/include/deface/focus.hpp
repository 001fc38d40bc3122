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

// Saliency heatmaps reduced to per-region focus scores.

#ifndef DEFACE_FOCUS_HPP_
#define DEFACE_FOCUS_HPP_

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "deface/data_model.hpp"
#include "deface/error.hpp"
#include "deface/regions.hpp"
#include "deface/score_io.hpp"

namespace deface {

using RegionScores = Eigen::Matrix<double, kNumRegions, 1>;

/// Mean sampled saliency per region, indexed in Region enum order.
struct FocusVector {
  std::string image_id;
  RegionScores scores = RegionScores::Zero();
};

struct FocusRecord {
  std::string image_id;
  DemographicKey demographic;
  Region top_feature = Region::kForehead;
  /// Descending by score, ties by ascending region name; scores divided by the max.
  std::array<std::pair<Region, double>, 5> top5{};
};

/// Bilinear read at continuous pixel coordinates (clamped to the grid).
double sample_bilinear(const Heatmap::Grid& values, double px, double py);

/// Each landmark is read at (x (W-1), y (H-1)); a region's score is the
/// mean over its landmarks.
FocusVector sample_focus(const Heatmap& heatmap, const LandmarkSet& landmarks,
                         const RegionMap& map = default_region_map());

FocusRecord focus_record(const FocusVector& fv, const DemographicKey& demographic);

/// (group label, region) -> number of records whose top feature is that region.
std::map<std::pair<std::string, Region>, std::size_t> focus_distribution(
    const std::vector<FocusRecord>& records, GroupBy by);

/// Sample Pearson coefficient. Throws InvalidArgument on length mismatch,
/// fewer than two entries, or zero variance.
template <typename DerivedA, typename DerivedB>
double pearson(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
  if (u.size() != v.size()) throw InvalidArgument("pearson: length mismatch");
  if (u.size() < 2) throw InvalidArgument("pearson: need at least two entries");
  const auto du = (u.template cast<double>().array() - u.template cast<double>().mean()).eval();
  const auto dv = (v.template cast<double>().array() - v.template cast<double>().mean()).eval();
  const double su = du.square().sum();
  const double sv = dv.square().sum();
  if (!(su > 0.0) || !(sv > 0.0)) throw InvalidArgument("pearson: zero variance");
  const double r = (du * dv).sum() / std::sqrt(su * sv);
  return std::clamp(r, -1.0, 1.0);
}

struct GroupCorrelation {
  std::string group;
  double mean_r = 0.0;
  std::size_t n = 0;
  /// Images left out because one of their vectors is constant.
  std::size_t skipped = 0;
};

/// Per-image Pearson between obfuscation and recognition focus vectors,
/// averaged per group. Throws IntegrityError when the id sets differ or an
/// id is not in the dataset. Groups whose images are all skipped get no row.
std::vector<GroupCorrelation> focus_correlation(const std::map<std::string, FocusVector>& obf,
                                                const std::map<std::string, FocusVector>& rec,
                                                const Dataset& dataset, GroupBy by = GroupBy::kPair);

/// Samples every heatmap that has landmarks. Throws IntegrityError for a
/// heatmap without landmarks.
std::map<std::string, FocusVector> sample_all(const std::map<std::string, Heatmap>& heatmaps,
                                              const std::map<std::string, LandmarkSet>& landmarks,
                                              unsigned workers = 1,
                                              const RegionMap& map = default_region_map());

}  // namespace deface

#endif  // DEFACE_FOCUS_HPP_
