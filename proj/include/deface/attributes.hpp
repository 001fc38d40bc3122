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

// Preserving rates between attribute predictions on original and
// obfuscated faces, plus the per-group quality rates (passing, detection)
// that feed the bias engine.

#ifndef DEFACE_ATTRIBUTES_HPP_
#define DEFACE_ATTRIBUTES_HPP_

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "deface/data_model.hpp"
#include "deface/fairness.hpp"
#include "deface/score_io.hpp"

namespace deface {

/// Share of exactly matching pairs. Throws InvalidArgument when empty.
double categorical_pr(const std::vector<std::pair<std::string, std::string>>& pairs);

/// 1 - mean(|obf - orig| / max(obf, orig)); a (0, 0) pair contributes 0.
/// Throws InvalidArgument when empty or on a negative value.
double numerical_pr(const std::vector<std::pair<double, double>>& pairs);

/// Mean of max(0, cos(orig, obf)). Throws InvalidArgument when empty or on
/// a zero pose vector.
double pose_pr(const std::vector<std::pair<Eigen::Vector3d, Eigen::Vector3d>>& pairs);

/// Preserving-rate tables ("gender", "race", "emotion", "age", "pose") per
/// demographic group. Only images carrying the attribute in both tables
/// count; groups without any such pair are left out, as are attributes
/// with no pairs at all.
std::vector<RateTable> attribute_rates(const Dataset& dataset, const AttributeTable& original,
                                       const AttributeTable& obfuscated, GroupBy by);

/// Detection rate per group over the images present in `detections`.
RateTable detection_rates(const Dataset& dataset, const DetectionTable& detections, GroupBy by);

/// Passing rate per group.
RateTable passing_rates(const Dataset& dataset, const ObfuscationRun& run, GroupBy by);

}  // namespace deface

#endif  // DEFACE_ATTRIBUTES_HPP_
