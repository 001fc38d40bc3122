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

// Experiment configuration and the staged runner.
//
// Stages run in the order obfuscate, ingest, attacks, metrics, bias, focus.
// A stage that fails for one method is recorded in the bundle and only the
// work depending on it is skipped.

#ifndef DEFACE_EXPERIMENT_HPP_
#define DEFACE_EXPERIMENT_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deface/config_text.hpp"
#include "deface/data_model.hpp"
#include "deface/identification.hpp"
#include "deface/report.hpp"
#include "deface/verification.hpp"

namespace deface {

enum class Stage : std::uint8_t { kObfuscate, kIngest, kAttacks, kMetrics, kBias, kFocus };
std::string_view to_string(Stage s);
std::optional<Stage> parse_stage(std::string_view text);

/// Attack names: "baseline", "m1" .. "m6".
const std::vector<std::string>& attack_names();

/// Synthetic stand-ins for one method's outputs.
struct SynthMethod {
  /// Expected norm of the embedding displacement.
  double strength = 0.5;
  /// Per-group multiplier on `strength`.
  std::map<DemographicKey, double> noise_scale;
  /// Chance an image fails to be produced.
  double fail_rate = 0.0;
  /// Chance a produced image is detected as a face.
  double detect_rate = 1.0;
  /// Chance each categorical attribute flips.
  double attr_flip = 0.1;
  /// Share of the obfuscation heatmap taken from the recognition heatmap.
  double focus_overlap = 0.5;
};

struct MethodConfig {
  std::string name;
  /// Pixel obfuscator: "pixelate", "dpsnow" or "ksame".
  std::optional<std::string> kind;
  int block = 0;  // 0 means the standard 224 / 16 pipeline
  double delta = 0.5;
  int gray = 128;
  int k = 5;
  std::optional<std::filesystem::path> produced;  // manifest of produced images
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> detections;
  std::optional<std::filesystem::path> attributes;
  std::optional<std::filesystem::path> confidences;
  std::optional<std::filesystem::path> heatmaps;
  std::optional<std::filesystem::path> compare_heatmaps;
  SynthMethod synth;
};

struct SynthConfig {
  SynthSpec spec;
  bool attributes = true;
  bool focus = true;
  int heatmap_side = 32;
};

struct ExperimentConfig {
  int version = 1;
  std::string name = "experiment";
  std::filesystem::path output_dir = "out";
  std::uint64_t seed = 42;
  std::set<Stage> stages;

  std::optional<SynthConfig> synthetic;
  std::optional<std::filesystem::path> manifest;
  std::optional<std::filesystem::path> embeddings;
  std::optional<std::filesystem::path> attributes;
  std::optional<std::filesystem::path> landmarks;

  std::vector<MethodConfig> methods;
  std::vector<std::string> attacks;
  int negatives_per_positive = kDefaultNegativesPerPositive;
  double fpr_target = 0.1;
  SvmHyper svm;
  double train_fraction = 0.8;

  std::vector<double> eps_grid = kDefaultEpsGrid;
  GroupBy group_by = GroupBy::kPair;
  std::vector<std::filesystem::path> rate_files;
};

/// Reads and validates a config. Relative paths resolve against
/// `base_dir`. Throws ValidationError (or ParseError) on unknown keys, bad
/// values, or referenced files that do not exist.
ExperimentConfig parse_experiment(const ConfigDocument& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_experiment(const std::filesystem::path& path);

/// Cross-field checks, also run by the parsers.
void validate(const ExperimentConfig& config);

struct RunOptions {
  unsigned workers = 1;
  /// When set, obfuscated images and intermediate tables are written here.
  bool write_artifacts = true;
};

/// Pure in (config, seed); the worker count never changes the result.
ReportBundle run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Landmarks drawn uniformly in the unit square, one set per image.
std::map<std::string, LandmarkSet> synth_landmarks(const Dataset& dataset, std::uint64_t seed);

/// Heatmap peaking at every landmark of `region`: each pixel holds
/// exp(-d^2 / 2) for d the pixel distance to the nearest such landmark.
Heatmap planted_heatmap(const LandmarkSet& landmarks, Region region, int side,
                        const RegionMap& map = default_region_map());

}  // namespace deface

#endif  // DEFACE_EXPERIMENT_HPP_
