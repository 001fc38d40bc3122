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

#ifndef DEFACE_DATA_MODEL_HPP_
#define DEFACE_DATA_MODEL_HPP_

#include <compare>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "deface/score_io.hpp"

namespace deface {

enum class Gender : std::uint8_t { kFemale, kMale };
enum class Race : std::uint8_t { kWhite, kBlack, kAsian, kIndian, kUnspecified };

std::string_view to_string(Gender g);
/// "" for kUnspecified.
std::string_view to_string(Race r);
std::optional<Gender> parse_gender(std::string_view text);
/// Empty text parses as kUnspecified.
std::optional<Race> parse_race(std::string_view text);

struct DemographicKey {
  Gender gender = Gender::kFemale;
  Race race = Race::kUnspecified;

  bool paired() const noexcept { return race != Race::kUnspecified; }
  auto operator<=>(const DemographicKey&) const = default;
};

/// The eight gender-race groups in report order (White, Black, Asian,
/// Indian; Female before Male).
std::vector<DemographicKey> paired_groups();

/// Granularity at which rates are aggregated.
enum class GroupBy : std::uint8_t { kPair, kRace, kGender };

std::string_view to_string(GroupBy g);
std::optional<GroupBy> parse_group_by(std::string_view text);

/// "White Female" for pairs, "White" / "Female" for the marginals. Pair
/// grouping of a gender-only key yields the gender label.
std::string group_label(const DemographicKey& key, GroupBy by);

struct FaceRecord {
  std::string image_id;
  std::string identity_id;
  DemographicKey demographic;
  std::optional<std::string> image_path;

  bool operator==(const FaceRecord&) const = default;
};

/// Identity- and demographic-labelled image inventory. Immutable once built.
class Dataset {
 public:
  /// Validates and indexes `records`. Throws IntegrityError on an empty
  /// record list, duplicate image ids, an identity with two demographics, or
  /// a mix of gender-only and paired demographics.
  static Dataset create(std::string name, std::vector<FaceRecord> records);

  const std::string& name() const noexcept { return name_; }
  const std::vector<FaceRecord>& records() const noexcept { return records_; }
  std::size_t size() const noexcept { return records_.size(); }

  bool contains(const std::string& image_id) const { return by_image_.count(image_id) != 0; }
  /// Throws IntegrityError for unknown ids.
  const FaceRecord& record(const std::string& image_id) const;

  /// Sorted identity ids.
  const std::vector<std::string>& identities() const noexcept { return identities_; }
  const DemographicKey& demographic_of(const std::string& identity_id) const;
  /// Image ids of one identity, sorted.
  const std::vector<std::string>& images_of(const std::string& identity_id) const;

  /// True when every record carries a race (paired demographics).
  bool paired() const noexcept { return paired_; }
  /// Distinct group labels present at granularity `by`, in report order.
  std::vector<std::string> group_labels(GroupBy by) const;

  bool operator==(const Dataset& other) const {
    return name_ == other.name_ && records_ == other.records_;
  }

 private:
  Dataset() = default;

  std::string name_;
  std::vector<FaceRecord> records_;
  std::unordered_map<std::string, std::size_t> by_image_;
  std::vector<std::string> identities_;
  std::map<std::string, DemographicKey> identity_demo_;
  std::map<std::string, std::vector<std::string>> identity_images_;
  bool paired_ = true;
};

/// Manifest CSV: header `image_id,identity_id,gender,race,image_path`.
Dataset parse_manifest(std::istream& in, const std::string& source, std::string name);
/// The dataset name defaults to the file stem.
Dataset load_manifest(const std::filesystem::path& path, std::string name = {});
void write_manifest(std::ostream& out, const Dataset& dataset);
void save_manifest(const std::filesystem::path& path, const Dataset& dataset);

/// Outcome of running one obfuscator over a source dataset.
struct ObfuscationRun {
  std::string method;
  std::string source_dataset;
  std::set<std::string> produced;
  std::set<std::string> failed;
};

/// Builds a run whose `failed` set is every dataset image not in `produced`.
/// Throws IntegrityError if `produced` names an unknown image.
ObfuscationRun make_run(const Dataset& dataset, std::string method, std::set<std::string> produced);

/// Throws IntegrityError unless produced and failed partition the dataset.
void check_run(const ObfuscationRun& run, const Dataset& dataset);

/// n_o / n. Throws InvalidArgument on an empty run.
double passing_rate(const ObfuscationRun& run);

/// Knobs of the seeded synthetic benchmark.
struct SynthSpec {
  std::string name = "synthetic";
  std::vector<DemographicKey> groups = paired_groups();
  int ids_per_group = 100;
  int imgs_per_id = 25;
  int dim = 512;
  double cluster_spread = 0.5;
  /// Multiplies `cluster_spread` for one group; missing groups use 1.
  std::map<DemographicKey, double> demographic_noise_scale;
};

struct SynthData {
  Dataset dataset;
  EmbeddingTable embeddings;
};

/// Identity centers are uniform on the unit sphere; each image adds
/// isotropic Gaussian noise whose expected norm is spread * group scale.
/// Pure in (spec, seed).
SynthData synth_dataset(const SynthSpec& spec, std::uint64_t seed);

/// Synthetic stand-in for an obfuscator's embedding output: every image of
/// `embeddings` is moved by isotropic noise of expected norm `strength`
/// (times the group scale). Keys are unchanged, so the obfuscated version
/// of image X is stored under X.
EmbeddingTable synth_obfuscation(const Dataset& dataset, const EmbeddingTable& embeddings,
                                 double strength,
                                 const std::map<DemographicKey, double>& demographic_scale,
                                 std::uint64_t seed, std::string model_tag = "obfuscated");

}  // namespace deface

#endif  // DEFACE_DATA_MODEL_HPP_
