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

// Ingestion of everything produced by neural upstreams: identity embeddings,
// detector outcomes, verification confidences, attribute predictions,
// landmarks and saliency heatmaps. Every loader enforces its type invariants
// and reports the offending line.

#ifndef DEFACE_SCORE_IO_HPP_
#define DEFACE_SCORE_IO_HPP_

#include <Eigen/Dense>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "deface/regions.hpp"

namespace deface {

class Dataset;

/// image_id -> identity vector from an external recognizer.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  EmbeddingTable(std::string model_tag, Eigen::Index dim) : model_tag_(std::move(model_tag)), dim_(dim) {}

  /// Throws IntegrityError on dimension mismatch, non-finite component or
  /// duplicate id. The first insert fixes `dim` when it was 0.
  void insert(const std::string& image_id, Eigen::VectorXd vector);

  /// Throws IntegrityError when the id has no embedding.
  const Eigen::VectorXd& at(const std::string& image_id) const;
  const Eigen::VectorXd* find(const std::string& image_id) const;
  bool contains(const std::string& image_id) const { return entries_.count(image_id) != 0; }

  const std::string& model_tag() const noexcept { return model_tag_; }
  Eigen::Index dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const std::map<std::string, Eigen::VectorXd>& entries() const noexcept { return entries_; }

  bool operator==(const EmbeddingTable& other) const;

 private:
  std::string model_tag_;
  Eigen::Index dim_ = 0;
  std::map<std::string, Eigen::VectorXd> entries_;
};

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source, std::string model_tag);
/// `model_tag` defaults to the file stem.
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::string model_tag = {});
void write_embeddings(std::ostream& out, const EmbeddingTable& table);
void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table);

/// image_id -> whether the detector found at least one face.
struct DetectionTable {
  std::string detector_tag;
  std::map<std::string, bool> entries;
};

DetectionTable parse_detections(std::istream& in, const std::string& source, std::string detector_tag);
DetectionTable load_detections(const std::filesystem::path& path, std::string detector_tag = {});
/// Throws IntegrityError when a key is not an image of `dataset`.
void check_keys(const DetectionTable& table, const Dataset& dataset);

/// One verification confidence from a scoring service, in percent.
struct ConfidencePair {
  std::string probe_id;
  std::string gallery_id;
  double confidence = 0.0;

  bool operator==(const ConfidencePair&) const = default;
};

std::vector<ConfidencePair> parse_confidences(std::istream& in, const std::string& source);
std::vector<ConfidencePair> load_confidences(const std::filesystem::path& path);

/// Attribute predictions for one image. Absent fields were left empty in
/// the source file.
struct AttributeRecord {
  std::optional<std::string> gender;
  std::optional<std::string> race;
  std::optional<std::string> emotion;
  std::optional<double> age;
  /// (yaw, pitch, roll) in degrees.
  std::optional<Eigen::Vector3d> pose;

  bool operator==(const AttributeRecord&) const = default;
};

struct AttributeTable {
  std::map<std::string, AttributeRecord> entries;
};

/// Canonical emotion / race spelling, or nullopt outside the vocabulary.
/// Matching ignores case, spaces, '_' and '-'.
std::optional<std::string> canonical_emotion(std::string_view text);
std::optional<std::string> canonical_attribute_race(std::string_view text);

AttributeTable parse_attributes(std::istream& in, const std::string& source);
AttributeTable load_attributes(const std::filesystem::path& path);
void write_attributes(std::ostream& out, const AttributeTable& table);

/// Saliency heatmap with values in [0, 1], row-major.
struct Heatmap {
  using Grid = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Grid values;

  Eigen::Index height() const noexcept { return values.rows(); }
  Eigen::Index width() const noexcept { return values.cols(); }
};

/// Throws IntegrityError unless nonempty and every value is in [0, 1].
void validate(const Heatmap& heatmap);

/// Binary layout: "HMAP", u32 height, u32 width, u32 reserved (0), then
/// height*width little-endian float32 values, row-major.
Heatmap read_heatmap(std::istream& in, const std::string& source);
Heatmap load_heatmap(const std::filesystem::path& path);
void write_heatmap(std::ostream& out, const Heatmap& heatmap);
void save_heatmap(const std::filesystem::path& path, const Heatmap& heatmap);

/// Loads every `<image_id>.hmap` in `dir`.
std::map<std::string, Heatmap> load_heatmap_dir(const std::filesystem::path& dir);

/// 468 normalized face-mesh landmarks for one image; row i is (x, y).
struct LandmarkSet {
  std::string image_id;
  Eigen::Matrix<double, Eigen::Dynamic, 2> points;
};

/// Rows `image_id,idx,x,y`; each image needs exactly indices 0..467 once,
/// with coordinates in [0, 1].
std::map<std::string, LandmarkSet> parse_landmarks(std::istream& in, const std::string& source);
std::map<std::string, LandmarkSet> load_landmarks(const std::filesystem::path& path);
void write_landmarks(std::ostream& out, const std::map<std::string, LandmarkSet>& sets);

}  // namespace deface

#endif  // DEFACE_SCORE_IO_HPP_
