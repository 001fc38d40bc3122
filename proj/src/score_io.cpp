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

#include "deface/score_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fmt/format.h>

#include "deface/csv.hpp"
#include "deface/data_model.hpp"
#include "deface/error.hpp"

namespace deface {

// ---------------------------------------------------------------------------
// Embeddings

void EmbeddingTable::insert(const std::string& image_id, Eigen::VectorXd vector) {
  if (image_id.empty()) throw IntegrityError("embedding with empty image_id");
  if (dim_ == 0) dim_ = vector.size();
  if (vector.size() != dim_) {
    throw IntegrityError(fmt::format("embedding `{}` has dim {}, table dim is {}", image_id,
                                     vector.size(), dim_));
  }
  if (!vector.allFinite()) throw IntegrityError("embedding `" + image_id + "` has a non-finite component");
  if (!entries_.emplace(image_id, std::move(vector)).second) {
    throw IntegrityError("duplicate embedding for `" + image_id + "`");
  }
}

const Eigen::VectorXd& EmbeddingTable::at(const std::string& image_id) const {
  auto it = entries_.find(image_id);
  if (it == entries_.end()) {
    throw IntegrityError("missing embedding for `" + image_id + "`" +
                         (model_tag_.empty() ? std::string() : " in " + model_tag_));
  }
  return it->second;
}

const Eigen::VectorXd* EmbeddingTable::find(const std::string& image_id) const {
  auto it = entries_.find(image_id);
  return it == entries_.end() ? nullptr : &it->second;
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const {
  if (dim_ != other.dim_ || entries_.size() != other.entries_.size()) return false;
  auto a = entries_.begin();
  auto b = other.entries_.begin();
  for (; a != entries_.end(); ++a, ++b) {
    if (a->first != b->first || a->second != b->second) return false;
  }
  return true;
}

EmbeddingTable parse_embeddings(std::istream& in, const std::string& source, std::string model_tag) {
  csv::Reader reader(in, source);
  auto header = reader.next();
  if (!header || header->empty() || (*header)[0] != "image_id" || header->size() < 2) {
    reader.fail("expected header `image_id,v0,v1,...`");
  }
  const Eigen::Index dim = static_cast<Eigen::Index>(header->size() - 1);
  EmbeddingTable table(std::move(model_tag), dim);
  while (auto row = reader.next()) {
    if (static_cast<Eigen::Index>(row->size()) != dim + 1) {
      reader.fail(fmt::format("expected {} components, got {}", dim, row->size() - 1));
    }
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const auto x = csv::parse_double((*row)[i + 1]);
      if (!x) reader.fail("not a number: `" + (*row)[i + 1] + "`");
      if (!std::isfinite(*x)) reader.fail("non-finite component in `" + (*row)[0] + "`");
      v[i] = *x;
    }
    try {
      table.insert((*row)[0], std::move(v));
    } catch (const IntegrityError& e) {
      reader.fail(e.what());
    }
  }
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::string model_tag) {
  auto in = csv::open_input(path);
  if (model_tag.empty()) model_tag = path.stem().string();
  return parse_embeddings(in, path.string(), std::move(model_tag));
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
  out << "image_id";
  for (Eigen::Index i = 0; i < table.dim(); ++i) out << ",v" << i;
  out << '\n';
  for (const auto& [id, v] : table.entries()) {
    out << csv::escape(id);
    for (Eigen::Index i = 0; i < v.size(); ++i) out << ',' << csv::format_double(v[i]);
    out << '\n';
  }
}

void save_embeddings(const std::filesystem::path& path, const EmbeddingTable& table) {
  auto out = csv::open_output(path);
  write_embeddings(out, table);
}

// ---------------------------------------------------------------------------
// Detections and confidences

DetectionTable parse_detections(std::istream& in, const std::string& source, std::string detector_tag) {
  csv::Reader reader(in, source);
  reader.expect_header({"image_id", "detected"});
  DetectionTable table{std::move(detector_tag), {}};
  while (auto row = reader.next()) {
    if (row->size() != 2) reader.fail("expected 2 fields");
    const auto& flag = (*row)[1];
    if (flag != "0" && flag != "1") reader.fail("detected must be 0 or 1, got `" + flag + "`");
    if ((*row)[0].empty()) reader.fail("empty image_id");
    if (!table.entries.emplace((*row)[0], flag == "1").second) {
      reader.fail("duplicate image_id `" + (*row)[0] + "`");
    }
  }
  return table;
}

DetectionTable load_detections(const std::filesystem::path& path, std::string detector_tag) {
  auto in = csv::open_input(path);
  if (detector_tag.empty()) detector_tag = path.stem().string();
  return parse_detections(in, path.string(), std::move(detector_tag));
}

void check_keys(const DetectionTable& table, const Dataset& dataset) {
  for (const auto& [id, found] : table.entries) {
    if (!dataset.contains(id)) {
      throw IntegrityError("detections name image `" + id + "` absent from dataset " + dataset.name());
    }
  }
}

std::vector<ConfidencePair> parse_confidences(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  std::vector<ConfidencePair> out;
  auto first = reader.next();
  if (!first) return out;
  if (*first != std::vector<std::string>{"probe_id", "gallery_id", "confidence"}) {
    reader.fail("expected header `probe_id,gallery_id,confidence`");
  }
  while (auto row = reader.next()) {
    if (row->size() != 3) reader.fail("expected 3 fields");
    const auto c = csv::parse_double((*row)[2]);
    if (!c) reader.fail("not a number: `" + (*row)[2] + "`");
    if (!(*c >= 0.0 && *c <= 100.0)) reader.fail("confidence outside [0, 100]: " + (*row)[2]);
    out.push_back({(*row)[0], (*row)[1], *c});
  }
  return out;
}

std::vector<ConfidencePair> load_confidences(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_confidences(in, path.string());
}

// ---------------------------------------------------------------------------
// Attributes

namespace {

std::string squash(std::string_view text) {
  std::string out;
  for (unsigned char c : text) {
    if (c == ' ' || c == '_' || c == '-') continue;
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

template <std::size_t N>
std::optional<std::string> lookup(std::string_view text, const std::array<std::string_view, N>& vocab) {
  const std::string key = squash(text);
  for (auto v : vocab) {
    if (squash(v) == key) return std::string(v);
  }
  return std::nullopt;
}

constexpr std::array<std::string_view, 7> kEmotions = {"angry", "disgust", "fear", "happy",
                                                       "sad",   "surprise", "neutral"};
constexpr std::array<std::string_view, 6> kAttributeRaces = {"Asian", "Indian", "Black",
                                                             "White", "MiddleEastern",
                                                             "LatinoHispanic"};

}  // namespace

std::optional<std::string> canonical_emotion(std::string_view text) { return lookup(text, kEmotions); }

std::optional<std::string> canonical_attribute_race(std::string_view text) {
  return lookup(text, kAttributeRaces);
}

AttributeTable parse_attributes(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header({"image_id", "gender", "race", "emotion", "age", "yaw", "pitch", "roll"});
  AttributeTable table;
  while (auto row = reader.next()) {
    const auto& f = *row;
    if (f.size() != 8) reader.fail(fmt::format("expected 8 fields, got {}", f.size()));
    if (f[0].empty()) reader.fail("empty image_id");
    AttributeRecord rec;
    if (!f[1].empty()) rec.gender = f[1];
    if (!f[2].empty()) {
      rec.race = canonical_attribute_race(f[2]);
      if (!rec.race) reader.fail("race outside vocabulary: `" + f[2] + "`");
    }
    if (!f[3].empty()) {
      rec.emotion = canonical_emotion(f[3]);
      if (!rec.emotion) reader.fail("emotion outside vocabulary: `" + f[3] + "`");
    }
    if (!f[4].empty()) {
      const auto age = csv::parse_double(f[4]);
      if (!age || !std::isfinite(*age)) reader.fail("age is not a finite number: `" + f[4] + "`");
      if (*age < 0.0 || *age > 100.0) reader.fail("age outside [0, 100]: " + f[4]);
      rec.age = *age;
    }
    const int pose_fields = !f[5].empty() + !f[6].empty() + !f[7].empty();
    if (pose_fields != 0 && pose_fields != 3) reader.fail("pose needs all of yaw, pitch, roll");
    if (pose_fields == 3) {
      Eigen::Vector3d pose;
      for (int i = 0; i < 3; ++i) {
        const auto a = csv::parse_double(f[5 + i]);
        if (!a || !std::isfinite(*a)) reader.fail("pose angle is not a finite number: `" + f[5 + i] + "`");
        pose[i] = *a;
      }
      rec.pose = pose;
    }
    if (!table.entries.emplace(f[0], std::move(rec)).second) {
      reader.fail("duplicate image_id `" + f[0] + "`");
    }
  }
  return table;
}

AttributeTable load_attributes(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_attributes(in, path.string());
}

void write_attributes(std::ostream& out, const AttributeTable& table) {
  out << "image_id,gender,race,emotion,age,yaw,pitch,roll\n";
  for (const auto& [id, rec] : table.entries) {
    std::vector<std::string> f{id, rec.gender.value_or(""), rec.race.value_or(""),
                               rec.emotion.value_or(""),
                               rec.age ? csv::format_double(*rec.age) : std::string()};
    for (int i = 0; i < 3; ++i) f.push_back(rec.pose ? csv::format_double((*rec.pose)[i]) : "");
    out << csv::join(f) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Heatmaps

void validate(const Heatmap& heatmap) {
  if (heatmap.values.size() == 0) throw IntegrityError("empty heatmap");
  for (Eigen::Index i = 0; i < heatmap.values.size(); ++i) {
    const float v = heatmap.values.data()[i];
    if (!(v >= 0.0f && v <= 1.0f)) {
      throw IntegrityError(fmt::format("heatmap value {} outside [0, 1] at flat index {}", v, i));
    }
  }
}

namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::uint32_t read_u32_le(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

void put_u32_le(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
                     static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

}  // namespace

Heatmap read_heatmap(std::istream& in, const std::string& source) {
  unsigned char header[16];
  if (!in.read(reinterpret_cast<char*>(header), 16)) throw ParseError(source, 0, "truncated heatmap header");
  if (std::memcmp(header, "HMAP", 4) != 0) throw ParseError(source, 0, "bad heatmap magic");
  const std::uint32_t h = read_u32_le(header + 4);
  const std::uint32_t w = read_u32_le(header + 8);
  if (h == 0 || w == 0) throw ParseError(source, 0, "heatmap has zero extent");
  if (std::uint64_t{h} * w > (std::uint64_t{1} << 28)) throw ParseError(source, 0, "heatmap too large");
  Heatmap hm;
  hm.values.resize(h, w);
  std::vector<unsigned char> raw(std::size_t{h} * w * 4);
  if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()))) {
    throw ParseError(source, 0, "truncated heatmap payload");
  }
  for (std::size_t i = 0; i < std::size_t{h} * w; ++i) {
    hm.values.data()[i] = std::bit_cast<float>(read_u32_le(raw.data() + 4 * i));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(source, 0, "trailing bytes after heatmap");
  try {
    validate(hm);
  } catch (const IntegrityError& e) {
    throw IntegrityError(source + ": " + e.what());
  }
  return hm;
}

Heatmap load_heatmap(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open for reading");
  return read_heatmap(in, path.string());
}

void write_heatmap(std::ostream& out, const Heatmap& heatmap) {
  validate(heatmap);
  out.write("HMAP", 4);
  put_u32_le(out, static_cast<std::uint32_t>(heatmap.height()));
  put_u32_le(out, static_cast<std::uint32_t>(heatmap.width()));
  put_u32_le(out, 0);
  for (Eigen::Index i = 0; i < heatmap.values.size(); ++i) {
    put_u32_le(out, std::bit_cast<std::uint32_t>(heatmap.values.data()[i]));
  }
}

void save_heatmap(const std::filesystem::path& path, const Heatmap& heatmap) {
  auto out = csv::open_output(path);
  write_heatmap(out, heatmap);
}

std::map<std::string, Heatmap> load_heatmap_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw ParseError(dir.string(), 0, "not a directory");
  std::map<std::string, Heatmap> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".hmap") continue;
    out.emplace(entry.path().stem().string(), load_heatmap(entry.path()));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Landmarks

std::map<std::string, LandmarkSet> parse_landmarks(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header({"image_id", "idx", "x", "y"});
  std::map<std::string, LandmarkSet> sets;
  std::map<std::string, std::vector<bool>> seen;
  while (auto row = reader.next()) {
    const auto& f = *row;
    if (f.size() != 4) reader.fail("expected 4 fields");
    if (f[0].empty()) reader.fail("empty image_id");
    const auto idx = csv::parse_int(f[1]);
    if (!idx || *idx < 0 || *idx >= static_cast<long long>(kNumLandmarks)) {
      reader.fail("landmark index out of range: `" + f[1] + "`");
    }
    const auto x = csv::parse_double(f[2]);
    const auto y = csv::parse_double(f[3]);
    if (!x || !y) reader.fail("landmark coordinates must be numbers");
    if (!(*x >= 0.0 && *x <= 1.0 && *y >= 0.0 && *y <= 1.0)) {
      reader.fail("landmark coordinates outside [0, 1]");
    }
    auto [it, inserted] = sets.try_emplace(f[0]);
    if (inserted) {
      it->second.image_id = f[0];
      it->second.points.setZero(kNumLandmarks, 2);
      seen[f[0]].assign(kNumLandmarks, false);
    }
    auto& flags = seen[f[0]];
    if (flags[*idx]) reader.fail(fmt::format("landmark {} repeated for `{}`", *idx, f[0]));
    flags[*idx] = true;
    it->second.points(*idx, 0) = *x;
    it->second.points(*idx, 1) = *y;
  }
  for (const auto& [id, flags] : seen) {
    const auto n = std::count(flags.begin(), flags.end(), true);
    if (n != static_cast<long>(kNumLandmarks)) {
      throw ParseError(source, 0, fmt::format("image `{}` has {} landmarks, expected 468", id, n));
    }
  }
  return sets;
}

std::map<std::string, LandmarkSet> load_landmarks(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_landmarks(in, path.string());
}

void write_landmarks(std::ostream& out, const std::map<std::string, LandmarkSet>& sets) {
  out << "image_id,idx,x,y\n";
  for (const auto& [id, set] : sets) {
    for (Eigen::Index i = 0; i < set.points.rows(); ++i) {
      out << csv::escape(id) << ',' << i << ',' << csv::format_double(set.points(i, 0)) << ','
          << csv::format_double(set.points(i, 1)) << '\n';
    }
  }
}

}  // namespace deface
