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

#include "deface/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>

#include "deface/csv.hpp"
#include "deface/error.hpp"
#include "deface/random.hpp"

namespace deface {

std::string_view to_string(Gender g) { return g == Gender::kFemale ? "Female" : "Male"; }

std::string_view to_string(Race r) {
  switch (r) {
    case Race::kWhite: return "White";
    case Race::kBlack: return "Black";
    case Race::kAsian: return "Asian";
    case Race::kIndian: return "Indian";
    case Race::kUnspecified: return "";
  }
  return "";
}

std::optional<Gender> parse_gender(std::string_view text) {
  if (text == "Female") return Gender::kFemale;
  if (text == "Male") return Gender::kMale;
  return std::nullopt;
}

std::optional<Race> parse_race(std::string_view text) {
  for (Race r : {Race::kWhite, Race::kBlack, Race::kAsian, Race::kIndian, Race::kUnspecified}) {
    if (to_string(r) == text) return r;
  }
  return std::nullopt;
}

std::vector<DemographicKey> paired_groups() {
  std::vector<DemographicKey> out;
  for (Race r : {Race::kWhite, Race::kBlack, Race::kAsian, Race::kIndian}) {
    for (Gender g : {Gender::kFemale, Gender::kMale}) out.push_back({g, r});
  }
  return out;
}

std::string_view to_string(GroupBy g) {
  switch (g) {
    case GroupBy::kPair: return "pairs";
    case GroupBy::kRace: return "race";
    case GroupBy::kGender: return "gender";
  }
  return "";
}

std::optional<GroupBy> parse_group_by(std::string_view text) {
  if (text == "pairs" || text == "pair") return GroupBy::kPair;
  if (text == "race") return GroupBy::kRace;
  if (text == "gender") return GroupBy::kGender;
  return std::nullopt;
}

std::string group_label(const DemographicKey& key, GroupBy by) {
  switch (by) {
    case GroupBy::kGender: return std::string(to_string(key.gender));
    case GroupBy::kRace:
      if (!key.paired()) throw InvalidArgument("race grouping requires paired demographics");
      return std::string(to_string(key.race));
    case GroupBy::kPair:
      if (!key.paired()) return std::string(to_string(key.gender));
      return fmt::format("{} {}", to_string(key.race), to_string(key.gender));
  }
  return {};
}

Dataset Dataset::create(std::string name, std::vector<FaceRecord> records) {
  if (records.empty()) throw IntegrityError("dataset `" + name + "` has no records");
  Dataset ds;
  ds.name_ = std::move(name);
  ds.records_ = std::move(records);
  std::size_t unspecified = 0;
  for (std::size_t i = 0; i < ds.records_.size(); ++i) {
    const FaceRecord& rec = ds.records_[i];
    if (rec.image_id.empty()) throw IntegrityError("empty image_id");
    if (rec.identity_id.empty()) throw IntegrityError("empty identity_id for " + rec.image_id);
    if (!ds.by_image_.emplace(rec.image_id, i).second) {
      throw IntegrityError("duplicate image_id `" + rec.image_id + "`");
    }
    auto [it, inserted] = ds.identity_demo_.emplace(rec.identity_id, rec.demographic);
    if (!inserted && it->second != rec.demographic) {
      throw IntegrityError("identity `" + rec.identity_id + "` has conflicting demographics");
    }
    ds.identity_images_[rec.identity_id].push_back(rec.image_id);
    if (!rec.demographic.paired()) ++unspecified;
  }
  if (unspecified != 0 && unspecified != ds.records_.size()) {
    throw IntegrityError("dataset `" + ds.name_ +
                         "` mixes gender-only and gender-race demographics");
  }
  ds.paired_ = unspecified == 0;
  for (auto& [id, images] : ds.identity_images_) {
    std::sort(images.begin(), images.end());
    ds.identities_.push_back(id);
  }
  return ds;
}

const FaceRecord& Dataset::record(const std::string& image_id) const {
  auto it = by_image_.find(image_id);
  if (it == by_image_.end()) throw IntegrityError("unknown image_id `" + image_id + "`");
  return records_[it->second];
}

const DemographicKey& Dataset::demographic_of(const std::string& identity_id) const {
  auto it = identity_demo_.find(identity_id);
  if (it == identity_demo_.end()) throw IntegrityError("unknown identity `" + identity_id + "`");
  return it->second;
}

const std::vector<std::string>& Dataset::images_of(const std::string& identity_id) const {
  auto it = identity_images_.find(identity_id);
  if (it == identity_images_.end()) throw IntegrityError("unknown identity `" + identity_id + "`");
  return it->second;
}

std::vector<std::string> Dataset::group_labels(GroupBy by) const {
  std::set<DemographicKey> keys;
  for (const auto& [id, key] : identity_demo_) {
    DemographicKey k = key;
    if (by == GroupBy::kGender) k.race = Race::kUnspecified;
    if (by == GroupBy::kRace) k.gender = Gender::kFemale;
    keys.insert(k);
  }
  // DemographicKey orders gender first; report order is race-major.
  std::vector<DemographicKey> ordered(keys.begin(), keys.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    return std::tie(a.race, a.gender) < std::tie(b.race, b.gender);
  });
  std::vector<std::string> out;
  for (const auto& k : ordered) out.push_back(group_label(k, by));
  return out;
}

Dataset parse_manifest(std::istream& in, const std::string& source, std::string name) {
  csv::Reader reader(in, source);
  reader.expect_header({"image_id", "identity_id", "gender", "race", "image_path"});
  std::vector<FaceRecord> records;
  while (auto row = reader.next()) {
    if (row->size() != 5) reader.fail(fmt::format("expected 5 fields, got {}", row->size()));
    FaceRecord rec;
    rec.image_id = (*row)[0];
    rec.identity_id = (*row)[1];
    if (rec.image_id.empty()) reader.fail("empty image_id");
    if (rec.identity_id.empty()) reader.fail("empty identity_id");
    const auto gender = parse_gender((*row)[2]);
    if (!gender) reader.fail("unknown gender `" + (*row)[2] + "`");
    const auto race = parse_race((*row)[3]);
    if (!race) reader.fail("unknown race `" + (*row)[3] + "`");
    rec.demographic = {*gender, *race};
    if (!(*row)[4].empty()) rec.image_path = (*row)[4];
    records.push_back(std::move(rec));
  }
  try {
    return Dataset::create(std::move(name), std::move(records));
  } catch (const IntegrityError& e) {
    throw IntegrityError(source + ": " + e.what());
  }
}

Dataset load_manifest(const std::filesystem::path& path, std::string name) {
  auto in = csv::open_input(path);
  if (name.empty()) name = path.stem().string();
  return parse_manifest(in, path.string(), std::move(name));
}

void write_manifest(std::ostream& out, const Dataset& dataset) {
  out << "image_id,identity_id,gender,race,image_path\n";
  for (const auto& rec : dataset.records()) {
    out << csv::join({rec.image_id, rec.identity_id, std::string(to_string(rec.demographic.gender)),
                      std::string(to_string(rec.demographic.race)), rec.image_path.value_or("")})
        << '\n';
  }
}

void save_manifest(const std::filesystem::path& path, const Dataset& dataset) {
  auto out = csv::open_output(path);
  write_manifest(out, dataset);
}

ObfuscationRun make_run(const Dataset& dataset, std::string method, std::set<std::string> produced) {
  ObfuscationRun run{std::move(method), dataset.name(), std::move(produced), {}};
  for (const auto& id : run.produced) {
    if (!dataset.contains(id)) throw IntegrityError("obfuscation run names unknown image `" + id + "`");
  }
  for (const auto& rec : dataset.records()) {
    if (!run.produced.count(rec.image_id)) run.failed.insert(rec.image_id);
  }
  return run;
}

void check_run(const ObfuscationRun& run, const Dataset& dataset) {
  for (const auto& id : run.produced) {
    if (run.failed.count(id)) throw IntegrityError("image `" + id + "` both produced and failed");
    if (!dataset.contains(id)) throw IntegrityError("unknown image `" + id + "` in run");
  }
  for (const auto& id : run.failed) {
    if (!dataset.contains(id)) throw IntegrityError("unknown image `" + id + "` in run");
  }
  if (run.produced.size() + run.failed.size() != dataset.size()) {
    throw IntegrityError("obfuscation run does not cover every source image");
  }
}

double passing_rate(const ObfuscationRun& run) {
  const std::size_t n = run.produced.size() + run.failed.size();
  if (n == 0) throw InvalidArgument("passing rate of an empty obfuscation run");
  return static_cast<double>(run.produced.size()) / static_cast<double>(n);
}

namespace {

std::string group_slug(const DemographicKey& key) {
  std::string s = key.paired() ? std::string(to_string(key.race)) + "_" : std::string();
  s += to_string(key.gender);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double scale_for(const std::map<DemographicKey, double>& scales, const DemographicKey& key) {
  auto it = scales.find(key);
  return it == scales.end() ? 1.0 : it->second;
}

Eigen::VectorXd gaussian(Rng& rng, int dim) {
  Eigen::VectorXd v(dim);
  for (int i = 0; i < dim; ++i) v[i] = rng.normal();
  return v;
}

}  // namespace

SynthData synth_dataset(const SynthSpec& spec, std::uint64_t seed) {
  if (spec.groups.empty() || spec.ids_per_group < 1 || spec.imgs_per_id < 1) {
    throw InvalidArgument("synthetic spec needs at least one group, identity and image");
  }
  if (spec.dim < 2) throw InvalidArgument("synthetic embeddings need dim >= 2");
  if (!(spec.cluster_spread >= 0.0)) throw InvalidArgument("cluster spread must be >= 0");
  for (const auto& [key, s] : spec.demographic_noise_scale) {
    if (!(s >= 0.0)) throw InvalidArgument("demographic noise scale must be >= 0");
  }
  std::set<DemographicKey> unique(spec.groups.begin(), spec.groups.end());
  if (unique.size() != spec.groups.size()) throw InvalidArgument("duplicate synthetic group");

  Rng rng(seed);
  std::vector<FaceRecord> records;
  EmbeddingTable table("synthetic", spec.dim);
  const double per_component = 1.0 / std::sqrt(static_cast<double>(spec.dim));
  for (const auto& group : spec.groups) {
    const double sigma = spec.cluster_spread * scale_for(spec.demographic_noise_scale, group) * per_component;
    const std::string slug = group_slug(group);
    for (int i = 0; i < spec.ids_per_group; ++i) {
      const std::string identity = fmt::format("{}_id{:04d}", slug, i);
      Eigen::VectorXd center = gaussian(rng, spec.dim);
      center.normalize();
      for (int j = 0; j < spec.imgs_per_id; ++j) {
        const std::string image = fmt::format("{}_img{:03d}", identity, j);
        Eigen::VectorXd noise = gaussian(rng, spec.dim);
        records.push_back({image, identity, group, std::nullopt});
        table.insert(image, center + sigma * noise);
      }
    }
  }
  return {Dataset::create(spec.name, std::move(records)), std::move(table)};
}

EmbeddingTable synth_obfuscation(const Dataset& dataset, const EmbeddingTable& embeddings,
                                 double strength,
                                 const std::map<DemographicKey, double>& demographic_scale,
                                 std::uint64_t seed, std::string model_tag) {
  if (!(strength >= 0.0)) throw InvalidArgument("obfuscation strength must be >= 0");
  const int dim = static_cast<int>(embeddings.dim());
  const double per_component = 1.0 / std::sqrt(static_cast<double>(dim));
  EmbeddingTable out(std::move(model_tag), embeddings.dim());
  for (const auto& [id, vec] : embeddings.entries()) {
    // Per-image stream: the output for X does not depend on which other
    // images are present.
    Rng rng(derive_seed(seed, id));
    const double sigma = strength * scale_for(demographic_scale, dataset.record(id).demographic) *
                         per_component;
    out.insert(id, vec + sigma * gaussian(rng, dim));
  }
  return out;
}

}  // namespace deface
