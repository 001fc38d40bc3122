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

#include "deface/regions.hpp"

#include <sstream>

#include "deface/csv.hpp"
#include "deface/error.hpp"

namespace deface {

// Defined in the generated region_map_data.cpp.
extern const char* const kRegionMapV1Csv;

namespace {

constexpr std::array<std::string_view, kNumRegions> kRegionNames = {
    "forehead", "left_eye",  "right_eye",   "left_eyebrow", "right_eyebrow", "nose_bridge",
    "nose_tip", "left_cheek", "right_cheek", "lips",         "chin",          "jaw",
};

}  // namespace

std::string_view to_string(Region region) { return kRegionNames.at(index_of(region)); }

std::optional<Region> parse_region(std::string_view name) {
  for (std::size_t i = 0; i < kNumRegions; ++i) {
    if (kRegionNames[i] == name) return static_cast<Region>(i);
  }
  return std::nullopt;
}

const std::array<Region, kNumRegions>& all_regions() {
  static const std::array<Region, kNumRegions> regions = [] {
    std::array<Region, kNumRegions> r{};
    for (std::size_t i = 0; i < kNumRegions; ++i) r[i] = static_cast<Region>(i);
    return r;
  }();
  return regions;
}

RegionMap::RegionMap(const std::array<Region, kNumLandmarks>& assignment)
    : assignment_(assignment) {
  for (Region r : assignment_) {
    if (index_of(r) >= kNumRegions) throw IntegrityError("region map: invalid region value");
    ++counts_[index_of(r)];
  }
  for (std::size_t i = 0; i < kNumRegions; ++i) {
    if (counts_[i] == 0) {
      throw IntegrityError("region map: region `" + std::string(kRegionNames[i]) +
                           "` has no landmarks");
    }
  }
}

RegionMap parse_region_map(std::istream& in, const std::string& source) {
  csv::Reader reader(in, source);
  reader.expect_header({"idx", "region"});
  std::array<Region, kNumLandmarks> assignment{};
  std::array<bool, kNumLandmarks> seen{};
  std::size_t rows = 0;
  while (auto row = reader.next()) {
    if (row->size() != 2) reader.fail("expected 2 fields");
    const auto idx = csv::parse_int((*row)[0]);
    if (!idx || *idx < 0 || *idx >= static_cast<long long>(kNumLandmarks)) {
      reader.fail("landmark index out of range: " + (*row)[0]);
    }
    const auto region = parse_region((*row)[1]);
    if (!region) reader.fail("unknown region `" + (*row)[1] + "`");
    if (seen[*idx]) reader.fail("landmark " + (*row)[0] + " mapped twice");
    seen[*idx] = true;
    assignment[*idx] = *region;
    ++rows;
  }
  if (rows != kNumLandmarks) {
    throw ParseError(source, 0, "region map covers " + std::to_string(rows) + " of 468 landmarks");
  }
  return RegionMap(assignment);
}

RegionMap load_region_map(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse_region_map(in, path.string());
}

const RegionMap& default_region_map() {
  static const RegionMap map = [] {
    std::istringstream in(kRegionMapV1Csv);
    return parse_region_map(in, "region_map_v1.csv");
  }();
  return map;
}

}  // namespace deface
