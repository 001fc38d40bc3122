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

#ifndef DEFACE_REGIONS_HPP_
#define DEFACE_REGIONS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>

namespace deface {

inline constexpr std::size_t kNumLandmarks = 468;
inline constexpr std::size_t kNumRegions = 12;

/// Fixed facial-region vocabulary. The enumerator order is the canonical
/// component order of focus vectors.
enum class Region : std::uint8_t {
  kForehead,
  kLeftEye,
  kRightEye,
  kLeftEyebrow,
  kRightEyebrow,
  kNoseBridge,
  kNoseTip,
  kLeftCheek,
  kRightCheek,
  kLips,
  kChin,
  kJaw,
};

std::string_view to_string(Region region);
std::optional<Region> parse_region(std::string_view name);
constexpr std::size_t index_of(Region r) { return static_cast<std::size_t>(r); }
const std::array<Region, kNumRegions>& all_regions();

/// Landmark index -> region. Every index maps to exactly one region and
/// every region owns at least one landmark.
class RegionMap {
 public:
  explicit RegionMap(const std::array<Region, kNumLandmarks>& assignment);

  Region region_of(std::size_t landmark) const { return assignment_.at(landmark); }
  std::size_t landmark_count(Region r) const { return counts_[index_of(r)]; }
  const std::array<Region, kNumLandmarks>& assignment() const { return assignment_; }

 private:
  std::array<Region, kNumLandmarks> assignment_;
  std::array<std::size_t, kNumRegions> counts_{};
};

/// Parses `idx,region` rows (header `idx,region`, '#' comments allowed).
RegionMap parse_region_map(std::istream& in, const std::string& source);
RegionMap load_region_map(const std::filesystem::path& path);

/// The versioned table shipped in data/region_map_v1.csv, compiled in.
const RegionMap& default_region_map();

}  // namespace deface

#endif  // DEFACE_REGIONS_HPP_
