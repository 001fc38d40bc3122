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

// Non-neural face obfuscators operating on raw 8-bit pixel grids:
// block pixelation, DP-Snow gray-pixel replacement, and K-Same-Pixel
// averaging with neighbours chosen in embedding space.

#ifndef DEFACE_PIXEL_OBFUSCATORS_HPP_
#define DEFACE_PIXEL_OBFUSCATORS_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "deface/data_model.hpp"
#include "deface/score_io.hpp"

namespace deface {

/// H x W x C raster, row-major with interleaved channels.
class ImageGrid {
 public:
  ImageGrid() = default;
  /// Zero-filled grid. Throws InvalidArgument unless channels is 1 or 3 and
  /// both extents are positive.
  ImageGrid(int height, int width, int channels);
  /// Throws InvalidArgument when `data` has the wrong length.
  ImageGrid(int height, int width, int channels, std::vector<std::uint8_t> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return std::size_t(height_) * width_; }

  std::uint8_t& at(int y, int x, int c) { return data_[index(y, x, c)]; }
  std::uint8_t at(int y, int x, int c) const { return data_[index(y, x, c)]; }

  const std::vector<std::uint8_t>& data() const noexcept { return data_; }
  std::vector<std::uint8_t>& data() noexcept { return data_; }

  bool same_shape(const ImageGrid& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ && channels_ == other.channels_;
  }
  bool operator==(const ImageGrid&) const = default;

 private:
  std::size_t index(int y, int x, int c) const {
    return (std::size_t(y) * width_ + x) * channels_ + c;
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Raw grid file: "P-RAW <H> <W> <C>\n" then H*W*C bytes.
ImageGrid read_grid(std::istream& in, const std::string& source);
ImageGrid load_grid(const std::filesystem::path& path);
void write_grid(std::ostream& out, const ImageGrid& img);
void save_grid(const std::filesystem::path& path, const ImageGrid& img);

/// Nearest-neighbour resampling to (height, width).
ImageGrid resize_nearest(const ImageGrid& img, int height, int width);

/// Integer mean of `n` values summing to `sum`, rounded half-up.
constexpr std::uint8_t rounded_mean(std::uint64_t sum, std::uint64_t n) {
  return static_cast<std::uint8_t>((2 * sum + n) / (2 * n));
}

/// Replaces each block x block cell (anchored top-left; edge cells may be
/// smaller) by its per-channel mean. Requires 1 <= block <= min(H, W).
ImageGrid pixelate(const ImageGrid& img, int block);

inline constexpr int kStandardSide = 224;
inline constexpr int kStandardBlock = 16;

/// The fixed benchmark level: resize to 224x224 (nearest) and pixelate with
/// 16-pixel blocks, i.e. a 14x14 cell grid.
ImageGrid pixelate_standard(const ImageGrid& img);

inline constexpr std::uint8_t kDefaultGray = 128;

/// Number of pixels DP-Snow replaces: floor(delta * H * W).
std::size_t snow_count(double delta, std::size_t pixels);

/// Sets exactly floor(delta*H*W) distinct pixel positions, drawn uniformly
/// under `seed`, to `gray` on every channel. Requires 0 < delta <= 1.
ImageGrid dp_snow(const ImageGrid& img, double delta, std::uint8_t gray, std::uint64_t seed);

inline constexpr int kDefaultK = 5;

/// Gallery for K-Same: dataset records plus their pixel grids.
struct PixelGallery {
  const Dataset* dataset = nullptr;
  const std::map<std::string, ImageGrid>* grids = nullptr;
};

/// The k-1 gallery images averaged with `target_id`: ascending cosine
/// distance to the target embedding (ties by image id), skipping the
/// target's own identity and at most one image per gallery identity.
/// Throws InvalidArgument when fewer than k-1 identities qualify.
std::vector<std::string> k_same_neighbors(const std::string& target_id, const Dataset& dataset,
                                          const EmbeddingTable& embeddings, int k);

/// Per-pixel mean (rounded half-up) of the target grid and its k-1
/// neighbours. Throws IntegrityError on missing grids or embeddings, or
/// mismatched grid shapes.
ImageGrid k_same_pixel(const std::string& target_id, const PixelGallery& gallery,
                       const EmbeddingTable& embeddings, int k);

/// Per-pixel mean of equally-shaped grids, rounded half-up.
ImageGrid average_grids(const std::vector<const ImageGrid*>& grids);

}  // namespace deface

#endif  // DEFACE_PIXEL_OBFUSCATORS_HPP_
