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

#include "deface/pixel_obfuscators.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <set>
#include <sstream>
#include <tuple>

#include "deface/csv.hpp"
#include "deface/error.hpp"
#include "deface/random.hpp"
#include "deface/similarity.hpp"

namespace deface {

ImageGrid::ImageGrid(int height, int width, int channels)
    : ImageGrid(height, width, channels,
                std::vector<std::uint8_t>(std::size_t(std::max(height, 0)) * std::max(width, 0) *
                                          std::max(channels, 0))) {}

ImageGrid::ImageGrid(int height, int width, int channels, std::vector<std::uint8_t> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  if (height <= 0 || width <= 0) throw InvalidArgument("image extents must be positive");
  if (channels != 1 && channels != 3) throw InvalidArgument("image must have 1 or 3 channels");
  if (data_.size() != std::size_t(height) * width * channels) {
    throw InvalidArgument(fmt::format("image data has {} bytes, expected {}", data_.size(),
                                      std::size_t(height) * width * channels));
  }
}

ImageGrid read_grid(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, "missing P-RAW header");
  std::istringstream hdr(line);
  std::string magic;
  long long h = 0, w = 0, c = 0;
  if (!(hdr >> magic >> h >> w >> c) || magic != "P-RAW") {
    throw ParseError(source, 1, "expected `P-RAW <H> <W> <C>`");
  }
  std::string rest;
  if (hdr >> rest) throw ParseError(source, 1, "trailing text in header");
  if (h <= 0 || w <= 0 || h > 65535 || w > 65535 || (c != 1 && c != 3)) {
    throw ParseError(source, 1, "invalid grid dimensions");
  }
  std::vector<std::uint8_t> data(std::size_t(h) * w * c);
  if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size()))) {
    throw ParseError(source, 0, "truncated pixel payload");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw ParseError(source, 0, "trailing bytes after pixels");
  return ImageGrid(int(h), int(w), int(c), std::move(data));
}

ImageGrid load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open for reading");
  return read_grid(in, path.string());
}

void write_grid(std::ostream& out, const ImageGrid& img) {
  out << "P-RAW " << img.height() << ' ' << img.width() << ' ' << img.channels() << '\n';
  out.write(reinterpret_cast<const char*>(img.data().data()), static_cast<std::streamsize>(img.data().size()));
}

void save_grid(const std::filesystem::path& path, const ImageGrid& img) {
  auto out = csv::open_output(path);
  write_grid(out, img);
}

ImageGrid resize_nearest(const ImageGrid& img, int height, int width) {
  if (img.height() == height && img.width() == width) return img;
  ImageGrid out(height, width, img.channels());
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(img.height() - 1, int((std::int64_t(y) * img.height()) / height));
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(img.width() - 1, int((std::int64_t(x) * img.width()) / width));
      for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = img.at(sy, sx, c);
    }
  }
  return out;
}

ImageGrid pixelate(const ImageGrid& img, int block) {
  if (block < 1 || block > std::min(img.height(), img.width())) {
    throw InvalidArgument(fmt::format("pixelation block {} outside [1, {}]", block,
                                      std::min(img.height(), img.width())));
  }
  ImageGrid out = img;
  const int C = img.channels();
  std::vector<std::uint64_t> sums(C);
  for (int y0 = 0; y0 < img.height(); y0 += block) {
    const int y1 = std::min(y0 + block, img.height());
    for (int x0 = 0; x0 < img.width(); x0 += block) {
      const int x1 = std::min(x0 + block, img.width());
      std::fill(sums.begin(), sums.end(), 0);
      for (int y = y0; y < y1; ++y)
        for (int x = x0; x < x1; ++x)
          for (int c = 0; c < C; ++c) sums[c] += img.at(y, x, c);
      const std::uint64_t n = std::uint64_t(y1 - y0) * (x1 - x0);
      for (int c = 0; c < C; ++c) {
        const std::uint8_t mean = rounded_mean(sums[c], n);
        for (int y = y0; y < y1; ++y)
          for (int x = x0; x < x1; ++x) out.at(y, x, c) = mean;
      }
    }
  }
  return out;
}

ImageGrid pixelate_standard(const ImageGrid& img) {
  return pixelate(resize_nearest(img, kStandardSide, kStandardSide), kStandardBlock);
}

std::size_t snow_count(double delta, std::size_t pixels) {
  // The tolerance keeps decimal fractions such as 0.29 * 100 from flooring
  // one short of the exact product.
  return static_cast<std::size_t>(std::floor(delta * double(pixels) + 1e-9));
}

ImageGrid dp_snow(const ImageGrid& img, double delta, std::uint8_t gray, std::uint64_t seed) {
  if (!(delta > 0.0 && delta <= 1.0)) throw InvalidArgument("DP-Snow delta must be in (0, 1]");
  ImageGrid out = img;
  const std::size_t n = img.pixel_count();
  const std::size_t count = std::min(n, snow_count(delta, n));
  Rng rng(seed);
  for (std::size_t p : rng.sample_indices(n, count)) {
    const int y = int(p / img.width());
    const int x = int(p % img.width());
    for (int c = 0; c < img.channels(); ++c) out.at(y, x, c) = gray;
  }
  return out;
}

std::vector<std::string> k_same_neighbors(const std::string& target_id, const Dataset& dataset,
                                          const EmbeddingTable& embeddings, int k) {
  if (k < 2) throw InvalidArgument("K-Same needs k >= 2");
  const FaceRecord& target = dataset.record(target_id);
  const Eigen::VectorXd& anchor = embeddings.at(target_id);

  std::vector<std::tuple<double, std::string, std::string>> candidates;
  for (const auto& rec : dataset.records()) {
    if (rec.identity_id == target.identity_id) continue;
    candidates.emplace_back(cosine_distance(anchor, embeddings.at(rec.image_id)), rec.image_id,
                            rec.identity_id);
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<std::string> chosen;
  std::set<std::string> used_identities;
  for (const auto& [dist, image, identity] : candidates) {
    if (chosen.size() + 1 == std::size_t(k)) break;
    if (!used_identities.insert(identity).second) continue;
    chosen.push_back(image);
  }
  if (chosen.size() + 1 != std::size_t(k)) {
    throw InvalidArgument(fmt::format("K-Same gallery has {} other identities, k={} needs {}",
                                      chosen.size(), k, k - 1));
  }
  return chosen;
}

ImageGrid average_grids(const std::vector<const ImageGrid*>& grids) {
  if (grids.empty()) throw InvalidArgument("nothing to average");
  const ImageGrid& first = *grids.front();
  for (const ImageGrid* g : grids) {
    if (!g->same_shape(first)) throw IntegrityError("K-Same grids differ in dimensions");
  }
  std::vector<std::uint64_t> sums(first.data().size(), 0);
  for (const ImageGrid* g : grids) {
    const auto& d = g->data();
    for (std::size_t i = 0; i < d.size(); ++i) sums[i] += d[i];
  }
  ImageGrid out(first.height(), first.width(), first.channels());
  for (std::size_t i = 0; i < sums.size(); ++i) out.data()[i] = rounded_mean(sums[i], grids.size());
  return out;
}

ImageGrid k_same_pixel(const std::string& target_id, const PixelGallery& gallery,
                       const EmbeddingTable& embeddings, int k) {
  if (!gallery.dataset || !gallery.grids) throw InvalidArgument("K-Same gallery is incomplete");
  const auto neighbors = k_same_neighbors(target_id, *gallery.dataset, embeddings, k);
  auto grid_of = [&](const std::string& id) -> const ImageGrid* {
    auto it = gallery.grids->find(id);
    if (it == gallery.grids->end()) throw IntegrityError("missing pixel grid for `" + id + "`");
    return &it->second;
  };
  std::vector<const ImageGrid*> grids{grid_of(target_id)};
  for (const auto& id : neighbors) grids.push_back(grid_of(id));
  return average_grids(grids);
}

}  // namespace deface
