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

// Shared fixtures for the unit tests.

#ifndef DEFACE_TEST_SUPPORT_HPP_
#define DEFACE_TEST_SUPPORT_HPP_

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "deface/data_model.hpp"
#include "deface/random.hpp"

namespace deface::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("deface_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// `ids` identities per group, `imgs` images each, ids like "g0_i1", images "g0_i1_p2".
inline Dataset small_dataset(const std::vector<DemographicKey>& groups, int ids, int imgs,
                             const std::string& name = "small") {
  std::vector<FaceRecord> records;
  for (std::size_t g = 0; g < groups.size(); ++g)
    for (int i = 0; i < ids; ++i)
      for (int p = 0; p < imgs; ++p) {
        const std::string identity = "g" + std::to_string(g) + "_i" + std::to_string(i);
        records.push_back({identity + "_p" + std::to_string(p), identity, groups[g], std::nullopt});
      }
  return Dataset::create(name, records);
}

inline DemographicKey key(Gender g, Race r) { return DemographicKey{g, r}; }

}  // namespace deface::testing

#endif  // DEFACE_TEST_SUPPORT_HPP_
