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

// Minimal CSV plumbing shared by the loaders. Fields may be double-quoted
// ("" escapes a quote); records never span lines.

#ifndef DEFACE_CSV_HPP_
#define DEFACE_CSV_HPP_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace deface::csv {

std::vector<std::string> split_line(std::string_view line);

/// Quotes a field if it contains a comma, quote, or leading/trailing space.
std::string escape(std::string_view field);

std::string join(const std::vector<std::string>& fields);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

/// Strict full-string number parsing; nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);
std::optional<long long> parse_int(std::string_view text);

/// Line-oriented reader that tracks 1-based line numbers. Blank lines and
/// lines starting with '#' are skipped. A trailing '\r' is stripped.
class Reader {
 public:
  Reader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  /// Next record, or nullopt at end of input.
  std::optional<std::vector<std::string>> next();

  std::size_t line() const noexcept { return line_; }
  const std::string& source() const noexcept { return source_; }

  /// Consumes the header row and checks it against `expected` (a prefix
  /// match when `prefix_only`).
  void expect_header(const std::vector<std::string>& expected, bool prefix_only = false);

  [[noreturn]] void fail(const std::string& what) const;

 private:
  std::istream& in_;
  std::string source_;
  std::size_t line_ = 0;
};

/// Opens `path` for reading or throws ParseError.
std::ifstream open_input(const std::filesystem::path& path);
/// Opens `path` for writing (binary, LF endings) or throws Error.
std::ofstream open_output(const std::filesystem::path& path);

}  // namespace deface::csv

#endif  // DEFACE_CSV_HPP_
