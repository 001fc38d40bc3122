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

// Sectioned key/value text in a TOML subset:
//
//   # comment
//   version = 1
//   [section.sub]
//   name = "text"            # strings use double quotes, \" \\ \n \t escapes
//   "quoted key" = 0.5
//   flag = true
//   list = [0.2, 0.1, "x"]   # flat arrays on one line
//
// Readers mark keys as used; `unused()` lists the rest so callers can
// reject typos.

#ifndef DEFACE_CONFIG_TEXT_HPP_
#define DEFACE_CONFIG_TEXT_HPP_

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace deface {

struct ConfigValue {
  using Scalar = std::variant<std::string, std::int64_t, double, bool>;
  std::variant<Scalar, std::vector<Scalar>> value;
  int line = 0;
};

class ConfigDocument {
 public:
  static ConfigDocument parse(std::istream& in, const std::string& source);
  static ConfigDocument load(const std::filesystem::path& path);

  const std::string& source() const noexcept { return source_; }
  /// Section names in file order ("" is the top level).
  std::vector<std::string> sections() const;
  bool has_section(const std::string& section) const { return values_.count(section) > 0; }
  /// Keys of a section in sorted order.
  std::vector<std::string> keys(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  // Typed getters; throw ValidationError on a type mismatch. Integers are
  // accepted where a double is asked for.
  std::optional<std::string> get_string(const std::string& section, const std::string& key) const;
  std::optional<double> get_double(const std::string& section, const std::string& key) const;
  std::optional<std::int64_t> get_int(const std::string& section, const std::string& key) const;
  std::optional<bool> get_bool(const std::string& section, const std::string& key) const;
  std::optional<std::vector<std::string>> get_strings(const std::string& section, const std::string& key) const;
  std::optional<std::vector<double>> get_doubles(const std::string& section, const std::string& key) const;

  /// "section.key" for every key no getter has read.
  std::vector<std::string> unused() const;

 private:
  const ConfigValue* lookup(const std::string& section, const std::string& key) const;
  [[noreturn]] void type_error(const std::string& section, const std::string& key, const char* want) const;

  std::string source_;
  std::vector<std::string> order_;
  std::map<std::string, std::map<std::string, ConfigValue>> values_;
  mutable std::set<std::pair<std::string, std::string>> used_;
};

}  // namespace deface

#endif  // DEFACE_CONFIG_TEXT_HPP_
