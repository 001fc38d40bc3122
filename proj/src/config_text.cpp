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

#include "deface/config_text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>

#include "deface/csv.hpp"
#include "deface/error.hpp"

namespace deface {
namespace {

class LineParser {
 public:
  LineParser(std::string_view text, const std::string& source, int line)
      : text_(text), source_(source), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) ++pos_;
  }

  bool at_end_or_comment() {
    skip_space();
    return pos_ >= text_.size() || text_[pos_] == '#';
  }

  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  std::string quoted() {
    expect('"');
    std::string out;
    while (pos_ < text_.size() && text_[pos_] != '"') {
      char c = text_[pos_++];
      if (c == '\\') {
        if (pos_ >= text_.size()) fail("dangling escape");
        const char e = text_[pos_++];
        switch (e) {
          case '"': c = '"'; break;
          case '\\': c = '\\'; break;
          case 'n': c = '\n'; break;
          case 't': c = '\t'; break;
          default: fail(std::string("unknown escape \\") + e);
        }
      }
      out.push_back(c);
    }
    if (pos_ >= text_.size()) fail("unterminated string");
    ++pos_;
    return out;
  }

  std::string bare_key() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size()) {
      const auto c = static_cast<unsigned char>(text_[pos_]);
      if (!(std::isalnum(c) || c == '_' || c == '-')) break;
      ++pos_;
    }
    if (pos_ == start) fail("expected a key");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::string key() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '"') return quoted();
    return bare_key();
  }

  /// Dotted section name; each part bare or quoted.
  std::string section_name() {
    std::string name = key();
    while (consume('.')) name += "." + key();
    return name;
  }

  ConfigValue::Scalar scalar() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '"') return quoted();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']' && text_[pos_] != '#' &&
           text_[pos_] != ' ' && text_[pos_] != '\t')
      ++pos_;
    const std::string_view tok = text_.substr(start, pos_ - start);
    if (tok.empty()) fail("expected a value");
    if (tok == "true") return true;
    if (tok == "false") return false;
    const bool looks_float = tok.find_first_of(".eE") != std::string_view::npos ||
                             tok == "inf" || tok == "nan";
    if (!looks_float) {
      if (auto i = csv::parse_int(tok)) return std::int64_t{*i};
    }
    if (auto d = csv::parse_double(tok)) return *d;
    fail("cannot read value '" + std::string(tok) + "'");
  }

  ConfigValue value() {
    if (consume('[')) {
      std::vector<ConfigValue::Scalar> items;
      if (!consume(']')) {
        do {
          items.push_back(scalar());
        } while (consume(','));
        expect(']');
      }
      return {std::move(items), line_};
    }
    return {scalar(), line_};
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, std::size_t(line_), what); }

 private:
  std::string_view text_;
  const std::string& source_;
  int line_;
  std::size_t pos_ = 0;
};

}  // namespace

ConfigDocument ConfigDocument::parse(std::istream& in, const std::string& source) {
  ConfigDocument doc;
  doc.source_ = source;
  doc.order_.push_back("");
  doc.values_[""];
  std::string current;
  std::string text;
  int line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (!text.empty() && text.back() == '\r') text.pop_back();
    if (line == 1 && text.rfind("\xEF\xBB\xBF", 0) == 0) text.erase(0, 3);
    LineParser p(text, source, line);
    if (p.at_end_or_comment()) continue;
    if (p.consume('[')) {
      current = p.section_name();
      p.expect(']');
      if (!p.at_end_or_comment()) p.fail("trailing text after section header");
      if (doc.values_.count(current) && current != "") p.fail("duplicate section [" + current + "]");
      doc.values_[current];
      doc.order_.push_back(current);
      continue;
    }
    const std::string key = p.key();
    p.expect('=');
    ConfigValue v = p.value();
    if (!p.at_end_or_comment()) p.fail("trailing text after value");
    if (!doc.values_[current].emplace(key, std::move(v)).second) p.fail("duplicate key '" + key + "'");
  }
  return doc;
}

ConfigDocument ConfigDocument::load(const std::filesystem::path& path) {
  auto in = csv::open_input(path);
  return parse(in, path.string());
}

std::vector<std::string> ConfigDocument::sections() const { return order_; }

std::vector<std::string> ConfigDocument::keys(const std::string& section) const {
  std::vector<std::string> out;
  auto it = values_.find(section);
  if (it == values_.end()) return out;
  for (const auto& [k, v] : it->second) out.push_back(k);
  return out;
}

bool ConfigDocument::has(const std::string& section, const std::string& key) const {
  auto it = values_.find(section);
  return it != values_.end() && it->second.count(key) > 0;
}

const ConfigValue* ConfigDocument::lookup(const std::string& section, const std::string& key) const {
  auto it = values_.find(section);
  if (it == values_.end()) return nullptr;
  auto kt = it->second.find(key);
  if (kt == it->second.end()) return nullptr;
  used_.emplace(section, key);
  return &kt->second;
}

void ConfigDocument::type_error(const std::string& section, const std::string& key, const char* want) const {
  const ConfigValue* v = lookup(section, key);
  throw ValidationError(source_ + ":" + std::to_string(v ? v->line : 0) + ": " +
                        (section.empty() ? key : section + "." + key) + " must be " + want);
}

namespace {

std::optional<double> scalar_double(const ConfigValue::Scalar& s) {
  if (auto d = std::get_if<double>(&s)) return *d;
  if (auto i = std::get_if<std::int64_t>(&s)) return double(*i);
  return std::nullopt;
}

}  // namespace

std::optional<std::string> ConfigDocument::get_string(const std::string& section, const std::string& key) const {
  const ConfigValue* v = lookup(section, key);
  if (!v) return std::nullopt;
  if (auto s = std::get_if<ConfigValue::Scalar>(&v->value)) {
    if (auto str = std::get_if<std::string>(s)) return *str;
  }
  type_error(section, key, "a string");
}

std::optional<double> ConfigDocument::get_double(const std::string& section, const std::string& key) const {
  const ConfigValue* v = lookup(section, key);
  if (!v) return std::nullopt;
  if (auto s = std::get_if<ConfigValue::Scalar>(&v->value)) {
    if (auto d = scalar_double(*s)) return d;
  }
  type_error(section, key, "a number");
}

std::optional<std::int64_t> ConfigDocument::get_int(const std::string& section, const std::string& key) const {
  const ConfigValue* v = lookup(section, key);
  if (!v) return std::nullopt;
  if (auto s = std::get_if<ConfigValue::Scalar>(&v->value)) {
    if (auto i = std::get_if<std::int64_t>(s)) return *i;
  }
  type_error(section, key, "an integer");
}

std::optional<bool> ConfigDocument::get_bool(const std::string& section, const std::string& key) const {
  const ConfigValue* v = lookup(section, key);
  if (!v) return std::nullopt;
  if (auto s = std::get_if<ConfigValue::Scalar>(&v->value)) {
    if (auto b = std::get_if<bool>(s)) return *b;
  }
  type_error(section, key, "true or false");
}

std::optional<std::vector<std::string>> ConfigDocument::get_strings(const std::string& section,
                                                                    const std::string& key) const {
  const ConfigValue* v = lookup(section, key);
  if (!v) return std::nullopt;
  if (auto list = std::get_if<std::vector<ConfigValue::Scalar>>(&v->value)) {
    std::vector<std::string> out;
    for (const auto& s : *list) {
      auto str = std::get_if<std::string>(&s);
      if (!str) type_error(section, key, "a list of strings");
      out.push_back(*str);
    }
    return out;
  }
  type_error(section, key, "a list of strings");
}

std::optional<std::vector<double>> ConfigDocument::get_doubles(const std::string& section,
                                                               const std::string& key) const {
  const ConfigValue* v = lookup(section, key);
  if (!v) return std::nullopt;
  if (auto list = std::get_if<std::vector<ConfigValue::Scalar>>(&v->value)) {
    std::vector<double> out;
    for (const auto& s : *list) {
      auto d = scalar_double(s);
      if (!d) type_error(section, key, "a list of numbers");
      out.push_back(*d);
    }
    return out;
  }
  type_error(section, key, "a list of numbers");
}

std::vector<std::string> ConfigDocument::unused() const {
  std::vector<std::string> out;
  for (const auto& [section, kv] : values_) {
    for (const auto& [key, v] : kv) {
      if (!used_.count({section, key})) out.push_back(section.empty() ? key : section + "." + key);
    }
  }
  return out;
}

}  // namespace deface
