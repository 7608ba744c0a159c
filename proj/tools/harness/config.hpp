/*
   Copyright 2026 The fbdg Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace fbdg::harness {

/// Flat "key = value" text with [section] headers. Keys are addressed as
/// "section.key"; keys before the first header live in section "".
/// Lines starting with '#' or ';' are comments.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<string>");
  static Config load(const std::string& path);

  /// Later values win.
  void merge(const Config& other);
  void set(const std::string& key, const std::string& value);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  double require_double(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  /// Keys present but never read.
  std::vector<std::string> unused_keys() const;
  /// Canonical "key = value" listing, sorted by key.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> used_;
  std::string origin_;

  const std::string* lookup(const std::string& key) const;
};

/// Locates a preset file NAME.cfg in, in order: $FBDG_PRESET_DIR, ./configs,
/// the source tree's configs directory, the installed data directory.
std::string find_preset(const std::string& name);

}  // namespace fbdg::harness
