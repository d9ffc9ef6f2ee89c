/* Copyright 2026 The augnas Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "augnas/data.hpp"
#include "augnas/search.hpp"

namespace augnas::cli {

// Flat key=value run configuration validated against a fixed schema.
class RunConfig {
 public:
  // All keys at their defaults.
  RunConfig();

  // Lines are `key = value`; blank lines and lines starting with '#' are
  // skipped. Throws ValueError naming the line for malformed input and
  // unknown keys (with the closest known key as a suggestion).
  static RunConfig from_text(std::string_view text);
  static RunConfig from_file(const std::string& path);

  // Accepts `key=value`.
  void set(std::string_view assignment);
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;

  // Resolved configuration, one sorted `key = value` line per entry.
  std::string to_text() const;

  // Input channels and class count come from the dataset.
  NetworkConfig network(const Dataset& data) const;
  SearchConfig search(std::uint64_t seed) const;
  FinalTrainConfig final_train(std::uint64_t seed) const;
  PreprocessConfig preprocess() const;
  std::vector<ArchOpId> arch_ops() const;
  std::vector<ImageOpId> aug_ops() const;
  Dataset dataset() const;
  Splits splits(const Dataset& data) const;

  // Parses every typed key once; throws ValueError on the first bad value.
  void validate() const;

 private:
  int get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::vector<std::string> get_list(const std::string& key) const;

  std::map<std::string, std::string> values_;
};

// Closest schema key by edit distance, empty when nothing is close.
std::string suggest_key(std::string_view key);
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace augnas::cli
