/*
 * Copyright 2026 The kgar Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Run configuration. Settings arrive as flat key=value layers that are merged
// in increasing precedence (global defaults, dataset.conf, config file, command
// line) and then parsed and range-checked in one place.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kgar/decoders.hpp"
#include "kgar/encoder.hpp"

namespace kgar {

enum class Task { classify, linkpred };
enum class OptimizerKind { gd, adam };

const char* task_name(Task t);
Task parse_task(const std::string& s);

using Settings = std::map<std::string, std::string>;

struct RunConfig {
  std::filesystem::path dataset_dir;
  std::string dataset_name;
  Task task = Task::classify;
  Index embed_dim = 500;
  int num_layers = 2;
  Index num_blocks = 10;
  double dropout_attention = 0.6;
  double dropout_conv = 0.4;
  double l2 = 0.0005;
  double learning_rate = 0.01;
  Index batch_size = 0;  // 0 = every labeled training node
  int iterations = 100;
  std::uint64_t seed = 1;
  DecoderKind decoder = DecoderKind::complex;
  InitScheme init = InitScheme::scaled;
  bool filtered_negatives = false;
  OptimizerKind optimizer = OptimizerKind::gd;
  int eval_interval = 0;  // 0 = only at the end
  std::vector<std::string> drop_relations;
  bool dedup = false;

  /// Throws ConfigError naming the first out-of-range field.
  void validate() const;
  EncoderConfig encoder() const;
  /// key=value lines for every field, in the order of config_fields().
  Settings to_settings() const;
};

struct ConfigField {
  std::string key;
  std::string help;
  std::string classify_default;
  std::string linkpred_default;
  std::string provenance;
};

/// Every recognised key with per-task defaults and where the default comes from.
const std::vector<ConfigField>& config_fields();

/// Reads `key = value` lines; '#' at line start or after whitespace starts a
/// comment. Throws ParseError with
/// path:line on a line without '=' or with an unknown key.
Settings read_settings(const std::filesystem::path& path);

/// Later layers override earlier ones. The task is taken from the merged
/// layers (default classify) and selects the per-task defaults for any key
/// left unset.
RunConfig resolve_config(const std::vector<Settings>& layers);

}  // namespace kgar
