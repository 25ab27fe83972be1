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

// Small link-prediction graph with planted relation patterns.
//
// Entities sit in clusters arranged on a ring; position k in cluster c is
// entity c*size+k. Symmetric relations pair entities both ways, the
// antisymmetric ones shift positions (or clusters) in one direction only, so
// the reverse of an antisymmetric triple is never true.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "kgar/config.hpp"
#include "kgar/kg_data.hpp"

namespace kgar {

enum class PatternKind { symmetric, antisymmetric };

struct RelationPattern {
  std::string relation;
  PatternKind kind = PatternKind::symmetric;
  std::string rule;
};

struct SyntheticOptions {
  int clusters = 20;
  int cluster_size = 10;
  double valid_fraction = 0.1;
  double test_fraction = 0.1;
  std::uint64_t seed = 13;
};

struct SyntheticGraph {
  std::vector<RelationPattern> patterns;
  std::vector<RawTriple> train, valid, test;
};

/// Held-out symmetric triples always keep their reverse in train.
SyntheticGraph generate_synthetic(const SyntheticOptions& options);

/// Writes train/valid/test.tsv, patterns.tsv and dataset.conf.
void write_synthetic(const SyntheticGraph& graph, const std::filesystem::path& dir, const Settings& conf);

/// Training settings shipped with the synthetic graph.
Settings synthetic_defaults();

/// relation name -> kind, read from <dir>/patterns.tsv.
std::map<std::string, PatternKind> read_patterns(const std::filesystem::path& dir);

}  // namespace kgar
