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

// Shared toy graphs and parameter fillers for the test binaries.

#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "kgar/decoders.hpp"
#include "kgar/encoder.hpp"
#include "kgar/kg_data.hpp"

namespace kgar::testing {

/// 6 nodes, 3 relations, every node has edges in both directions.
inline std::vector<Triple> toy_triples() {
  return {{0, 0, 1}, {1, 1, 2}, {2, 2, 0}, {3, 0, 4}, {4, 1, 5}, {5, 2, 3},
          {0, 1, 3}, {2, 0, 5}, {1, 2, 4}, {4, 0, 0}, {5, 1, 1}};
}

inline KnowledgeGraph toy_graph() { return KnowledgeGraph::from_ids(6, 3, toy_triples()); }

/// Small config with dropout off so passes are deterministic.
inline EncoderConfig toy_config(Index dim = 4, Index blocks = 2, int layers = 2) {
  EncoderConfig c;
  c.embed_dim = dim;
  c.num_blocks = blocks;
  c.num_layers = layers;
  c.dropout_attention = 0.0;
  c.dropout_conv = 0.0;
  return c;
}

/// Deterministic parameter values: entry k of a parameter is
/// scale·sin(0.7·k + phase). Reproducible without any RNG, which lets
/// the frozen reference values be regenerated elsewhere.
inline void fill_wave(Parameter& p, double scale, double phase) {
  for (Index k = 0; k < p.value.size(); ++k) p.value.data()[k] = scale * std::sin(0.7 * static_cast<double>(k) + phase);
}

/// Overwrites every parameter with fill_wave, phase taken from its index in
/// insertion order. Gates become 1 + 0.25·sin(...).
inline void fill_all_wave(ModelParams& params, double scale = 0.5) {
  int idx = 0;
  for (auto& p : params) {
    fill_wave(p, scale, 0.3 * idx++);
    if (p.name == gates_name()) p.value.array() += 1.0;
  }
}

/// Adds uniform noise in [-1,1]·scale to every entry, for randomized checks.
inline void jitter(ModelParams& params, std::mt19937_64& rng, double scale) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (auto& p : params)
    for (Index k = 0; k < p.value.size(); ++k) p.value.data()[k] += scale * u(rng);
}

/// m uniformly drawn triples over n entities and r relations (repeats allowed).
inline std::vector<Triple> random_triples(std::mt19937_64& rng, int n, int r, int m) {
  std::uniform_int_distribution<int> ent(0, n - 1), rel(0, r - 1);
  std::vector<Triple> out;
  for (int k = 0; k < m; ++k) out.push_back({ent(rng), rel(rng), ent(rng)});
  return out;
}

/// Fresh empty directory under the system temp dir, unique per process.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("kgar_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream(path, std::ios::binary) << text;
}

inline std::string toy_tsv(const std::vector<Triple>& triples) {
  static const char* rel[] = {"likes", "knows", "cites"};
  std::string out;
  for (const auto& t : triples)
    out += "e" + std::to_string(t.head) + "\t" + rel[t.relation] + "\te" + std::to_string(t.tail) + "\n";
  return out;
}

/// Link prediction dataset over the toy graph with a tiny model config.
inline std::filesystem::path write_toy_linkpred(const std::string& name) {
  auto dir = scratch_dir(name);
  write_file(dir / "train.tsv", toy_tsv(toy_triples()));
  write_file(dir / "valid.tsv", toy_tsv({{0, 2, 4}, {3, 1, 1}}));
  write_file(dir / "test.tsv", toy_tsv({{1, 0, 5}, {2, 1, 3}}));
  write_file(dir / "dataset.conf",
             "task = linkpred\nembed_dim = 4\nnum_blocks = 2\niterations = 30\nbatch_size = 5\n"
             "eval_interval = 10\nlearning_rate = 0.05\n");
  return dir;
}

/// Classification dataset over the toy graph.
inline std::filesystem::path write_toy_classify(const std::string& name) {
  auto dir = scratch_dir(name);
  write_file(dir / "train.tsv", toy_tsv(toy_triples()));
  write_file(dir / "labels_train.tsv", "e0\ta\ne1\tb\ne2\ta\ne3\tb\n");
  write_file(dir / "labels_test.tsv", "e4\ta\ne5\tb\n");
  write_file(dir / "dataset.conf", "embed_dim = 4\nnum_blocks = 2\niterations = 20\nlearning_rate = 0.05\n");
  return dir;
}

}  // namespace kgar::testing
