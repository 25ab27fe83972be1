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

#include "kgar/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>

namespace kgar {

namespace {

std::string entity_name(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "e%03d", id);
  return buf;
}

}  // namespace

SyntheticGraph generate_synthetic(const SyntheticOptions& o) {
  if (o.clusters < 2 || o.cluster_size < 4) throw ConfigError("synthetic graph needs >= 2 clusters of >= 4 entities");
  if (o.valid_fraction < 0 || o.test_fraction < 0 || o.valid_fraction + o.test_fraction >= 1)
    throw ConfigError("synthetic held-out fractions must be >= 0 and sum below 1");
  const int n = o.cluster_size, nc = o.clusters;
  auto id = [&](int c, int k) { return ((c % nc + nc) % nc) * n + ((k % n + n) % n); };

  SyntheticGraph g;
  g.patterns = {
      {"opposite", PatternKind::symmetric, "(c,k) <-> (c,k+size/2)"},
      {"mirror", PatternKind::symmetric, "(c,k) <-> (c,size-1-k)"},
      {"twin", PatternKind::symmetric, "(c,k) <-> (c xor 1,k)"},
      {"across", PatternKind::symmetric, "(c,k) <-> (c+clusters/2,k)"},
      {"next", PatternKind::antisymmetric, "(c,k) -> (c,k+1)"},
      {"skip2", PatternKind::antisymmetric, "(c,k) -> (c,k+2)"},
      {"skip3", PatternKind::antisymmetric, "(c,k) -> (c,k+3)"},
      {"next_cluster", PatternKind::antisymmetric, "(c,k) -> (c+1,k)"},
  };

  std::vector<std::pair<int, int>> edges[8];
  for (int c = 0; c < nc; ++c)
    for (int k = 0; k < n; ++k) {
      const int self = id(c, k);
      edges[0].push_back({self, id(c, k + n / 2)});
      if (k != n - 1 - k) edges[1].push_back({self, id(c, n - 1 - k)});
      edges[2].push_back({self, id(c ^ 1, k)});
      edges[3].push_back({self, id(c + nc / 2, k)});
      edges[4].push_back({self, id(c, k + 1)});
      edges[5].push_back({self, id(c, k + 2)});
      edges[6].push_back({self, id(c, k + 3)});
      edges[7].push_back({self, id(c + 1, k)});
    }

  std::set<std::tuple<int, int, int>> all;
  std::vector<std::tuple<int, int, int>> triples;  // (head, relation, tail)
  for (int r = 0; r < 8; ++r)
    for (auto [h, t] : edges[r])
      if (h != t && all.insert({h, r, t}).second) triples.push_back({h, r, t});

  std::mt19937_64 rng(o.seed);
  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);

  const auto n_valid = static_cast<std::size_t>(o.valid_fraction * static_cast<double>(triples.size()));
  const auto n_test = static_cast<std::size_t>(o.test_fraction * static_cast<double>(triples.size()));
  std::set<std::tuple<int, int, int>> held;
  std::vector<int> train_degree(static_cast<std::size_t>(nc * n), 0);
  for (auto [h, r, t] : triples) {
    ++train_degree[static_cast<std::size_t>(h)];
    ++train_degree[static_cast<std::size_t>(t)];
  }
  std::vector<char> split(triples.size(), 0);  // 0 train, 1 valid, 2 test
  std::size_t valid_count = 0, test_count = 0;
  for (auto i : order) {
    if (valid_count == n_valid && test_count == n_test) break;
    const auto [h, r, t] = triples[i];
    const bool symmetric = g.patterns[static_cast<std::size_t>(r)].kind == PatternKind::symmetric;
    if (symmetric && held.count({t, r, h})) continue;
    if (train_degree[static_cast<std::size_t>(h)] <= 2 || train_degree[static_cast<std::size_t>(t)] <= 2) continue;
    held.insert(triples[i]);
    --train_degree[static_cast<std::size_t>(h)];
    --train_degree[static_cast<std::size_t>(t)];
    if (test_count < n_test) {
      split[i] = 2;
      ++test_count;
    } else {
      split[i] = 1;
      ++valid_count;
    }
  }

  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto [h, r, t] = triples[i];
    RawTriple raw{entity_name(h), g.patterns[static_cast<std::size_t>(r)].relation, entity_name(t)};
    (split[i] == 0 ? g.train : split[i] == 1 ? g.valid : g.test).push_back(std::move(raw));
  }
  return g;
}

Settings synthetic_defaults() {
  // Tuned for the 200-entity graph: no dropout, Adam.
  return {
      {"task", "linkpred"},        {"embed_dim", "64"},       {"num_blocks", "8"},   {"num_layers", "2"},
      {"dropout_attention", "0"},  {"dropout_conv", "0"},     {"iterations", "6000"}, {"batch_size", "50"},
      {"learning_rate", "0.003"},  {"optimizer", "adam"},     {"eval_interval", "500"},
  };
}

void write_synthetic(const SyntheticGraph& g, const std::filesystem::path& dir, const Settings& conf) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + (dir / name).string());
    return out;
  };
  auto write_split = [&](const char* name, const std::vector<RawTriple>& triples) {
    auto out = open(name);
    for (const auto& t : triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  };
  write_split("train.tsv", g.train);
  write_split("valid.tsv", g.valid);
  write_split("test.tsv", g.test);
  {
    auto out = open("patterns.tsv");
    out << "# relation\tkind\trule\n";
    for (const auto& p : g.patterns)
      out << p.relation << '\t' << (p.kind == PatternKind::symmetric ? "symmetric" : "antisymmetric") << '\t'
          << p.rule << '\n';
  }
  auto out = open("dataset.conf");
  out << "# generated by `kgar synth`\n";
  for (const auto& [k, v] : conf) out << k << " = " << v << '\n';
}

std::map<std::string, PatternKind> read_patterns(const std::filesystem::path& dir) {
  const auto path = dir / "patterns.tsv";
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::map<std::string, PatternKind> out;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (line.empty() || line[0] == '#') continue;
    const auto a = line.find('\t');
    const auto b = line.find('\t', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields");
    const auto kind = line.substr(a + 1, b - a - 1);
    if (kind != "symmetric" && kind != "antisymmetric")
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": unknown pattern kind '" + kind + "'");
    out[line.substr(0, a)] = kind == "symmetric" ? PatternKind::symmetric : PatternKind::antisymmetric;
  }
  return out;
}

}  // namespace kgar
