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

#include "kgar/kg_data.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

namespace kgar {

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find('\t', start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

bool skippable(std::string_view line) {
  return line.empty() || line.front() == '#' ||
         line.find_first_not_of(" \t") == std::string_view::npos;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

const char* direction_name(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary Vocabulary::numbered(std::size_t n) {
  Vocabulary v;
  v.names_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) v.intern(std::to_string(i));
  return v;
}

Vocabulary Vocabulary::from_names(std::vector<std::string> names) {
  Vocabulary v;
  for (auto& n : names) {
    auto before = v.size();
    v.intern(n);
    if (v.size() == before) throw DataError("duplicate vocabulary entry: " + n);
  }
  return v;
}

std::int32_t Vocabulary::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  auto id = static_cast<std::int32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<std::int32_t> Vocabulary::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// KnowledgeGraph

KnowledgeGraph::KnowledgeGraph(Vocabulary entities, Vocabulary relations,
                               std::vector<Triple> triples)
    : entities_(std::move(entities)),
      relations_(std::move(relations)),
      triples_(std::move(triples)),
      index_(build_neighbor_indexes(triples_, entities_.size(), relations_.size())) {}

KnowledgeGraph KnowledgeGraph::from_ids(std::size_t num_entities, std::size_t num_relations,
                                        std::vector<Triple> triples) {
  return KnowledgeGraph(Vocabulary::numbered(num_entities), Vocabulary::numbered(num_relations),
                        std::move(triples));
}

std::span<const NeighborSlot> KnowledgeGraph::in_index(EntityId node) const {
  return index_.in.at(static_cast<std::size_t>(node));
}

std::span<const NeighborSlot> KnowledgeGraph::out_index(EntityId node) const {
  return index_.out.at(static_cast<std::size_t>(node));
}

// ---------------------------------------------------------------------------
// RelationSparseMatrix

std::optional<RelationId> RelationSparseMatrix::at(EntityId row, std::int32_t col) const {
  for (const auto& e : entries)
    if (e.row == row && e.col == col) return e.relation;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Operations

std::vector<RawTriple> load_triples(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  std::vector<RawTriple> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = strip_cr(line);
    if (skippable(view)) continue;
    auto fields = split_tabs(view);
    if (fields.size() != 3)
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected 3 tab-separated fields, got " +
                       std::to_string(fields.size()));
    out.push_back({std::string(fields[0]), std::string(fields[1]), std::string(fields[2])});
  }
  return out;
}

Vocabularies build_vocab(std::span<const RawTriple> raw) {
  if (raw.empty()) throw DataError("cannot build a vocabulary from an empty triple list");
  Vocabularies vocab;
  extend_vocab(vocab, raw);
  return vocab;
}

void extend_vocab(Vocabularies& vocab, std::span<const RawTriple> raw) {
  for (const auto& t : raw) {
    vocab.entities.intern(t.head);
    vocab.relations.intern(t.relation);
    vocab.entities.intern(t.tail);
  }
}

std::vector<Triple> encode_triples(std::span<const RawTriple> raw, const Vocabularies& vocab) {
  std::vector<Triple> out;
  out.reserve(raw.size());
  for (const auto& t : raw) {
    auto h = vocab.entities.find(t.head);
    auto r = vocab.relations.find(t.relation);
    auto o = vocab.entities.find(t.tail);
    if (!h || !r || !o)
      throw DataError("triple (" + t.head + ", " + t.relation + ", " + t.tail + ") not in vocabulary");
    out.push_back({*h, *r, *o});
  }
  return out;
}

std::vector<Triple> dedup_triples(std::span<const Triple> triples) {
  std::unordered_set<Triple, TripleHash> seen;
  std::vector<Triple> out;
  out.reserve(triples.size());
  for (const auto& t : triples)
    if (seen.insert(t).second) out.push_back(t);
  return out;
}

KnowledgeGraph drop_relations(const KnowledgeGraph& graph, const std::set<std::string>& names,
                              std::vector<std::string>* unknown) {
  std::vector<bool> dropped(graph.num_relations(), false);
  for (const auto& n : names) {
    if (auto id = graph.relations().find(n))
      dropped[static_cast<std::size_t>(*id)] = true;
    else if (unknown)
      unknown->push_back(n);
  }

  // Keep relations that are not dropped and still carry at least one triple.
  std::vector<bool> used(graph.num_relations(), false);
  for (const auto& t : graph.triples())
    if (!dropped[static_cast<std::size_t>(t.relation)]) used[static_cast<std::size_t>(t.relation)] = true;

  Vocabulary relations;
  std::vector<RelationId> remap(graph.num_relations(), -1);
  for (std::size_t r = 0; r < graph.num_relations(); ++r)
    if (used[r]) remap[r] = relations.intern(graph.relations().name(static_cast<RelationId>(r)));

  std::vector<Triple> kept;
  kept.reserve(graph.triples().size());
  for (const auto& t : graph.triples())
    if (used[static_cast<std::size_t>(t.relation)])
      kept.push_back({t.head, remap[static_cast<std::size_t>(t.relation)], t.tail});

  return KnowledgeGraph(graph.entities(), std::move(relations), std::move(kept));
}

NeighborIndexes build_neighbor_indexes(std::span<const Triple> triples, std::size_t num_entities,
                                       std::size_t num_relations) {
  NeighborIndexes idx;
  idx.in.resize(num_entities);
  idx.out.resize(num_entities);
  const auto n = static_cast<EntityId>(num_entities);
  const auto nr = static_cast<RelationId>(num_relations);
  for (std::size_t k = 0; k < triples.size(); ++k) {
    const auto& t = triples[k];
    if (t.head < 0 || t.head >= n || t.tail < 0 || t.tail >= n || t.relation < 0 || t.relation >= nr)
      throw DataError("triple #" + std::to_string(k) + " (" + std::to_string(t.head) + "," +
                      std::to_string(t.relation) + "," + std::to_string(t.tail) +
                      ") has an id out of range for |V|=" + std::to_string(num_entities) +
                      ", |R|=" + std::to_string(num_relations));
    auto& in = idx.in[static_cast<std::size_t>(t.tail)];
    in.push_back({t.head, t.relation, static_cast<std::int32_t>(in.size() + 1)});
    auto& out = idx.out[static_cast<std::size_t>(t.head)];
    out.push_back({t.tail, t.relation, static_cast<std::int32_t>(out.size() + 1)});
  }
  return idx;
}

RelationSparseMatrix build_relation_sparse(const KnowledgeGraph& graph, EntityId node,
                                           Direction direction) {
  RelationSparseMatrix m;
  m.owner = node;
  m.direction = direction;
  m.num_rows = graph.num_entities();
  auto slots = graph.neighbors(node, direction);
  m.num_cols = slots.size();
  m.entries.reserve(slots.size());
  for (const auto& s : slots) m.entries.push_back({s.neighbor, s.ordinal, s.relation});
  return m;
}

LabelSet load_labels(const std::filesystem::path& path, const Vocabulary& entities,
                     Vocabulary& classes) {
  auto in = open_or_throw(path);
  LabelSet labels;
  std::unordered_map<EntityId, ClassId> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto view = strip_cr(line);
    if (skippable(view)) continue;
    auto fields = split_tabs(view);
    auto where = path.string() + ":" + std::to_string(lineno);
    if (fields.size() != 2)
      throw ParseError(where + ": expected 2 tab-separated fields, got " + std::to_string(fields.size()));
    auto entity = entities.find(fields[0]);
    if (!entity) throw DataError(where + ": unknown entity '" + std::string(fields[0]) + "'");
    auto cls = classes.intern(fields[1]);
    auto [it, fresh] = seen.emplace(*entity, cls);
    if (!fresh) {
      if (it->second != cls) throw DataError(where + ": conflicting label for '" + std::string(fields[0]) + "'");
      continue;
    }
    labels.pairs.emplace_back(*entity, cls);
  }
  labels.num_classes = classes.size();
  return labels;
}

}  // namespace kgar
