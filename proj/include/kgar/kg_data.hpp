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

#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kgar/types.hpp"

namespace kgar {

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  auto operator<=>(const Triple&) const = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept {
    std::uint64_t h = static_cast<std::uint32_t>(t.head);
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(t.relation);
    h = h * 0x9E3779B97F4A7C15ULL ^ static_cast<std::uint32_t>(t.tail);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

struct RawTriple {
  std::string head;
  std::string relation;
  std::string tail;

  bool operator==(const RawTriple&) const = default;
};

/// Which of a node's two neighbor sets an edge belongs to.
///   forward:  the node is the tail; the neighbor is the head of the edge.
///   backward: the node is the head; the neighbor is the tail.
enum class Direction { forward, backward };

constexpr Direction kDirections[] = {Direction::forward, Direction::backward};

constexpr int direction_index(Direction d) { return d == Direction::forward ? 0 : 1; }

const char* direction_name(Direction d);

struct NeighborSlot {
  EntityId neighbor = 0;
  RelationId relation = 0;
  std::int32_t ordinal = 0;  // 1-based, contiguous per node and direction

  bool operator==(const NeighborSlot&) const = default;
};

/// Bijection between names and contiguous ids, in first-appearance order.
class Vocabulary {
 public:
  Vocabulary() = default;

  static Vocabulary numbered(std::size_t n);
  static Vocabulary from_names(std::vector<std::string> names);

  std::int32_t intern(std::string_view name);
  std::optional<std::int32_t> find(std::string_view name) const;
  const std::string& name(std::int32_t id) const { return names_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

  bool operator==(const Vocabulary& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

struct Vocabularies {
  Vocabulary entities;
  Vocabulary relations;
};

struct NeighborIndexes {
  std::vector<std::vector<NeighborSlot>> in;   // node as tail
  std::vector<std::vector<NeighborSlot>> out;  // node as head
};

/// Immutable triple store with vocabularies and directional neighbor indexes.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;
  KnowledgeGraph(Vocabulary entities, Vocabulary relations, std::vector<Triple> triples);

  /// Graph over anonymous ids 0..n-1 (names are the decimal ids).
  static KnowledgeGraph from_ids(std::size_t num_entities, std::size_t num_relations,
                                 std::vector<Triple> triples);

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }
  const std::vector<Triple>& triples() const { return triples_; }
  const Vocabulary& entities() const { return entities_; }
  const Vocabulary& relations() const { return relations_; }

  std::span<const NeighborSlot> in_index(EntityId node) const;
  std::span<const NeighborSlot> out_index(EntityId node) const;
  std::span<const NeighborSlot> neighbors(EntityId node, Direction d) const {
    return d == Direction::forward ? in_index(node) : out_index(node);
  }

 private:
  Vocabulary entities_;
  Vocabulary relations_;
  std::vector<Triple> triples_;
  NeighborIndexes index_;
};

/// Per-node incidence structure: rows are entities, columns are the node's
/// incident edges in one direction, values are relation ids.
struct RelationSparseMatrix {
  struct Entry {
    EntityId row = 0;
    std::int32_t col = 0;  // 1-based edge ordinal
    RelationId relation = 0;
  };

  EntityId owner = 0;
  Direction direction = Direction::forward;
  std::vector<Entry> entries;
  std::size_t num_rows = 0;
  std::size_t num_cols = 0;

  /// Stored relation id at (row, col), or nullopt for a structural zero.
  std::optional<RelationId> at(EntityId row, std::int32_t col) const;
};

struct LabelSet {
  std::vector<std::pair<EntityId, ClassId>> pairs;  // in file order
  std::size_t num_classes = 0;

  std::size_t size() const { return pairs.size(); }
};

/// Reads a 3-column TSV. Blank lines and lines starting with '#' are skipped.
std::vector<RawTriple> load_triples(const std::filesystem::path& path);

/// First-appearance numbering of entities and relations. Throws on empty input.
Vocabularies build_vocab(std::span<const RawTriple> raw);

/// Extends existing vocabularies with any new names (first-appearance order).
void extend_vocab(Vocabularies& vocab, std::span<const RawTriple> raw);

std::vector<Triple> encode_triples(std::span<const RawTriple> raw, const Vocabularies& vocab);

/// Removes exact duplicates, keeping the first occurrence.
std::vector<Triple> dedup_triples(std::span<const Triple> triples);

/// Removes every triple whose relation name is listed, recompacting the relation
/// vocabulary. Unknown names are reported through `unknown` (if given) and
/// otherwise ignored. Entity ids are preserved.
KnowledgeGraph drop_relations(const KnowledgeGraph& graph, const std::set<std::string>& names,
                              std::vector<std::string>* unknown = nullptr);

/// Ordinals are assigned in triple order. Throws DataError on out-of-range ids.
NeighborIndexes build_neighbor_indexes(std::span<const Triple> triples, std::size_t num_entities,
                                       std::size_t num_relations);

RelationSparseMatrix build_relation_sparse(const KnowledgeGraph& graph, EntityId node,
                                           Direction direction);

/// Reads `entity<TAB>class` lines. Class ids continue from `classes`, so
/// train/test label files loaded in sequence share one numbering.
LabelSet load_labels(const std::filesystem::path& path, const Vocabulary& entities,
                     Vocabulary& classes);

}  // namespace kgar
