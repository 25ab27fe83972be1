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

// Dataset directories on disk.
//
//   <dir>/train.tsv               triples the encoder runs on
//   <dir>/valid.tsv, test.tsv     held-out triples (link prediction)
//   <dir>/labels_train.tsv        entity<TAB>class (classification)
//   <dir>/labels_test.tsv
//   <dir>/dataset.conf            optional per-dataset key=value defaults
//
// Preprocessing writes a bundle under <dir>/bundle.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "kgar/config.hpp"
#include "kgar/evaluation.hpp"

namespace kgar {

/// An existing path is used as is; otherwise the name is looked up under
/// $KGAR_DATA_DIR, then under ./data. Throws DataError when nothing matches.
std::filesystem::path resolve_dataset_dir(const std::string& name_or_path);

/// dataset.conf, or empty settings when the file is absent.
Settings read_dataset_conf(const std::filesystem::path& dir);

/// Task named in dataset.conf; otherwise classify when labels_train.tsv exists.
Task detect_task(const std::filesystem::path& dir);

struct Dataset {
  std::string name;
  std::filesystem::path dir;
  Task task = Task::classify;
  Vocabularies vocab;
  Vocabulary classes;
  std::vector<Triple> train, valid, test;
  LabelSet labels_train, labels_test;
  std::vector<std::string> unknown_drops;  // drop names not present in any split
  std::size_t dropped_triples = 0;
  std::size_t duplicate_triples = 0;      // removed only when dedup is set

  KnowledgeGraph graph() const;
  /// train ∪ valid ∪ test.
  TripleSet known() const;
};

/// Reads the split files the task needs, removing triples whose relation is
/// listed in `drop` before ids are assigned. Entity and relation ids follow
/// first appearance across train, valid, test in that order.
Dataset load_dataset(const std::filesystem::path& dir, Task task, const std::vector<std::string>& drop, bool dedup);

struct BundleSummary {
  std::filesystem::path dir;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::size_t num_train = 0, num_valid = 0, num_test = 0;
  std::size_t num_labeled_train = 0, num_labeled_test = 0, num_classes = 0;
  std::string checksum;  // over every bundle file, in write order
};

/// Writes vocabularies, id-encoded splits, the neighbor index, and
/// manifest.json into <dataset.dir>/bundle. Re-running on unchanged input
/// writes identical bytes.
BundleSummary write_bundle(const Dataset& dataset);

/// 64-bit FNV-1a of a file's bytes, as 16 hex digits.
std::string file_checksum(const std::filesystem::path& path);

}  // namespace kgar
