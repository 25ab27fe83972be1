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

#include "kgar/dataset.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <set>

namespace kgar {

namespace fs = std::filesystem;

fs::path resolve_dataset_dir(const std::string& name_or_path) {
  if (name_or_path.empty()) throw ConfigError("no dataset given");
  const fs::path direct(name_or_path);
  if (fs::is_directory(direct)) return direct;
  std::vector<fs::path> tried{direct};
  if (const char* root = std::getenv("KGAR_DATA_DIR"); root && *root) {
    const fs::path p = fs::path(root) / name_or_path;
    if (fs::is_directory(p)) return p;
    tried.push_back(p);
  }
  const fs::path local = fs::path("data") / name_or_path;
  if (fs::is_directory(local)) return local;
  tried.push_back(local);
  std::string msg = "dataset not found: " + name_or_path + " (tried";
  for (const auto& t : tried) msg += " " + t.string();
  throw DataError(msg + ")");
}

Settings read_dataset_conf(const fs::path& dir) {
  const auto path = dir / "dataset.conf";
  if (!fs::exists(path)) return {};
  return read_settings(path);
}

Task detect_task(const fs::path& dir) {
  const auto conf = read_dataset_conf(dir);
  if (auto it = conf.find("task"); it != conf.end()) return parse_task(it->second);
  return fs::exists(dir / "labels_train.tsv") ? Task::classify : Task::linkpred;
}

KnowledgeGraph Dataset::graph() const { return KnowledgeGraph(vocab.entities, vocab.relations, train); }

TripleSet Dataset::known() const {
  TripleSet s(train.begin(), train.end());
  s.insert(valid.begin(), valid.end());
  s.insert(test.begin(), test.end());
  return s;
}

namespace {

std::vector<RawTriple> read_split(const fs::path& path, bool required) {
  if (!fs::exists(path)) {
    if (required) throw IoError("missing dataset file " + path.string());
    return {};
  }
  return load_triples(path);
}

std::size_t remove_dropped(std::vector<RawTriple>& raw, const std::set<std::string>& drop,
                           std::set<std::string>& seen) {
  const auto before = raw.size();
  std::erase_if(raw, [&](const RawTriple& t) {
    if (!drop.count(t.relation)) return false;
    seen.insert(t.relation);
    return true;
  });
  return before - raw.size();
}

std::size_t remove_duplicates(std::vector<Triple>& triples) {
  const auto before = triples.size();
  triples = dedup_triples(triples);
  return before - triples.size();
}

std::size_t count_duplicates(const std::vector<Triple>& triples) {
  return triples.size() - dedup_triples(triples).size();
}

}  // namespace

Dataset load_dataset(const fs::path& dir, Task task, const std::vector<std::string>& drop, bool dedup) {
  Dataset d;
  d.dir = dir;
  d.name = fs::absolute(dir).lexically_normal().filename().string();
  if (d.name.empty()) d.name = fs::absolute(dir).lexically_normal().parent_path().filename().string();
  d.task = task;
  const bool linkpred = task == Task::linkpred;

  auto raw_train = read_split(dir / "train.tsv", true);
  auto raw_valid = read_split(dir / "valid.tsv", linkpred);
  auto raw_test = read_split(dir / "test.tsv", linkpred);
  if (raw_train.empty()) throw DataError((dir / "train.tsv").string() + " has no triples");

  const std::set<std::string> drop_set(drop.begin(), drop.end());
  std::set<std::string> seen;
  d.dropped_triples = remove_dropped(raw_train, drop_set, seen) + remove_dropped(raw_valid, drop_set, seen) +
                      remove_dropped(raw_test, drop_set, seen);
  for (const auto& n : drop_set)
    if (!seen.count(n)) d.unknown_drops.push_back(n);

  d.vocab = build_vocab(raw_train);
  extend_vocab(d.vocab, raw_valid);
  extend_vocab(d.vocab, raw_test);
  d.train = encode_triples(raw_train, d.vocab);
  d.valid = encode_triples(raw_valid, d.vocab);
  d.test = encode_triples(raw_test, d.vocab);
  if (dedup) {
    d.duplicate_triples = remove_duplicates(d.train) + remove_duplicates(d.valid) + remove_duplicates(d.test);
  } else {
    d.duplicate_triples = count_duplicates(d.train) + count_duplicates(d.valid) + count_duplicates(d.test);
  }

  if (!linkpred) {
    d.labels_train = load_labels(dir / "labels_train.tsv", d.vocab.entities, d.classes);
    d.labels_test = load_labels(dir / "labels_test.tsv", d.vocab.entities, d.classes);
    d.labels_train.num_classes = d.labels_test.num_classes = d.classes.size();
    if (d.labels_train.size() == 0) throw DataError((dir / "labels_train.tsv").string() + " has no labels");
  }
  return d;
}

// ---------------------------------------------------------------------------
// bundle

std::string file_checksum(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::istreambuf_iterator<char> it(in), end; it != end; ++it) {
    h ^= static_cast<unsigned char>(*it);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void write_vocab(const fs::path& path, const Vocabulary& v) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < v.size(); ++i) out << i << '\t' << v.name(static_cast<std::int32_t>(i)) << '\n';
}

void write_ids(const fs::path& path, const std::vector<Triple>& triples) {
  auto out = open_out(path);
  for (const auto& t : triples) out << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
}

void write_labels(const fs::path& path, const LabelSet& labels) {
  auto out = open_out(path);
  for (const auto& [e, c] : labels.pairs) out << e << '\t' << c << '\n';
}

void write_index(const fs::path& path, const KnowledgeGraph& g) {
  auto out = open_out(path);
  out << "node\tdirection\tordinal\tneighbor\trelation\n";
  for (std::size_t n = 0; n < g.num_entities(); ++n)
    for (auto dir : kDirections)
      for (const auto& s : g.neighbors(static_cast<EntityId>(n), dir))
        out << n << '\t' << direction_name(dir) << '\t' << s.ordinal << '\t' << s.neighbor << '\t' << s.relation
            << '\n';
}

}  // namespace

BundleSummary write_bundle(const Dataset& d) {
  BundleSummary s;
  s.dir = d.dir / "bundle";
  fs::create_directories(s.dir);
  s.num_entities = d.vocab.entities.size();
  s.num_relations = d.vocab.relations.size();
  s.num_train = d.train.size();
  s.num_valid = d.valid.size();
  s.num_test = d.test.size();
  s.num_labeled_train = d.labels_train.size();
  s.num_labeled_test = d.labels_test.size();
  s.num_classes = d.classes.size();

  std::vector<std::string> files;
  auto emit = [&](const std::string& name, auto&& writer) {
    writer(s.dir / name);
    files.push_back(name);
  };
  emit("entities.tsv", [&](const fs::path& p) { write_vocab(p, d.vocab.entities); });
  emit("relations.tsv", [&](const fs::path& p) { write_vocab(p, d.vocab.relations); });
  emit("train.ids.tsv", [&](const fs::path& p) { write_ids(p, d.train); });
  emit("valid.ids.tsv", [&](const fs::path& p) { write_ids(p, d.valid); });
  emit("test.ids.tsv", [&](const fs::path& p) { write_ids(p, d.test); });
  if (d.task == Task::classify) {
    emit("classes.tsv", [&](const fs::path& p) { write_vocab(p, d.classes); });
    emit("labels_train.ids.tsv", [&](const fs::path& p) { write_labels(p, d.labels_train); });
    emit("labels_test.ids.tsv", [&](const fs::path& p) { write_labels(p, d.labels_test); });
  }
  emit("index.tsv", [&](const fs::path& p) { write_index(p, d.graph()); });

  nlohmann::ordered_json m;
  m["dataset"] = d.name;
  m["task"] = task_name(d.task);
  m["num_entities"] = s.num_entities;
  m["num_relations"] = s.num_relations;
  m["num_train"] = s.num_train;
  m["num_valid"] = s.num_valid;
  m["num_test"] = s.num_test;
  if (d.task == Task::classify) {
    m["num_labeled_train"] = s.num_labeled_train;
    m["num_labeled_test"] = s.num_labeled_test;
    m["num_classes"] = s.num_classes;
  }
  m["dropped_triples"] = d.dropped_triples;
  m["duplicate_triples"] = d.duplicate_triples;
  nlohmann::ordered_json sums = nlohmann::ordered_json::object();
  std::string all;
  for (const auto& f : files) {
    const auto c = file_checksum(s.dir / f);
    sums[f] = c;
    all += c;
  }
  m["checksums"] = sums;
  open_out(s.dir / "manifest.json") << m.dump(2) << '\n';

  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : all) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  s.checksum = buf;
  return s;
}

}  // namespace kgar
