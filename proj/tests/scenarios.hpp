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

// Toy-graph end-to-end scenarios shared by the unit tests and the acceptance
// runner.

#pragma once

#include <cstring>
#include <random>

#include "fixtures.hpp"
#include "kgar/grad_check.hpp"
#include "kgar/training.hpp"

namespace kgar::testing {

inline RunConfig toy_run_config(Task task) {
  RunConfig c;
  c.task = task;
  c.dataset_name = "toy";
  c.embed_dim = 4;
  c.num_blocks = 2;
  c.num_layers = 2;
  c.dropout_attention = 0.0;
  c.dropout_conv = 0.0;
  c.l2 = task == Task::classify ? 0.0005 : 0.01;
  c.learning_rate = 0.05;
  c.iterations = 200;
  c.batch_size = task == Task::classify ? 0 : 10;
  c.eval_interval = 0;
  return c;
}

inline LabeledNodes toy_labels() { return {{0, 1, 2, 3, 4, 5}, {0, 1, 2, 0, 1, 2}}; }

/// Max relative error of the full classification objective (encoder, head,
/// cross-entropy, L2) on the toy graph, dropout off.
inline GradCheckResult classification_grad_check(std::uint64_t seed = 3) {
  const auto config = toy_run_config(Task::classify);
  const auto graph = EncoderGraph::from(toy_graph());
  std::mt19937_64 rng(seed);
  auto params = init_model(config, 6, 3, 3, rng);
  jitter(params, rng, 0.3);
  const auto labels = toy_labels();
  return grad_check(
      [&](Tape& t, ModelParams& p) {
        std::mt19937_64 unused(0);
        auto f = encode(t, graph, p, config.encoder(), true, unused);
        auto probs = classify_forward(f, t.parameter(p.at(class_head_name())), labels.nodes);
        return add(classification_loss(probs, labels.labels), l2_penalty(t, p, config.l2));
      },
      params);
}

/// Same for the link objective (encoder, decoder, base-2 BCE, decoder L2 and
/// entity-feature penalty).
inline GradCheckResult link_grad_check(DecoderKind kind, std::uint64_t seed = 4) {
  auto config = toy_run_config(Task::linkpred);
  config.decoder = kind;
  const auto graph = EncoderGraph::from(toy_graph());
  std::mt19937_64 rng(seed);
  auto params = init_model(config, 6, 3, 0, rng);
  jitter(params, rng, 0.3);
  const auto triples = toy_triples();
  const auto samples = sample_negatives(triples, 6, rng);
  return grad_check(
      [&](Tape& t, ModelParams& p) {
        std::mt19937_64 unused(0);
        auto f = encode(t, graph, p, config.encoder(), true, unused);
        auto loss = link_loss(link_scores(t, f, p, kind, samples), samples);
        loss = add(loss, l2_penalty(t, p, config.l2));
        return add(loss, entity_feature_penalty(f, samples, config.l2));
      },
      params);
}

/// Train on the toy graph with dropout on (so the RNG stream matters).
inline TrainResult toy_training(Task task, std::uint64_t seed) {
  auto config = toy_run_config(task);
  config.seed = seed;
  config.dropout_attention = 0.3;
  config.dropout_conv = 0.3;
  config.iterations = 50;
  const auto graph = EncoderGraph::from(toy_graph());
  if (task == Task::classify) return train_classifier(config, graph, 3, toy_labels(), {});
  const auto triples = toy_triples();
  const TripleSet known(triples.begin(), triples.end());
  return train_link_predictor(config, graph, triples, {}, known);
}

inline bool bit_identical(const ModelParams& a, const ModelParams& b) {
  if (a.size() != b.size()) return false;
  auto ia = a.begin();
  for (auto ib = b.begin(); ib != b.end(); ++ia, ++ib) {
    if (ia->name != ib->name || ia->value.rows() != ib->value.rows() || ia->value.cols() != ib->value.cols())
      return false;
    if (std::memcmp(ia->value.data(), ib->value.data(), sizeof(Scalar) * static_cast<std::size_t>(ia->value.size())))
      return false;
  }
  return true;
}

}  // namespace kgar::testing
