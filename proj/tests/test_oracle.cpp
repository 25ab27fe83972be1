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

// Library forward passes against the scalar reference (random parameters) and
// against values frozen from the numpy reference (wave parameters).

#include <cmath>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracle/frozen_values.hpp"
#include "oracle/scalar_oracle.hpp"

using namespace kgar;
using namespace kgar::testing;

namespace {

constexpr Index kDim = 4, kBlocks = 2, kClasses = 3;
constexpr int kLayers = 2;

const std::vector<Triple> kNegatives{{3, 0, 1}, {1, 1, 0}, {2, 2, 4}, {5, 0, 4}, {4, 1, 2}, {0, 2, 3}};
const std::vector<EntityId> kClassNodes{0, 2, 5};
const std::vector<ClassId> kClassLabels{1, 0, 2};

std::vector<TrainingSample> toy_samples() {
  std::vector<TrainingSample> s;
  auto t = toy_triples();
  for (int k = 0; k < 6; ++k) s.push_back({t[static_cast<std::size_t>(k)], 1});
  for (const auto& n : kNegatives) s.push_back({n, 0});
  return s;
}

enum class Head { complex, distmult, classes };

ModelParams toy_params(Head head, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams p;
  add_encoder_params(p, toy_config(kDim, kBlocks, kLayers), 6, 3, rng, false);
  if (head == Head::classes)
    add_classifier_params(p, kDim, kClasses, rng);
  else
    add_link_decoder_params(p, head == Head::complex ? DecoderKind::complex : DecoderKind::distmult, kDim, 3, rng,
                            true);
  return p;
}

oracle::Model oracle_model(const ModelParams& p) {
  return oracle::load(p, toy_triples(), 6, 3, kDim, kBlocks, kLayers);
}

Matrix library_features(ModelParams& p) {
  std::mt19937_64 rng(0);
  Tape t;
  return encode(t, EncoderGraph::from(toy_graph()), p, toy_config(kDim, kBlocks, kLayers), false, rng).value();
}

/// Random parameters with fusion gates spread around 1 and enough scale that
/// most ReLUs are active.
ModelParams random_toy_params(Head head, std::uint64_t seed) {
  auto p = toy_params(head, seed);
  std::mt19937_64 rng(seed + 1000);
  jitter(p, rng, 0.3);
  return p;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("encoder features match the scalar reference") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto p = random_toy_params(Head::complex, seed);
    const Matrix f = library_features(p);
    const auto expect = oracle::features(oracle_model(p));
    for (Index i = 0; i < 6; ++i)
      for (Index d = 0; d < kDim; ++d)
        CHECK(std::abs(f(i, d) - expect[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]) < 1e-10);
  }
}

TEST_CASE("single conv layer matches the scalar reference") {
  auto p = random_toy_params(Head::complex, 77);
  auto model = oracle_model(p);
  const auto expect = oracle::directional(model, model.embedding, 0, true);
  std::mt19937_64 rng(0);
  Tape t;
  auto out = conv_layer(t, t.parameter(p.at(embedding_name())), p, 0, EncoderGraph::from(toy_graph()),
                        toy_config(kDim, kBlocks, kLayers), false, rng);
  for (Index i = 0; i < 6; ++i)
    for (Index d = 0; d < kDim; ++d)
      CHECK(std::abs(out.forward.value()(i, d) - expect[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)]) <
            1e-10);
}

TEST_CASE("decoders match the scalar reference") {
  const auto samples = toy_samples();
  std::vector<int> labels;
  for (const auto& s : samples) labels.push_back(s.label);

  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SUBCASE("complex") {
      auto p = random_toy_params(Head::complex, seed);
      const Matrix f = library_features(p);
      Tape t;
      auto scores = link_scores(t, t.constant(f), p, DecoderKind::complex, samples);
      auto model = oracle_model(p);
      const auto of = oracle::features(model);
      const auto re = oracle::from_eigen(p.at(relation_real_name()).value);
      const auto im = oracle::from_eigen(p.at(relation_imag_name()).value);
      std::vector<double> expect;
      for (const auto& s : samples)
        expect.push_back(oracle::complex_score(of[static_cast<std::size_t>(s.triple.head)],
                                               re[static_cast<std::size_t>(s.triple.relation)],
                                               im[static_cast<std::size_t>(s.triple.relation)],
                                               of[static_cast<std::size_t>(s.triple.tail)]));
      for (std::size_t k = 0; k < samples.size(); ++k)
        CHECK(std::abs(scores.value()(static_cast<Index>(k), 0) - expect[k]) < 1e-8);
      CHECK(std::abs(link_loss(scores, samples).scalar() - oracle::link_loss(expect, labels)) < 1e-8);
    }
    SUBCASE("distmult") {
      auto p = random_toy_params(Head::distmult, seed);
      const Matrix f = library_features(p);
      Tape t;
      auto scores = link_scores(t, t.constant(f), p, DecoderKind::distmult, samples);
      const auto of = oracle::features(oracle_model(p));
      const auto w = oracle::from_eigen(p.at(relation_diag_name()).value);
      for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto& tr = samples[k].triple;
        const double expect = oracle::distmult_score(of[static_cast<std::size_t>(tr.head)],
                                                     w[static_cast<std::size_t>(tr.relation)],
                                                     of[static_cast<std::size_t>(tr.tail)]);
        CHECK(std::abs(scores.value()(static_cast<Index>(k), 0) - expect) < 1e-8);
      }
    }
    SUBCASE("classification") {
      auto p = random_toy_params(Head::classes, seed);
      const Matrix f = library_features(p);
      Tape t;
      auto probs = classify_forward(t.constant(f), t.constant(p.at(class_head_name()).value), kClassNodes);
      const auto of = oracle::features(oracle_model(p));
      const auto head = oracle::from_eigen(p.at(class_head_name()).value);
      std::vector<std::vector<double>> expect;
      for (auto node : kClassNodes) expect.push_back(oracle::class_probabilities(of[static_cast<std::size_t>(node)], head));
      for (std::size_t i = 0; i < kClassNodes.size(); ++i)
        for (std::size_t k = 0; k < static_cast<std::size_t>(kClasses); ++k)
          CHECK(std::abs(probs.value()(static_cast<Index>(i), static_cast<Index>(k)) - expect[i][k]) < 1e-10);
      CHECK(std::abs(classification_loss(probs, kClassLabels).scalar() -
                     oracle::classification_loss(expect, kClassLabels)) < 1e-8);
    }
  }
}

TEST_CASE("frozen reference values") {
  const auto samples = toy_samples();

  auto p = toy_params(Head::complex, 0);
  fill_all_wave(p);
  const Matrix f = library_features(p);
  for (Index i = 0; i < 6; ++i)
    for (Index d = 0; d < kDim; ++d) CHECK(std::abs(f(i, d) - frozen::kFeatures[i][d]) < 1e-10);
  {
    Tape t;
    auto scores = link_scores(t, t.constant(f), p, DecoderKind::complex, samples);
    for (Index k = 0; k < scores.rows(); ++k) CHECK(std::abs(scores.value()(k, 0) - frozen::kComplexScores[k]) < 1e-10);
    CHECK(std::abs(link_loss(scores, samples).scalar() - frozen::kComplexLinkLoss) < 1e-10);
  }

  auto q = toy_params(Head::distmult, 0);
  fill_all_wave(q);
  {
    Tape t;
    auto scores = link_scores(t, t.constant(library_features(q)), q, DecoderKind::distmult, samples);
    for (Index k = 0; k < scores.rows(); ++k)
      CHECK(std::abs(scores.value()(k, 0) - frozen::kDistMultScores[k]) < 1e-10);
    CHECK(std::abs(link_loss(scores, samples).scalar() - frozen::kDistMultLinkLoss) < 1e-10);
  }

  auto c = toy_params(Head::classes, 0);
  fill_all_wave(c);
  {
    Tape t;
    auto probs = classify_forward(t.constant(library_features(c)), t.constant(c.at(class_head_name()).value),
                                  kClassNodes);
    for (Index i = 0; i < 3; ++i)
      for (Index k = 0; k < kClasses; ++k)
        CHECK(std::abs(probs.value()(i, k) - frozen::kClassProbabilities[i][k]) < 1e-10);
    CHECK(std::abs(classification_loss(probs, kClassLabels).scalar() - frozen::kClassificationLoss) < 1e-10);
  }
}

}  // TEST_SUITE
