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

#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "kgar/encoder.hpp"

using namespace kgar;
using namespace kgar::testing;

namespace {

ModelParams make_params(const EncoderConfig& c, Index n, Index r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams p;
  add_encoder_params(p, c, n, r, rng, false);
  return p;
}

Matrix run_encode(const KnowledgeGraph& g, ModelParams& p, const EncoderConfig& c) {
  std::mt19937_64 rng(0);
  Tape t;
  return encode(t, EncoderGraph::from(g), p, c, false, rng).value();
}

Matrix run_states(const KnowledgeGraph& g, ModelParams& p, const EncoderConfig& c) {
  std::mt19937_64 rng(0);
  Tape t;
  return encode_states(t, EncoderGraph::from(g), p, c, false, rng).value();
}

double max_abs_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_SUITE("encoder") {

TEST_CASE("config validation") {
  EncoderConfig c;
  CHECK_NOTHROW(c.validate());
  c.num_blocks = 7;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = EncoderConfig{};
  c.num_layers = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = EncoderConfig{};
  c.dropout_attention = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("parameter shapes") {
  auto c = toy_config(4, 2, 2);
  auto p = make_params(c, 6, 3, 1);
  CHECK(p.at(embedding_name()).value.rows() == 6);
  CHECK(p.at(blocks_name(1, Direction::backward)).value.rows() == 3 * 4);
  CHECK(p.at(blocks_name(1, Direction::backward)).value.cols() == 2);
  CHECK((p.at(gates_name()).value.array() == 1.0).all());
  CHECK_NOTHROW(check_encoder_params(p, c, 6, 3));
  CHECK_THROWS_AS(check_encoder_params(p, c, 7, 3), DimensionError);
}

TEST_CASE("attention coefficients") {
  Matrix h(3, 2);
  h << 0.3, -0.2, 0.5, 0.1, 0.5, 0.1;
  const Matrix w = Matrix::Identity(2, 2);
  std::vector<NeighborSlot> two{{1, 0, 1}, {2, 0, 2}};
  auto a = attention_coefficients(h, w, 0, two, 0.2);
  CHECK(a(0) == doctest::Approx(0.5));
  CHECK(a(1) == doctest::Approx(0.5));

  std::vector<NeighborSlot> one{{2, 0, 1}};
  CHECK(attention_coefficients(h, w, 0, one, 0.2)(0) == 1.0);
  CHECK_THROWS_AS(attention_coefficients(h, w, 0, std::span<const NeighborSlot>{}, 0.2), DimensionError);
}

TEST_CASE("attention coefficients match exp(LeakyReLU(dot)) / sum") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix h(4, 4);
  for (Index k = 0; k < h.size(); ++k) h.data()[k] = u(rng);
  std::vector<NeighborSlot> nbrs{{1, 0, 1}, {2, 1, 2}, {3, 0, 3}};
  auto a = attention_coefficients(h, Matrix::Identity(4, 4), 0, nbrs, 0.2);
  double e[3], total = 0;
  for (int k = 0; k < 3; ++k) {
    const double d = h.row(0).dot(h.row(k + 1));
    e[k] = std::exp(d >= 0 ? d : 0.2 * d);
    total += e[k];
  }
  for (int k = 0; k < 3; ++k) CHECK(std::abs(a(k) - e[k] / total) < 1e-10);
}

TEST_CASE("block-diagonal assembly") {
  std::vector<Matrix> two{Matrix::Constant(1, 1, 1.0), Matrix::Constant(1, 1, 2.0)};
  Matrix expect(2, 2);
  expect << 1, 0, 0, 2;
  CHECK(assemble_block_weight(two) == expect);

  Matrix q(2, 3);
  q << 1, 2, 3, 4, 5, 6;
  std::vector<Matrix> single{q};
  CHECK(assemble_block_weight(single) == q);

  std::vector<Matrix> bad{Matrix::Zero(1, 1), Matrix::Zero(2, 2)};
  CHECK_THROWS_AS(assemble_block_weight(bad), DimensionError);
}

TEST_CASE("blockwise product equals the dense assembled product") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  Matrix stacked(8, 2), x(5, 8);
  for (Index k = 0; k < stacked.size(); ++k) stacked.data()[k] = u(rng);
  for (Index k = 0; k < x.size(); ++k) x.data()[k] = u(rng);
  auto blocks = relation_blocks(stacked, 0, 4);
  Matrix w = assemble_block_weight(blocks);
  CHECK(w.rows() == 8);
  CHECK(w.cols() == 8);
  CHECK((block_diagonal_product(x, stacked, 4) - x * w).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("self-loop only node") {
  auto c = toy_config(4, 2, 1);
  auto g = KnowledgeGraph::from_ids(1, 1, {});
  auto p = make_params(c, 1, 1, 4);
  p.at(self_loop_name(0)).value = Matrix::Identity(4, 4);
  Matrix h(1, 4);
  h << 0.5, -1.0, 2.0, -0.1;
  p.at(embedding_name()).value = h;
  std::mt19937_64 rng(0);
  Tape t;
  auto eg = EncoderGraph::from(g);
  auto out = conv_layer(t, t.parameter(p.at(embedding_name())), p, 0, eg, c, false, rng);
  CHECK(out.forward.value() == relu(h));
  CHECK(out.backward.value() == relu(h));
}

TEST_CASE("one neighbor with identity relation weight") {
  auto c = toy_config(4, 1, 1);
  auto g = KnowledgeGraph::from_ids(2, 1, {{1, 0, 0}});
  auto p = make_params(c, 2, 1, 5);
  p.at(self_loop_name(0)).value.setZero();
  p.at(blocks_name(0, Direction::forward)).value = Matrix::Identity(4, 4);
  Matrix h(2, 4);
  h << 0, 0, 0, 0, 0.5, -1.0, 2.0, -0.1;
  p.at(embedding_name()).value = h;
  std::mt19937_64 rng(0);
  Tape t;
  auto out = conv_layer(t, t.parameter(p.at(embedding_name())), p, 0, EncoderGraph::from(g), c, false, rng);
  CHECK(out.forward.value().row(0) == relu(h.row(1)));
}

TEST_CASE("fuse_features on a node's sparse matrix") {
  Matrix h(4, 2);
  h << 1, 2, 3, 4, 5, 6, 7, 8;
  auto g = KnowledgeGraph::from_ids(4, 3, {{1, 0, 0}, {2, 1, 0}, {3, 2, 0}});
  auto p = build_relation_sparse(g, 0, Direction::forward);

  SUBCASE("one edge, unit gate") {
    auto g1 = KnowledgeGraph::from_ids(4, 3, {{2, 1, 0}});
    Vector gates = Vector::Ones(3);
    CHECK(fuse_features(h, build_relation_sparse(g1, 0, Direction::forward), gates) == h.row(2));
  }
  SUBCASE("zero gates") { CHECK(fuse_features(h, p, Vector::Zero(3)).isZero(0.0)); }
  SUBCASE("three edges, gates 0.5 / 1 / 2") {
    Vector gates(3);
    gates << 0.5, 1.0, 2.0;
    auto f = fuse_features(h, p, gates);
    for (Index d = 0; d < 2; ++d) CHECK(std::abs(f(d) - (0.5 * h(1, d) + 1.0 * h(2, d) + 2.0 * h(3, d))) < 1e-10);
  }
  SUBCASE("no edges") {
    auto isolated = build_relation_sparse(g, 1, Direction::forward);
    CHECK(fuse_features(h, isolated, Vector::Ones(3)).isZero(0.0));
  }
}

TEST_CASE("one layer, self-loop identity, zero elsewhere") {
  // Each direction contributes relu(G) through the self-loop, so the layer
  // output is 2·relu(G) and the readout routes it through the gates.
  auto c = toy_config(6, 2, 1);
  auto g = toy_graph();
  auto p = make_params(c, 6, 3, 6);
  for (auto& prm : p) prm.value.setZero();
  p.at(self_loop_name(0)).value = Matrix::Identity(6, 6);
  Matrix emb = Matrix::Identity(6, 6);
  emb(2, 2) = -1.0;
  p.at(embedding_name()).value = emb;
  Vector gates(3);
  gates << 1.0, 0.5, -2.0;
  p.at(gates_name()).value = gates;
  Matrix f = run_encode(g, p, c);
  Matrix states = 2.0 * relu(emb);
  Matrix expect = Matrix::Zero(6, 6);
  for (const auto& t : g.triples()) {
    expect.row(t.tail) += gates(t.relation) * states.row(t.head);
    expect.row(t.head) += gates(t.relation) * states.row(t.tail);
  }
  CHECK(max_abs_diff(f, expect) < 1e-12);
}

TEST_CASE("training-mode encode is deterministic for a seed") {
  auto c = toy_config(4, 2, 2);
  c.dropout_attention = 0.5;
  c.dropout_conv = 0.5;
  auto g = EncoderGraph::from(toy_graph());
  auto p = make_params(c, 6, 3, 7);
  auto once = [&](std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Tape t;
    return Matrix(encode(t, g, p, c, true, rng).value());
  };
  CHECK(once(3) == once(3));
  CHECK(once(3) != once(4));
}

// ---------------------------------------------------------------------------
// properties over random graphs

TEST_CASE("attention over each neighbor set sums to one") {
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 10), r = 1 + static_cast<int>(rng() % 3);
    auto g = KnowledgeGraph::from_ids(static_cast<std::size_t>(n), static_cast<std::size_t>(r),
                                      random_triples(rng, n, r, 3 * n));
    auto c = toy_config(4, 2, 1);
    auto p = make_params(c, n, r, rng());
    const Matrix& h = p.at(embedding_name()).value;
    const Matrix& w = p.at(attention_name(0)).value;
    for (EntityId i = 0; i < n; ++i)
      for (Direction d : kDirections)
        for (RelationId rel = 0; rel < r; ++rel) {
          std::vector<NeighborSlot> set;
          for (const auto& s : g.neighbors(i, d))
            if (s.relation == rel) set.push_back(s);
          if (set.empty()) continue;
          CHECK(std::abs(attention_coefficients(h, w, i, set, 0.2).sum() - 1.0) < 1e-9);
        }
  }
}

TEST_CASE("assembled relation weights are exactly zero off the blocks") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 50; ++trial) {
    const Index nb = 1 + static_cast<Index>(rng() % 5), bs = 1 + static_cast<Index>(rng() % 4);
    std::vector<Matrix> blocks;
    for (Index b = 0; b < nb; ++b) {
      Matrix q(bs, bs);
      for (Index k = 0; k < q.size(); ++k) q.data()[k] = u(rng) + 2.0;  // never zero
      blocks.push_back(q);
    }
    Matrix w = assemble_block_weight(blocks);
    for (Index i = 0; i < w.rows(); ++i)
      for (Index j = 0; j < w.cols(); ++j) {
        if (i / bs == j / bs)
          CHECK(w(i, j) != 0.0);
        else
          CHECK(w(i, j) == 0.0);
      }
  }
}

TEST_CASE("encodings are equivariant under entity relabeling") {
  std::mt19937_64 rng(32);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 8), r = 1 + static_cast<int>(rng() % 3);
    auto triples = random_triples(rng, n, r, 3 * n);
    std::vector<EntityId> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Triple> moved;
    for (const auto& t : triples) moved.push_back({perm[static_cast<std::size_t>(t.head)], t.relation,
                                                   perm[static_cast<std::size_t>(t.tail)]});
    auto c = toy_config(4, 2, 2);
    auto p = make_params(c, n, r, rng());
    auto q = make_params(c, n, r, 0);
    for (auto& prm : q) prm.value = p.at(prm.name).value;
    for (int i = 0; i < n; ++i)
      q.at(embedding_name()).value.row(perm[static_cast<std::size_t>(i)]) = p.at(embedding_name()).value.row(i);

    Matrix a = run_encode(KnowledgeGraph::from_ids(static_cast<std::size_t>(n), static_cast<std::size_t>(r), triples), p, c);
    Matrix b = run_encode(KnowledgeGraph::from_ids(static_cast<std::size_t>(n), static_cast<std::size_t>(r), moved), q, c);
    for (int i = 0; i < n; ++i) CHECK((a.row(i) - b.row(perm[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("zeroing a relation's blocks equals deleting its edges") {
  std::mt19937_64 rng(33);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 8), r = 2 + static_cast<int>(rng() % 3);
    auto triples = random_triples(rng, n, r, 3 * n);
    const RelationId gone = static_cast<RelationId>(rng() % static_cast<unsigned>(r));
    std::vector<Triple> kept;
    for (const auto& t : triples)
      if (t.relation != gone) kept.push_back(t);
    const auto N = static_cast<std::size_t>(n), R = static_cast<std::size_t>(r);
    auto c = toy_config(4, 2, 2);
    auto p = make_params(c, n, r, rng());
    for (int l = 0; l < c.num_layers; ++l)
      for (Direction d : kDirections) p.at(blocks_name(l, d)).value.middleRows(gone * 4, 4).setZero();

    CHECK(max_abs_diff(run_states(KnowledgeGraph::from_ids(N, R, triples), p, c),
                       run_states(KnowledgeGraph::from_ids(N, R, kept), p, c)) < 1e-9);
    // The readout carries relation identity only through the gate.
    p.at(gates_name()).value(gone, 0) = 0.0;
    CHECK(max_abs_diff(run_encode(KnowledgeGraph::from_ids(N, R, triples), p, c),
                       run_encode(KnowledgeGraph::from_ids(N, R, kept), p, c)) < 1e-9);
  }
}

TEST_CASE("symmetric edge sets with tied weights give equal directional states") {
  std::mt19937_64 rng(34);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 8), r = 1 + static_cast<int>(rng() % 3);
    std::vector<Triple> triples;
    for (const auto& t : random_triples(rng, n, r, 2 * n)) {
      triples.push_back(t);
      triples.push_back({t.tail, t.relation, t.head});
    }
    auto c = toy_config(4, 2, 1);
    auto p = make_params(c, n, r, rng());
    p.at(blocks_name(0, Direction::backward)).value = p.at(blocks_name(0, Direction::forward)).value;
    auto g = EncoderGraph::from(KnowledgeGraph::from_ids(static_cast<std::size_t>(n), static_cast<std::size_t>(r), triples));
    std::mt19937_64 unused(0);
    Tape t;
    auto out = conv_layer(t, t.parameter(p.at(embedding_name())), p, 0, g, c, false, unused);
    CHECK(max_abs_diff(out.forward.value(), out.backward.value()) < 1e-9);
  }
}

}  // TEST_SUITE
