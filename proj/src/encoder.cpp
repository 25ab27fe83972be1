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

#include "kgar/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace kgar {

namespace {

using ByteMatrix = RowMatrix<std::uint8_t>;

void require_shape(const ModelParams& params, const std::string& name, Index rows, Index cols) {
  if (!params.contains(name)) throw DimensionError("missing parameter '" + name + "'");
  const auto& v = params.at(name).value;
  if (v.rows() != rows || v.cols() != cols)
    throw DimensionError("parameter '" + name + "' has shape " + shape_str(v) + ", expected " + shape_str(rows, cols));
}

Matrix gather(const Matrix& m, const std::vector<EntityId>& ids, const std::vector<Index>& positions) {
  Matrix out(static_cast<Index>(positions.size()), m.cols());
  for (std::size_t k = 0; k < positions.size(); ++k)
    out.row(static_cast<Index>(k)) = m.row(ids[static_cast<std::size_t>(positions[k])]);
  return out;
}

// Consecutive nodes whose edges are processed together. Within a chunk the
// edges are grouped by relation so each relation's messages are one GEMM.
struct EdgeChunk {
  Index first_node = 0, end_node = 0;
  Index first_edge = 0, end_edge = 0;
  std::vector<std::pair<Index, std::vector<Index>>> groups;  // (relation, edge positions)
};

constexpr Index kChunkEdges = 2048;

std::vector<EdgeChunk> make_chunks(const DirectionalEdges& edges, Index num_relations) {
  std::vector<EdgeChunk> chunks;
  const auto n = static_cast<Index>(edges.offsets.size()) - 1;
  std::vector<std::vector<Index>> by_rel(static_cast<std::size_t>(num_relations));
  Index start = 0;
  for (Index i = 0; i < n; ++i) {
    const Index end_edge = edges.offsets[static_cast<std::size_t>(i) + 1];
    if (end_edge - edges.offsets[static_cast<std::size_t>(start)] < kChunkEdges && i + 1 < n) continue;
    EdgeChunk c{start, i + 1, edges.offsets[static_cast<std::size_t>(start)], end_edge, {}};
    for (Index e = c.first_edge; e < c.end_edge; ++e)
      by_rel[static_cast<std::size_t>(edges.relation[static_cast<std::size_t>(e)])].push_back(e);
    for (Index r = 0; r < num_relations; ++r)
      if (auto& v = by_rel[static_cast<std::size_t>(r)]; !v.empty()) c.groups.emplace_back(r, std::move(v)), v.clear();
    if (c.end_edge > c.first_edge) chunks.push_back(std::move(c));
    start = i + 1;
  }
  return chunks;
}

// State retained between the forward and backward pass of one directional
// convolution.
struct ConvContext {
  const DirectionalEdges* edges = nullptr;
  Index num_blocks = 1;
  Index dim = 0;
  double slope = 0.2;
  std::vector<Scalar> score;      // <a_i, a_j> before LeakyReLU
  std::vector<Scalar> alpha;      // softmax output
  std::vector<Scalar> att_keep;   // attention dropout multiplier (0 or 1/(1-p))
  ByteMatrix pass;                // 1 where dL/dz flows (kept by dropout and z >= 0)
  Scalar conv_scale = 1.0;
  std::vector<EdgeChunk> chunks;
};

}  // namespace

void EncoderConfig::validate() const {
  if (embed_dim <= 0) throw ConfigError("embed_dim must be positive");
  if (num_layers < 1) throw ConfigError("num_layers must be >= 1");
  if (num_blocks < 1) throw ConfigError("num_blocks must be >= 1");
  if (embed_dim % num_blocks != 0)
    throw ConfigError("num_blocks " + std::to_string(num_blocks) + " does not divide embed_dim " +
                      std::to_string(embed_dim));
  if (!(dropout_attention >= 0.0 && dropout_attention < 1.0)) throw ConfigError("dropout_attention must be in [0,1)");
  if (!(dropout_conv >= 0.0 && dropout_conv < 1.0)) throw ConfigError("dropout_conv must be in [0,1)");
  if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("leaky_slope must be in (0,1)");
}

// ---------------------------------------------------------------------------
// graph view

EncoderGraph EncoderGraph::from(const KnowledgeGraph& graph) {
  EncoderGraph g;
  g.num_entities = static_cast<Index>(graph.num_entities());
  g.num_relations = static_cast<Index>(graph.num_relations());
  for (auto d : kDirections) {
    auto& e = g.edges[static_cast<std::size_t>(direction_index(d))];
    e.direction = d;
    e.offsets.assign(graph.num_entities() + 1, 0);
    e.by_relation.assign(graph.num_relations(), {});
    for (std::size_t i = 0; i < graph.num_entities(); ++i) {
      auto slots = graph.neighbors(static_cast<EntityId>(i), d);
      e.offsets[i + 1] = e.offsets[i] + static_cast<Index>(slots.size());
      for (const auto& s : slots) {  // ordinal order
        e.by_relation[static_cast<std::size_t>(s.relation)].push_back(static_cast<Index>(e.source.size()));
        e.target.push_back(static_cast<EntityId>(i));
        e.source.push_back(s.neighbor);
        e.relation.push_back(s.relation);
      }
    }
    e.segment_offsets.push_back(0);
    std::vector<std::vector<Index>> local(graph.num_relations());
    for (std::size_t i = 0; i < graph.num_entities(); ++i) {
      for (Index k = e.offsets[i]; k < e.offsets[i + 1]; ++k)
        local[static_cast<std::size_t>(e.relation[static_cast<std::size_t>(k)])].push_back(k);
      for (auto& group : local) {
        if (group.empty()) continue;
        e.segment_edges.insert(e.segment_edges.end(), group.begin(), group.end());
        e.segment_offsets.push_back(static_cast<Index>(e.segment_edges.size()));
        group.clear();
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// parameters

std::string embedding_name() { return "entity_embedding"; }
std::string attention_name(int layer) { return "layer" + std::to_string(layer) + ".attention"; }
std::string self_loop_name(int layer) { return "layer" + std::to_string(layer) + ".self_loop"; }
std::string blocks_name(int layer, Direction d) {
  return "layer" + std::to_string(layer) + ".blocks." + direction_name(d);
}
std::string gates_name() { return "fusion.gates"; }

void add_encoder_params(ModelParams& params, const EncoderConfig& config, Index num_entities, Index num_relations,
                        std::mt19937_64& rng, bool regularize_blocks) {
  config.validate();
  const Index d = config.embed_dim;
  const Index bd = d / config.num_blocks;
  params.add_random(embedding_name(), num_entities, d, config.init, rng);
  for (int l = 0; l < config.num_layers; ++l) {
    params.add_random(attention_name(l), d, d, config.init, rng);
    params.add_random(self_loop_name(l), d, d, config.init, rng);
    for (auto dir : kDirections) {
      // each block is initialised with its own fan-in/fan-out
      Matrix stacked(num_relations * d, bd);
      const double std = config.init == InitScheme::scaled ? std::sqrt(2.0 / static_cast<double>(2 * bd)) : 1.0;
      std::normal_distribution<double> dist(0.0, std);
      for (Index i = 0; i < stacked.size(); ++i) stacked.data()[i] = dist(rng);
      params.add(blocks_name(l, dir), std::move(stacked), regularize_blocks);
    }
  }
  params.add(gates_name(), Matrix::Ones(num_relations, 1));
}

void check_encoder_params(const ModelParams& params, const EncoderConfig& config, Index num_entities,
                          Index num_relations) {
  const Index d = config.embed_dim;
  require_shape(params, embedding_name(), num_entities, d);
  for (int l = 0; l < config.num_layers; ++l) {
    require_shape(params, attention_name(l), d, d);
    require_shape(params, self_loop_name(l), d, d);
    for (auto dir : kDirections) require_shape(params, blocks_name(l, dir), num_relations * d, d / config.num_blocks);
  }
  require_shape(params, gates_name(), num_relations, 1);
}

// ---------------------------------------------------------------------------
// plain building blocks

Vector attention_coefficients(const Matrix& states, const Matrix& weight, EntityId node,
                              std::span<const NeighborSlot> neighbors, double slope) {
  if (neighbors.empty()) throw DimensionError("attention_coefficients: empty neighbor set");
  const RowVector<Scalar> ai = states.row(node) * weight;
  Vector e(static_cast<Index>(neighbors.size()));
  for (std::size_t k = 0; k < neighbors.size(); ++k) {
    const Scalar s = ai.dot(states.row(neighbors[k].neighbor) * weight);
    e(static_cast<Index>(k)) = s >= 0 ? s : slope * s;
  }
  softmax_inplace(std::span<Scalar>(e.data(), static_cast<std::size_t>(e.size())));
  return e;
}

Matrix assemble_block_weight(std::span<const Matrix> blocks) { return assemble_block_diagonal<Scalar>(blocks); }

std::vector<Matrix> relation_blocks(const Matrix& stacked, RelationId r, Index num_blocks) {
  const Index bout = stacked.cols();
  const Index din = bout * num_blocks;  // square layers: Din == Dout
  std::vector<Matrix> out;
  for (Index b = 0; b < num_blocks; ++b)
    out.emplace_back(stacked.block(r * din + b * (din / num_blocks), 0, din / num_blocks, bout));
  return out;
}

RowVector<Scalar> fuse_features(const Matrix& states, const RelationSparseMatrix& p, const Vector& gates) {
  if (static_cast<Index>(p.num_rows) != states.rows())
    throw DimensionError("fuse_features: sparse matrix has " + std::to_string(p.num_rows) + " rows, states " +
                         shape_str(states));
  std::vector<SparseMatrix::Entry> entries;
  for (const auto& e : p.entries) entries.push_back({e.row, e.col - 1, gates(e.relation)});
  SparseMatrix gated(static_cast<Index>(p.num_rows), static_cast<Index>(p.num_cols), std::move(entries));
  // p̂ᵀ·H has one row per incident edge; summing the rows gives the fused vector.
  Matrix per_edge = sparse_dense_matmul(gated, states, /*transpose=*/true);
  return per_edge.colwise().sum();
}

// ---------------------------------------------------------------------------
// differentiable layers

Var attention_conv(Var states, Var attended, Var self_term, Var blocks, const DirectionalEdges& edges,
                   const EncoderConfig& config, bool training, std::mt19937_64& rng, int layer) {
  auto& tape = states.tape();
  const Matrix& h = states.value();
  const Matrix& a = attended.value();
  const Matrix& q = blocks.value();
  const Index n = h.rows();
  const Index dim = h.cols();
  const Index nb = config.num_blocks;
  const Index ne = edges.num_edges();
  if (static_cast<Index>(edges.offsets.size()) != n + 1)
    throw DimensionError("attention_conv: edge list built for a different entity count");
  if (a.rows() != n || self_term.rows() != n || self_term.cols() != dim)
    throw DimensionError("attention_conv: attended " + shape_str(a) + " / self " + shape_str(self_term.value()) +
                         " vs states " + shape_str(h));
  if (q.cols() * nb != dim || q.rows() != static_cast<Index>(edges.by_relation.size()) * dim)
    throw DimensionError("attention_conv: blocks " + shape_str(q) + " incompatible with D=" + std::to_string(dim));

  auto ctx = std::make_shared<ConvContext>();
  ctx->edges = &edges;
  ctx->num_blocks = nb;
  ctx->dim = dim;
  ctx->slope = config.leaky_slope;
  ctx->score.resize(static_cast<std::size_t>(ne));
  ctx->alpha.resize(static_cast<std::size_t>(ne));

  // Attention: scores, LeakyReLU, softmax within each (node, relation) group.
  for (Index e = 0; e < ne; ++e) {
    const Scalar s = a.row(edges.target[static_cast<std::size_t>(e)]).dot(a.row(edges.source[static_cast<std::size_t>(e)]));
    ctx->score[static_cast<std::size_t>(e)] = s;
    ctx->alpha[static_cast<std::size_t>(e)] = s >= 0 ? s : config.leaky_slope * s;
  }
  std::vector<Scalar> group;
  for (std::size_t g = 0; g + 1 < edges.segment_offsets.size(); ++g) {
    const auto lo = static_cast<std::size_t>(edges.segment_offsets[g]);
    const auto hi = static_cast<std::size_t>(edges.segment_offsets[g + 1]);
    group.clear();
    for (auto k = lo; k < hi; ++k) group.push_back(ctx->alpha[static_cast<std::size_t>(edges.segment_edges[k])]);
    softmax_inplace(std::span<Scalar>(group));
    for (auto k = lo; k < hi; ++k) ctx->alpha[static_cast<std::size_t>(edges.segment_edges[k])] = group[k - lo];
  }
  ctx->att_keep.assign(static_cast<std::size_t>(ne), 1.0);
  if (training && config.dropout_attention > 0.0) {
    const Matrix keep = dropout_mask<Scalar>(1, ne, config.dropout_attention, rng);
    for (Index e = 0; e < ne; ++e) ctx->att_keep[static_cast<std::size_t>(e)] = keep(0, e);
  }

  // Relation messages h_j·W_r per chunk, one GEMM per relation present, then
  // each node's sum in ascending edge-ordinal order.
  ctx->chunks = make_chunks(edges, static_cast<Index>(edges.by_relation.size()));
  Matrix z = self_term.value();
  Matrix messages(std::min(ne, std::max<Index>(kChunkEdges, 1)), dim);
  for (const auto& c : ctx->chunks) {
    if (messages.rows() < c.end_edge - c.first_edge) messages.resize(c.end_edge - c.first_edge, dim);
    for (const auto& [r, pos] : c.groups) {
      const Matrix out = block_diagonal_product(gather(h, edges.source, pos), q, nb, r * dim);
      for (std::size_t k = 0; k < pos.size(); ++k) messages.row(pos[k] - c.first_edge) = out.row(static_cast<Index>(k));
    }
    for (Index i = c.first_node; i < c.end_node; ++i)
      for (Index e = edges.offsets[static_cast<std::size_t>(i)]; e < edges.offsets[static_cast<std::size_t>(i) + 1]; ++e) {
        const auto k = static_cast<std::size_t>(e);
        z.row(i).noalias() += (ctx->alpha[k] * ctx->att_keep[k]) * messages.row(e - c.first_edge);
      }
  }
  messages.resize(0, 0);

  // Conv dropout, ReLU and the backward pass mask in one sweep. Draws follow
  // the same row-major order as dropout_mask.
  ctx->pass.resize(n, dim);
  const bool drop = training && config.dropout_conv > 0.0;
  const auto threshold = drop ? static_cast<std::uint64_t>(std::ldexp(config.dropout_conv, 64)) : 0;
  const Scalar keep_scale = drop ? 1.0 / (1.0 - config.dropout_conv) : 1.0;
  ctx->conv_scale = keep_scale;
  Scalar* zd = z.data();
  std::uint8_t* pd = ctx->pass.data();
  for (Index k = 0; k < z.size(); ++k) {
    const bool kept = !drop || rng() >= threshold;
    const Scalar v = kept ? zd[k] * keep_scale : 0.0;
    pd[k] = kept && v >= 0.0;
    zd[k] = v > 0.0 ? v : 0.0;
  }

  if (!z.allFinite()) {
    for (Index i = 0; i < n; ++i)
      if (!z.row(i).allFinite())
        throw NumericError("layer " + std::to_string(layer) + " " + direction_name(edges.direction) +
                           " pass: non-finite state at node " + std::to_string(i));
  }

  return tape.record(std::move(z), {states, attended, self_term, blocks},
                     [&tape, ctx, states, attended, self_term, blocks](const Matrix& g) {
    const auto& edges = *ctx->edges;
    const Matrix& h = states.value();
    const Matrix& a = attended.value();
    const Matrix& q = blocks.value();
    const Index dim = ctx->dim;
    const Index nb = ctx->num_blocks;
    const Index bin = dim / nb;
    const Index ne = edges.num_edges();

    Matrix dz = g.cwiseProduct(ctx->pass.cast<Scalar>());
    if (ctx->conv_scale != 1.0) dz *= ctx->conv_scale;
    tape.accumulate(self_term, dz);

    const bool need_h = tape.requires_grad(states);
    const bool need_q = tape.requires_grad(blocks);
    Matrix* dh = need_h ? &tape.grad_buffer(states) : nullptr;
    Matrix* dq = need_q ? &tape.grad_buffer(blocks) : nullptr;

    // Messages are recomputed chunk by chunk rather than kept from the forward pass.
    std::vector<Scalar> dweight(static_cast<std::size_t>(ne), 0.0);  // dL/d(α·keep)
    for (const auto& c : ctx->chunks) {
      for (const auto& [r, pos] : c.groups) {
        const Index offset = r * dim;
        const Matrix rows = gather(h, edges.source, pos);
        const Matrix msg = block_diagonal_product(rows, q, nb, offset);
        Matrix dmsg(static_cast<Index>(pos.size()), dim);
        for (std::size_t k = 0; k < pos.size(); ++k) {
          const auto e = static_cast<std::size_t>(pos[k]);
          const auto dz_row = dz.row(edges.target[e]);
          dweight[e] = dz_row.dot(msg.row(static_cast<Index>(k)));
          dmsg.row(static_cast<Index>(k)) = (ctx->alpha[e] * ctx->att_keep[e]) * dz_row;
        }
        for (Index b = 0; b < nb; ++b) {
          auto qb = q.middleRows(offset + b * bin, bin);
          if (need_q)
            dq->middleRows(offset + b * bin, bin).noalias() +=
                rows.middleCols(b * bin, bin).transpose() * dmsg.middleCols(b * bin, bin);
          if (need_h) {
            const Matrix drows = dmsg.middleCols(b * bin, bin) * qb.transpose();
            for (std::size_t k = 0; k < pos.size(); ++k)
              dh->row(edges.source[static_cast<std::size_t>(pos[k])]).middleCols(b * bin, bin) +=
                  drows.row(static_cast<Index>(k));
          }
        }
      }
    }

    if (!tape.requires_grad(attended)) return;
    Matrix& da = tape.grad_buffer(attended);
    for (std::size_t g = 0; g + 1 < edges.segment_offsets.size(); ++g) {
      const auto lo = static_cast<std::size_t>(edges.segment_offsets[g]);
      const auto hi = static_cast<std::size_t>(edges.segment_offsets[g + 1]);
      // dα, then through the group softmax: de_k = α_k (dα_k − Σ α dα)
      Scalar inner = 0;
      for (auto j = lo; j < hi; ++j) {
        const auto k = static_cast<std::size_t>(edges.segment_edges[j]);
        inner += ctx->alpha[k] * dweight[k] * ctx->att_keep[k];
      }
      for (auto j = lo; j < hi; ++j) {
        const auto k = static_cast<std::size_t>(edges.segment_edges[j]);
        const Scalar dalpha = dweight[k] * ctx->att_keep[k];
        const Scalar de = ctx->alpha[k] * (dalpha - inner);
        const Scalar ds = ctx->score[k] >= 0 ? de : ctx->slope * de;
        const auto i = edges.target[k];
        const auto src = edges.source[k];
        da.row(i).noalias() += ds * a.row(src);
        da.row(src).noalias() += ds * a.row(i);
      }
    }
  });
}

LayerStates conv_layer(Tape& tape, Var states, ModelParams& params, int layer, const EncoderGraph& graph,
                       const EncoderConfig& config, bool training, std::mt19937_64& rng) {
  auto att_w = tape.parameter(params.at(attention_name(layer)));
  auto self_w = tape.parameter(params.at(self_loop_name(layer)));
  auto attended = matmul(states, att_w);
  auto self_term = matmul(states, self_w);
  LayerStates out;
  out.forward = attention_conv(states, attended, self_term, tape.parameter(params.at(blocks_name(layer, Direction::forward))),
                               graph[Direction::forward], config, training, rng, layer);
  out.backward = attention_conv(states, attended, self_term, tape.parameter(params.at(blocks_name(layer, Direction::backward))),
                                graph[Direction::backward], config, training, rng, layer);
  out.combined = add(out.forward, out.backward);
  return out;
}

Var fuse_features(Var states, Var gates, const EncoderGraph& graph) {
  auto& tape = states.tape();
  const Matrix& h = states.value();
  const Matrix& gv = gates.value();
  if (gv.rows() != graph.num_relations || gv.cols() != 1)
    throw DimensionError("fuse_features: gates " + shape_str(gv) + " for " + std::to_string(graph.num_relations) +
                         " relations");
  Matrix f = Matrix::Zero(h.rows(), h.cols());
  for (const auto& edges : graph.edges)
    for (Index e = 0; e < edges.num_edges(); ++e) {
      const auto k = static_cast<std::size_t>(e);
      f.row(edges.target[k]).noalias() += gv(edges.relation[k], 0) * h.row(edges.source[k]);
    }
  return tape.record(std::move(f), {states, gates}, [&tape, &graph, states, gates](const Matrix& g) {
    const Matrix& h = states.value();
    const Matrix& gv = gates.value();
    Matrix dgates = Matrix::Zero(gv.rows(), 1);
    const bool need_h = tape.requires_grad(states);
    Matrix* dh = need_h ? &tape.grad_buffer(states) : nullptr;
    for (const auto& edges : graph.edges)
      for (Index e = 0; e < edges.num_edges(); ++e) {
        const auto k = static_cast<std::size_t>(e);
        const auto gi = g.row(edges.target[k]);
        dgates(edges.relation[k], 0) += gi.dot(h.row(edges.source[k]));
        if (need_h) dh->row(edges.source[k]).noalias() += gv(edges.relation[k], 0) * gi;
      }
    tape.accumulate(gates, dgates);
  });
}

Var encode_states(Tape& tape, const EncoderGraph& graph, ModelParams& params, const EncoderConfig& config,
                  bool training, std::mt19937_64& rng) {
  config.validate();
  check_encoder_params(params, config, graph.num_entities, graph.num_relations);
  Var h = tape.parameter(params.at(embedding_name()));
  for (int l = 0; l < config.num_layers; ++l) h = conv_layer(tape, h, params, l, graph, config, training, rng).combined;
  return h;
}

Var encode(Tape& tape, const EncoderGraph& graph, ModelParams& params, const EncoderConfig& config, bool training,
           std::mt19937_64& rng) {
  Var h = encode_states(tape, graph, params, config, training, rng);
  return fuse_features(h, tape.parameter(params.at(gates_name())), graph);
}

}  // namespace kgar
