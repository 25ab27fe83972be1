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

// Attention-weighted relational graph convolution.
//
// Row-vector convention throughout: a node state is a row h, and a weight W
// of shape Din x Dout maps it to h·W. For one layer and one direction d,
//
//   a_i   = h_i · W_att
//   e_ij  = LeakyReLU(<a_i, a_j>)                 over j in N_d(i)
//   α_ij  = softmax_j(e_ij)                       over j in N_d^r(i)
//   z_i   = Σ_r Σ_j α_ij · h_j · W_{r,d} + h_i · W_0
//   h'_i  = ReLU(dropout(z_i))
//
// with W_{r,d} = diag(Q_{1,r,d}, ..., Q_{B,r,d}). The layer output is the
// sum of the forward and backward directional states. After the last layer
// each node's features are read out through its relation sparse matrices:
// f_i = Σ_d Σ_{j in N_d(i)} g_{r(ij)} · h_j.
//
// Attention is folded into the relational sum: α replaces the fixed
// 1/|N_i^r| normaliser of a plain relational convolution, so it is normalised
// over each relation's neighbors of a node separately. Running attention
// as a separate stage ahead of the convolution would slot in here as a second
// layer type; it is not implemented.

#pragma once

#include <array>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "kgar/autodiff.hpp"
#include "kgar/kg_data.hpp"

namespace kgar {

struct EncoderConfig {
  Index embed_dim = 500;  // entity embedding width; every layer keeps this width
  int num_layers = 2;
  Index num_blocks = 10;
  double dropout_attention = 0.6;
  double dropout_conv = 0.4;
  double leaky_slope = 0.2;
  InitScheme init = InitScheme::scaled;

  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
};

/// One direction's edges, grouped by the receiving node in ordinal order.
struct DirectionalEdges {
  Direction direction = Direction::forward;
  std::vector<Index> offsets;          // |V|+1; edges of node i are [offsets[i], offsets[i+1])
  std::vector<EntityId> target;        // receiving node of each edge
  std::vector<EntityId> source;        // neighbor whose state is aggregated
  std::vector<RelationId> relation;
  std::vector<std::vector<Index>> by_relation;  // edge positions per relation, ascending
  // Attention normalisation groups: the edges of one (node, relation) pair.
  // Group g holds segment_edges[segment_offsets[g] .. segment_offsets[g+1]).
  std::vector<Index> segment_offsets;
  std::vector<Index> segment_edges;

  Index num_edges() const { return static_cast<Index>(source.size()); }
};

/// Read-only adjacency the encoder runs on.
struct EncoderGraph {
  Index num_entities = 0;
  Index num_relations = 0;
  std::array<DirectionalEdges, 2> edges;  // indexed by direction_index()

  static EncoderGraph from(const KnowledgeGraph& graph);
  const DirectionalEdges& operator[](Direction d) const { return edges[static_cast<std::size_t>(direction_index(d))]; }
};

// Parameter names.
std::string embedding_name();
std::string attention_name(int layer);
std::string self_loop_name(int layer);
std::string blocks_name(int layer, Direction d);
std::string gates_name();

/// Adds the embedding, per-layer weights, and fusion gates (initialised to 1).
/// Block parameters hold every relation's B blocks stacked vertically:
/// shape (|R|·D) x (D/B), relation r at rows [r·D, (r+1)·D).
void add_encoder_params(ModelParams& params, const EncoderConfig& config, Index num_entities, Index num_relations,
                        std::mt19937_64& rng, bool regularize_blocks);

/// Checks every encoder parameter's shape against config and graph sizes.
void check_encoder_params(const ModelParams& params, const EncoderConfig& config, Index num_entities,
                          Index num_relations);

// ---------------------------------------------------------------------------
// plain (non-differentiable) building blocks

/// Softmax-normalised attention of `node` over `neighbors` for states H and
/// shared weight W. The set must be nonempty. The encoder calls this per
/// (node, relation) neighbor set.
Vector attention_coefficients(const Matrix& states, const Matrix& weight, EntityId node,
                              std::span<const NeighborSlot> neighbors, double slope);

/// diag(Q_1..Q_B) as a dense matrix.
Matrix assemble_block_weight(std::span<const Matrix> blocks);

/// The B blocks of relation r from a stacked block parameter.
std::vector<Matrix> relation_blocks(const Matrix& stacked, RelationId r, Index num_blocks);

/// Fused readout of one node in one direction: Σ over columns of p̂ᵀ·H, where
/// p̂ carries gate g_r in place of relation id r. Zero-column p gives zero.
RowVector<Scalar> fuse_features(const Matrix& states, const RelationSparseMatrix& p, const Vector& gates);

// ---------------------------------------------------------------------------
// differentiable layers

/// Directional attention-weighted relational convolution. `attended` is H·W_att
/// and `self_term` is H·W_0, both computed once per layer and shared by the two
/// directions.
Var attention_conv(Var states, Var attended, Var self_term, Var blocks, const DirectionalEdges& edges,
                   const EncoderConfig& config, bool training, std::mt19937_64& rng, int layer);

struct LayerStates {
  Var forward;   // h'
  Var backward;  // h''
  Var combined;  // h' + h''
};

/// One full layer: shared attention/self-loop products, both directional
/// passes, and their sum.
LayerStates conv_layer(Tape& tape, Var states, ModelParams& params, int layer, const EncoderGraph& graph,
                       const EncoderConfig& config, bool training, std::mt19937_64& rng);

/// Gated neighbor readout over both directions.
Var fuse_features(Var states, Var gates, const EncoderGraph& graph);

/// Embedding lookup -> num_layers stacked layers -> fused readout. Returns
/// the |V| x D feature matrix.
Var encode(Tape& tape, const EncoderGraph& graph, ModelParams& params, const EncoderConfig& config, bool training,
           std::mt19937_64& rng);

/// Final layer states (before readout); used by diagnostics and tests.
Var encode_states(Tape& tape, const EncoderGraph& graph, ModelParams& params, const EncoderConfig& config,
                  bool training, std::mt19937_64& rng);

}  // namespace kgar
