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

// Straight-line scalar reference for the encoder and decoders. Plain nested
// vectors and explicit loops; neighbor sets are found by scanning the triple
// list, block-diagonal weights are assembled densely. Only the parameter
// containers come from the library.

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "kgar/kg_data.hpp"
#include "kgar/params.hpp"

namespace kgar::oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat from_eigen(const Matrix& m) {
  Mat out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

inline Mat mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
  Mat c(n, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double s = 0;
      for (std::size_t t = 0; t < k; ++t) s += a[i][t] * b[t][j];
      c[i][j] = s;
    }
  return c;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Dense D x D block-diagonal weight of relation r from the stacked blocks.
inline Mat relation_weight(const Mat& stacked, int r, std::size_t dim, std::size_t blocks) {
  const std::size_t bin = dim / blocks, bout = stacked[0].size();
  Mat w(dim, std::vector<double>(bout * blocks, 0.0));
  for (std::size_t b = 0; b < blocks; ++b)
    for (std::size_t i = 0; i < bin; ++i)
      for (std::size_t j = 0; j < bout; ++j)
        w[b * bin + i][b * bout + j] = stacked[static_cast<std::size_t>(r) * dim + b * bin + i][j];
  return w;
}

struct Model {
  std::size_t num_entities = 0, num_relations = 0, dim = 0, blocks = 1;
  int layers = 1;
  double slope = 0.2;
  std::vector<Triple> triples;
  Mat embedding;
  std::vector<Mat> attention, self_loop, blocks_forward, blocks_backward;
  std::vector<double> gates;
};

inline Model load(const ModelParams& p, const std::vector<Triple>& triples, std::size_t num_entities,
                  std::size_t num_relations, std::size_t dim, std::size_t blocks, int layers) {
  Model m;
  m.num_entities = num_entities;
  m.num_relations = num_relations;
  m.dim = dim;
  m.blocks = blocks;
  m.layers = layers;
  m.triples = triples;
  m.embedding = from_eigen(p.at("entity_embedding").value);
  for (int l = 0; l < layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    m.attention.push_back(from_eigen(p.at(prefix + ".attention").value));
    m.self_loop.push_back(from_eigen(p.at(prefix + ".self_loop").value));
    m.blocks_forward.push_back(from_eigen(p.at(prefix + ".blocks.forward").value));
    m.blocks_backward.push_back(from_eigen(p.at(prefix + ".blocks.backward").value));
  }
  for (const auto& row : from_eigen(p.at("fusion.gates").value)) m.gates.push_back(row[0]);
  return m;
}

/// Attention weights of node i over the listed neighbors (in order).
inline std::vector<double> attention(const Mat& attended, std::size_t i, const std::vector<std::size_t>& nbrs,
                                     double slope) {
  std::vector<double> e;
  for (auto j : nbrs) {
    const double s = dot(attended[i], attended[j]);
    e.push_back(s >= 0 ? s : slope * s);
  }
  const double mx = *std::max_element(e.begin(), e.end());
  double sum = 0;
  for (auto& v : e) sum += (v = std::exp(v - mx));
  for (auto& v : e) v /= sum;
  return e;
}

/// One directional pass. forward: neighbors are heads of triples ending at i.
/// Attention is normalised within each relation's neighbors.
inline Mat directional(const Model& m, const Mat& h, int layer, bool forward) {
  const Mat a = mul(h, m.attention[static_cast<std::size_t>(layer)]);
  const Mat self = mul(h, m.self_loop[static_cast<std::size_t>(layer)]);
  const Mat& stacked = forward ? m.blocks_forward[static_cast<std::size_t>(layer)]
                               : m.blocks_backward[static_cast<std::size_t>(layer)];
  Mat out(m.num_entities, std::vector<double>(m.dim, 0.0));
  for (std::size_t i = 0; i < m.num_entities; ++i) {
    std::vector<double> z = self[i];
    for (std::size_t r = 0; r < m.num_relations; ++r) {
      std::vector<std::size_t> nbrs;
      for (const auto& t : m.triples) {
        const auto owner = static_cast<std::size_t>(forward ? t.tail : t.head);
        if (owner != i || static_cast<std::size_t>(t.relation) != r) continue;
        nbrs.push_back(static_cast<std::size_t>(forward ? t.head : t.tail));
      }
      if (nbrs.empty()) continue;
      const auto alpha = attention(a, i, nbrs, m.slope);
      const Mat w = relation_weight(stacked, static_cast<int>(r), m.dim, m.blocks);
      for (std::size_t k = 0; k < nbrs.size(); ++k) {
        const Mat msg = mul(Mat{h[nbrs[k]]}, w);
        for (std::size_t d = 0; d < m.dim; ++d) z[d] += alpha[k] * msg[0][d];
      }
    }
    for (std::size_t d = 0; d < m.dim; ++d) out[i][d] = z[d] > 0 ? z[d] : 0.0;
  }
  return out;
}

inline Mat final_states(const Model& m) {
  Mat h = m.embedding;
  for (int l = 0; l < m.layers; ++l) {
    const Mat f = directional(m, h, l, true);
    const Mat b = directional(m, h, l, false);
    for (std::size_t i = 0; i < m.num_entities; ++i)
      for (std::size_t d = 0; d < m.dim; ++d) h[i][d] = f[i][d] + b[i][d];
  }
  return h;
}

/// Gated neighbor readout: for every triple, the tail gains g_r·h_head and the
/// head gains g_r·h_tail.
inline Mat features(const Model& m) {
  const Mat h = final_states(m);
  Mat f(m.num_entities, std::vector<double>(m.dim, 0.0));
  for (const auto& t : m.triples) {
    const double g = m.gates[static_cast<std::size_t>(t.relation)];
    for (std::size_t d = 0; d < m.dim; ++d) {
      f[static_cast<std::size_t>(t.tail)][d] += g * h[static_cast<std::size_t>(t.head)][d];
      f[static_cast<std::size_t>(t.head)][d] += g * h[static_cast<std::size_t>(t.tail)][d];
    }
  }
  return f;
}

inline double complex_score(const std::vector<double>& s, const std::vector<double>& w_re,
                            const std::vector<double>& w_im, const std::vector<double>& o) {
  const std::size_t half = w_re.size();
  double total = 0;
  for (std::size_t d = 0; d < half; ++d) {
    const double sr = s[d], si = s[half + d], orr = o[d], oi = o[half + d];
    total += w_re[d] * sr * orr + w_re[d] * si * oi + w_im[d] * sr * oi - w_im[d] * si * orr;
  }
  return total;
}

inline double distmult_score(const std::vector<double>& s, const std::vector<double>& w, const std::vector<double>& o) {
  double total = 0;
  for (std::size_t d = 0; d < w.size(); ++d) total += w[d] * s[d] * o[d];
  return total;
}

inline std::vector<double> class_probabilities(const std::vector<double>& f, const Mat& head) {
  std::vector<double> logits(head[0].size(), 0.0);
  for (std::size_t k = 0; k < logits.size(); ++k)
    for (std::size_t d = 0; d < f.size(); ++d) logits[k] += f[d] * head[d][k];
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0;
  for (auto& v : logits) sum += (v = std::exp(v - mx));
  for (auto& v : logits) v /= sum;
  return logits;
}

inline double classification_loss(const std::vector<std::vector<double>>& probs, const std::vector<int>& labels) {
  double loss = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    loss -= std::log(std::max(probs[i][static_cast<std::size_t>(labels[i])], 1e-12));
  return loss;
}

inline double link_loss(const std::vector<double>& scores, const std::vector<int>& labels) {
  double loss = 0;
  for (std::size_t k = 0; k < scores.size(); ++k) {
    const double p = 1.0 / (1.0 + std::exp(-scores[k]));
    const double q = labels[k] == 1 ? p : 1.0 - p;
    loss -= std::log2(std::max(q, 1e-12));
  }
  return loss / static_cast<double>(scores.size());
}

}  // namespace kgar::oracle
