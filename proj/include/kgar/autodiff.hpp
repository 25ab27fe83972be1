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

// Reverse-mode differentiation over a per-forward-pass tape.
//
// Each recorded node holds its value and a closure that, given dL/d(node),
// accumulates into its inputs' gradients. Tape::backward walks the nodes in
// reverse creation order, which is a valid topological order because inputs
// always exist before the nodes that consume them. A node's gradient buffer
// is released as soon as its closure has run; parameter leaves flush into
// Parameter::grad.

#pragma once

#include <deque>
#include <functional>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "kgar/params.hpp"
#include "kgar/tensor.hpp"

namespace kgar {

class Tape;

/// Handle to a tape node.
class Var {
 public:
  Var() = default;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  /// Value of a 1x1 node.
  Scalar scalar() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  /// Receives dL/d(output); must call accumulate() for each input it differentiates.
  using Backward = std::function<void(const Matrix& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var parameter(Parameter& p);

  /// Records an op output. `inputs` determines whether a gradient is needed.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  const Matrix& value(Var v) const {
    const auto& n = nodes_[v.id()];
    return n.param ? n.param->value : n.value;
  }

  /// Adds g into v's gradient (no-op for constants).
  void accumulate(Var v, const Eigen::Ref<const Matrix>& g);
  /// Zero-initialised gradient buffer for in-place scatter updates. Only valid
  /// when requires_grad(v).
  Matrix& grad_buffer(Var v);

  /// Seeds dL/dL = 1 on a 1x1 node and runs every closure in reverse order.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    bool requires_grad = false;
    Backward backward;
    Parameter* param = nullptr;
  };

  std::deque<Node> nodes_;
};

// ================================================================
// differentiable ops
// ================================================================

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var scale(Var a, Scalar s);
Var hadamard(Var a, Var b);
Var relu(Var x);
Var leaky_relu(Var x, Scalar slope);
Var sigmoid(Var x);
/// Inverted dropout. Identity when !training or rate == 0.
Var dropout(Var x, double rate, bool training, std::mt19937_64& rng);
Var softmax_rows(Var x);
Var gather_rows(Var x, std::span<const Index> rows);
Var sparse_dense_matmul(const SparseMatrix& s, Var d, bool transpose = false);
/// Sum of all entries, as a 1x1 node.
Var sum(Var x);

/// coefficient * Σ over parameters flagged `regularized` of Σ w².
Var l2_penalty(Tape& tape, ModelParams& params, Scalar coefficient);

/// Throws NumericError if any entry of v is NaN or infinite.
void check_finite(const Matrix& m, const std::string& what);

}  // namespace kgar
