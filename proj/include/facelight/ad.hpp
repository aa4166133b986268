// Copyright 2026 The Facelight Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "facelight/param_tape.hpp"

#include <Eigen/Core>

#include <deque>
#include <functional>
#include <span>
#include <vector>

namespace facelight {
class MonotoneCubic;
}

/// Batched reverse-mode differentiation. Every value is a dense
/// Eigen::ArrayXXd laid out features x samples; the graph records one node
/// per batched op, so cost per op is amortized over the batch.
///
/// Binary elementwise ops broadcast a 1-row or 1-column operand (or a 1x1
/// scalar) against the other operand. Derivatives that are themselves needed
/// as values (normals, Jacobians) are built from ordinary ops, so they are
/// differentiable in turn.
namespace facelight::ad {

using Array = Eigen::ArrayXXd;
using Eigen::Index;

class Graph;

class Node {
 public:
  Node() = default;
  Node(Graph* graph, int id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  int id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }
  const Array& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const { return value()(0, 0); }

 private:
  Graph* graph_ = nullptr;
  int id_ = -1;
};

/// Accumulates into parents' gradients given this node's id and gradient.
using BackwardFn = std::function<void(Graph&, int self, const Array& grad)>;

class Graph {
 public:
  explicit Graph(bool requires_grad = true) : requires_grad_(requires_grad) {}
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool requires_grad() const { return requires_grad_; }

  Node constant(Array value);
  Node constant(double value);
  /// Leaf whose gradient is kept and readable through grad() after backward.
  Node variable(Array value);
  /// Leaf mapped onto a ParamTape slice, reshaped column-major to rows x cols.
  Node parameter(const ParamTape& tape, ParamSlice slice, Index rows, Index cols);

  /// Records an op result. The backward function is kept only when some
  /// parent needs a gradient.
  Node make(Array value, std::initializer_list<Node> parents, BackwardFn backward);
  Node make(Array value, std::span<const Node> parents, BackwardFn backward);

  const Array& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }
  bool needs_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].needs_grad; }
  void accumulate(int id, const Array& grad);

  /// Reverse sweep from a 1x1 node. Parameter gradients are added to
  /// `param_grad` (length of the ParamTape).
  void backward(const Node& loss, Eigen::Ref<Eigen::VectorXd> param_grad);
  /// Reverse sweep without parameters (variables only).
  void backward(const Node& loss);
  /// Gradient of the last backward with respect to `n`; empty when unreached.
  const Array& grad(const Node& n) const { return nodes_[static_cast<std::size_t>(n.id())].grad; }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Entry {
    Array value;
    Array grad;
    BackwardFn backward;
    Index param_offset = -1;
    bool needs_grad = false;
    bool keep_grad = false;
  };
  Node push(Entry e);

  bool requires_grad_;
  std::deque<Entry> nodes_;
};

inline const Array& Node::value() const { return graph_->value(id_); }

// Elementwise arithmetic with broadcasting.
Node operator+(const Node& a, const Node& b);
Node operator-(const Node& a, const Node& b);
Node operator*(const Node& a, const Node& b);
Node operator/(const Node& a, const Node& b);
Node operator-(const Node& a);
Node operator+(const Node& a, double b);
Node operator+(double a, const Node& b);
Node operator-(const Node& a, double b);
Node operator-(double a, const Node& b);
Node operator*(const Node& a, double b);
Node operator*(double a, const Node& b);
Node operator/(const Node& a, double b);
Node operator/(double a, const Node& b);

Node exp(const Node& x);
Node log(const Node& x);
Node sqrt(const Node& x);
Node square(const Node& x);
Node sin(const Node& x);
Node cos(const Node& x);
Node tanh(const Node& x);
Node sigmoid(const Node& x);
/// log(1 + exp(beta x)) / beta.
Node softplus(const Node& x, double beta = 1.0);
/// max(x, 0); subgradient 0 at the kink.
Node relu(const Node& x);
/// |x|; subgradient 0 at zero.
Node abs(const Node& x);
/// Elementwise min/max of two nodes (subgradient split evenly at ties).
Node min(const Node& a, const Node& b);
Node max(const Node& a, const Node& b);
/// Non-differentiable indicator (x > 0) as a constant.
Node step(const Node& x);
/// Non-differentiable sign(x) as a constant.
Node sign(const Node& x);
/// Stops gradient flow.
Node detach(const Node& x);

/// Matrix product (m x k)(k x n).
Node matmul(const Node& a, const Node& b);
Node rows(const Node& x, Index start, Index count);
Node vstack(std::span<const Node> parts);
inline Node vstack(std::initializer_list<Node> parts) { return vstack(std::span<const Node>(parts.begin(), parts.size())); }
/// Column sums (1 x cols).
Node sum_rows(const Node& x);
/// Row sums (rows x 1).
Node sum_cols(const Node& x);
Node sum(const Node& x);
Node mean(const Node& x);
/// Sum over the 3 rows of a*b (3 x n operands).
Node dot3(const Node& a, const Node& b);
/// Euclidean norm of each column.
Node norm(const Node& x, double eps = 0.0);

/// out(:, i) = x(:, index[i]).
Node gather_cols(const Node& x, std::vector<Index> index);
/// Segment s covers columns [offsets[s], offsets[s+1]); output has one column per segment.
Node segment_sum(const Node& x, std::vector<Index> offsets);
/// Exclusive running sum of a 1-row input within each segment.
Node segment_exclusive_cumsum(const Node& x, std::vector<Index> offsets);

/// Real SH basis (l_max+1)^2 x n at the columns of a 3 x n direction array.
Node sh_basis(const Node& dirs, int l_max);
/// VolSDF density beta^-1 Psi_beta(-sdf) for a 1 x n sdf and 1 x 1 beta.
Node laplace_density(const Node& sdf, const Node& beta);
/// Elementwise monotone-cubic table lookup.
Node interpolate(const Node& x, const MonotoneCubic& table);

}  // namespace facelight::ad
