// Copyright 2026 The alee Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Reverse-mode automatic differentiation over dense double matrices.
//
// A Graph records the operations applied to its nodes; calling backward() on
// a 1x1 node propagates gradients to every node that requires them and
// accumulates into the grad() of each Parameter reached. Graphs built with
// gradients disabled record values only, which makes inference cheap.

#ifndef ALEE_AUTODIFF_HPP_
#define ALEE_AUTODIFF_HPP_

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace alee {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

namespace ad {

// A named trainable array with its accumulated gradient.
class Parameter {
 public:
  Parameter(std::string name, Matrix value);

  const std::string &name() const { return name_; }
  void zero_grad() { grad.setZero(value.rows(), value.cols()); }

  Matrix value;
  Matrix grad;

 private:
  std::string name_;
};

class Graph;

// Handle to a node of a Graph.
class Expr {
 public:
  Expr() = default;
  Expr(Graph *graph, int index) : graph_(graph), index_(index) {}

  const Matrix &value() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
  bool requires_grad() const;

  Graph *graph() const { return graph_; }
  int index() const { return index_; }
  bool valid() const { return graph_ != nullptr; }

 private:
  Graph *graph_ = nullptr;
  int index_ = -1;
};

class Graph {
 public:
  using Backward = std::function<void(Graph &, int)>;

  explicit Graph(bool grad_enabled = true) : grad_enabled_(grad_enabled) {}
  Graph(const Graph &) = delete;
  Graph &operator=(const Graph &) = delete;

  bool grad_enabled() const { return grad_enabled_; }
  std::size_t size() const { return nodes_.size(); }

  Expr constant(Matrix value);
  Expr scalar(double value);
  Expr parameter(Parameter &p);
  // Rows of `table` selected by `rows`; gradients scatter back into the
  // table's grad without materializing a dense table-sized gradient.
  Expr lookup(Parameter &table, std::span<const int> rows);

  void backward(const Expr &loss);

  const Matrix &value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  // Gradient buffer of node `id`, zero-initialized on first access.
  Matrix &grad(int id);

  // Adds a node. `backward` is dropped when no gradient is required.
  Expr push(Matrix value, bool requires_grad, Backward backward);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    Backward backward;
  };
  std::vector<Node> nodes_;
  bool grad_enabled_;
};

// ---- element-wise and structural operations ------------------------------

Expr matmul(const Expr &a, const Expr &b);
// a * b^T
Expr matmul_nt(const Expr &a, const Expr &b);
Expr add(const Expr &a, const Expr &b);
Expr sub(const Expr &a, const Expr &b);
Expr hadamard(const Expr &a, const Expr &b);
// Adds a 1 x c row to every row of an r x c matrix.
Expr add_row(const Expr &a, const Expr &row);
// Multiplies row r of `a` by the scalar g(r, 0).
Expr scale_rows(const Expr &a, const Expr &g);
// alpha * a + beta
Expr affine(const Expr &a, double alpha, double beta);
Expr scale(const Expr &a, double alpha);

Expr relu(const Expr &a);
Expr tanh(const Expr &a);
Expr sigmoid(const Expr &a);
Expr softplus(const Expr &a);
Expr square(const Expr &a);

Expr softmax_rows(const Expr &a);
// Per-row cross-entropy of logits against integer targets (natural log).
// Returns an r x 1 column of losses.
Expr cross_entropy_rows(const Expr &logits, std::span<const int> targets);
Expr layer_norm_rows(const Expr &a, const Expr &gamma, const Expr &beta,
                     double eps = 1e-5);

Expr concat_cols(std::span<const Expr> parts);
Expr concat_rows(std::span<const Expr> parts);
Expr slice_cols(const Expr &a, Eigen::Index start, Eigen::Index count);
Expr slice_rows(const Expr &a, Eigen::Index start, Eigen::Index count);
// Stacks `row` (1 x c) n times.
Expr repeat_row(const Expr &row, Eigen::Index n);
// Mean of rows [begin, end) as a 1 x c row.
Expr mean_rows(const Expr &a, Eigen::Index begin, Eigen::Index end);
Expr element(const Expr &a, Eigen::Index r, Eigen::Index c);
Expr sum(const Expr &a);

// Sum of a list of 1x1 expressions; an empty list yields a constant 0.
Expr sum_scalars(Graph &g, std::span<const Expr> parts);

}  // namespace ad
}  // namespace alee

#endif  // ALEE_AUTODIFF_HPP_
