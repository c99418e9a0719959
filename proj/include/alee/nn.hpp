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

// Parameter ownership, layers and the SGD optimizer.

#ifndef ALEE_NN_HPP_
#define ALEE_NN_HPP_

#include "alee/autodiff.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace alee::nn {

using ad::Expr;
using ad::Graph;
using ad::Parameter;

// Owns a namespace of parameters. Addresses are stable for the store's life.
class ParameterStore {
 public:
  explicit ParameterStore(std::string prefix) : prefix_(std::move(prefix)) {}
  ParameterStore(const ParameterStore &) = delete;
  ParameterStore &operator=(const ParameterStore &) = delete;

  const std::string &prefix() const { return prefix_; }

  Parameter &add(const std::string &name, Matrix init);
  Parameter *find(const std::string &full_name);
  const Parameter *find(const std::string &full_name) const;

  std::deque<Parameter> &all() { return params_; }
  const std::deque<Parameter> &all() const { return params_; }

  void zero_grad();
  double grad_norm() const;
  std::size_t num_values() const;

  // Copy of all values, keyed by full name.
  std::map<std::string, Matrix> snapshot() const;
  // Overwrites values from `values`; every parameter must be present.
  void restore(const std::map<std::string, Matrix> &values);

 private:
  std::string prefix_;
  std::deque<Parameter> params_;
};

// Uniform Glorot initialization.
Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng);
Matrix normal(Eigen::Index rows, Eigen::Index cols, double stddev, std::mt19937_64 &rng);

// y = x W + b, with W stored in x W orientation.
class Linear {
 public:
  Linear() = default;
  Linear(ParameterStore &store, const std::string &name, Eigen::Index in, Eigen::Index out,
         std::mt19937_64 &rng, bool bias = true);

  Expr operator()(Graph &g, const Expr &x) const;
  Eigen::Index in_dim() const { return weight_->value.rows(); }
  Eigen::Index out_dim() const { return weight_->value.cols(); }
  Parameter &weight() const { return *weight_; }
  Parameter *bias() const { return bias_; }

 private:
  Parameter *weight_ = nullptr;
  Parameter *bias_ = nullptr;
};

// Two-layer feed-forward net: Linear -> ReLU -> Linear.
class FeedForward {
 public:
  FeedForward() = default;
  FeedForward(ParameterStore &store, const std::string &name, Eigen::Index in,
              Eigen::Index hidden, Eigen::Index out, std::mt19937_64 &rng);
  Expr operator()(Graph &g, const Expr &x) const;

 private:
  Linear first_;
  Linear second_;
};

class LayerNorm {
 public:
  LayerNorm() = default;
  LayerNorm(ParameterStore &store, const std::string &name, Eigen::Index dim);
  Expr operator()(Graph &g, const Expr &x) const;

 private:
  Parameter *gamma_ = nullptr;
  Parameter *beta_ = nullptr;
};

// Multi-head attention with learned query/key/value/output projections.
class MultiHeadAttention {
 public:
  MultiHeadAttention() = default;
  MultiHeadAttention(ParameterStore &store, const std::string &name, Eigen::Index query_dim,
                     Eigen::Index kv_dim, Eigen::Index model_dim, int heads,
                     std::mt19937_64 &rng);
  Expr operator()(Graph &g, const Expr &queries, const Expr &keys_values) const;

 private:
  Linear wq_, wk_, wv_, wo_;
  int heads_ = 1;
};

// Plain stochastic gradient descent with global gradient-norm clipping.
// Returns the pre-clipping gradient norm.
double sgd_step(ParameterStore &store, double learning_rate, double clip_norm);

}  // namespace alee::nn

#endif  // ALEE_NN_HPP_
