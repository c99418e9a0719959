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

#include "alee/nn.hpp"

#include "alee/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace alee::nn {

Parameter &ParameterStore::add(const std::string &name, Matrix init) {
  std::string full = prefix_.empty() ? name : prefix_ + "/" + name;
  if (find(full) != nullptr) throw std::invalid_argument("duplicate parameter " + full);
  params_.emplace_back(full, std::move(init));
  return params_.back();
}

Parameter *ParameterStore::find(const std::string &full_name) {
  for (auto &p : params_) {
    if (p.name() == full_name) return &p;
  }
  return nullptr;
}

const Parameter *ParameterStore::find(const std::string &full_name) const {
  for (const auto &p : params_) {
    if (p.name() == full_name) return &p;
  }
  return nullptr;
}

void ParameterStore::zero_grad() {
  for (auto &p : params_) p.zero_grad();
}

double ParameterStore::grad_norm() const {
  double s = 0.0;
  for (const auto &p : params_) s += p.grad.squaredNorm();
  return std::sqrt(s);
}

std::size_t ParameterStore::num_values() const {
  std::size_t n = 0;
  for (const auto &p : params_) n += static_cast<std::size_t>(p.value.size());
  return n;
}

std::map<std::string, Matrix> ParameterStore::snapshot() const {
  std::map<std::string, Matrix> out;
  for (const auto &p : params_) out.emplace(p.name(), p.value);
  return out;
}

void ParameterStore::restore(const std::map<std::string, Matrix> &values) {
  for (auto &p : params_) {
    auto it = values.find(p.name());
    if (it == values.end()) throw std::invalid_argument("missing parameter " + p.name());
    if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols()) {
      throw std::invalid_argument("shape mismatch for parameter " + p.name());
    }
    p.value = it->second;
  }
}

Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::uniform_real_distribution<double> dist(-limit, limit);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Matrix normal(Eigen::Index rows, Eigen::Index cols, double stddev, std::mt19937_64 &rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
  return m;
}

Linear::Linear(ParameterStore &store, const std::string &name, Eigen::Index in,
               Eigen::Index out, std::mt19937_64 &rng, bool bias)
    : weight_(&store.add(name + "/w", glorot(in, out, rng))) {
  if (bias) bias_ = &store.add(name + "/b", Matrix::Zero(1, out));
}

Expr Linear::operator()(Graph &g, const Expr &x) const {
  Expr y = ad::matmul(x, g.parameter(*weight_));
  if (bias_ != nullptr) y = ad::add_row(y, g.parameter(*bias_));
  return y;
}

FeedForward::FeedForward(ParameterStore &store, const std::string &name, Eigen::Index in,
                         Eigen::Index hidden, Eigen::Index out, std::mt19937_64 &rng)
    : first_(store, name + "/l1", in, hidden, rng), second_(store, name + "/l2", hidden, out, rng) {}

Expr FeedForward::operator()(Graph &g, const Expr &x) const {
  return second_(g, ad::relu(first_(g, x)));
}

LayerNorm::LayerNorm(ParameterStore &store, const std::string &name, Eigen::Index dim)
    : gamma_(&store.add(name + "/gamma", Matrix::Ones(1, dim))),
      beta_(&store.add(name + "/beta", Matrix::Zero(1, dim))) {}

Expr LayerNorm::operator()(Graph &g, const Expr &x) const {
  return ad::layer_norm_rows(x, g.parameter(*gamma_), g.parameter(*beta_));
}

MultiHeadAttention::MultiHeadAttention(ParameterStore &store, const std::string &name,
                                       Eigen::Index query_dim, Eigen::Index kv_dim,
                                       Eigen::Index model_dim, int heads, std::mt19937_64 &rng)
    : wq_(store, name + "/q", query_dim, model_dim, rng),
      wk_(store, name + "/k", kv_dim, model_dim, rng),
      wv_(store, name + "/v", kv_dim, model_dim, rng),
      wo_(store, name + "/o", model_dim, model_dim, rng),
      heads_(heads) {
  if (heads < 1 || model_dim % heads != 0) {
    throw std::invalid_argument(name + ": model dim not divisible by heads");
  }
}

Expr MultiHeadAttention::operator()(Graph &g, const Expr &queries, const Expr &keys_values) const {
  Expr q = wq_(g, queries);
  Expr k = wk_(g, keys_values);
  Expr v = wv_(g, keys_values);
  return wo_(g, attention(q, k, v, heads_));
}

double sgd_step(ParameterStore &store, double learning_rate, double clip_norm) {
  const double norm = store.grad_norm();
  double factor = learning_rate;
  if (clip_norm > 0.0 && norm > clip_norm) factor *= clip_norm / norm;
  for (auto &p : store.all()) {
    p.value.noalias() -= factor * p.grad;
    p.zero_grad();
  }
  return norm;
}

}  // namespace alee::nn
