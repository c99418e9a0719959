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

#include "alee/attention.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace alee {

ad::Expr attention(const ad::Expr &queries, const ad::Expr &keys, const ad::Expr &values,
                   int heads) {
  if (heads < 1) throw std::invalid_argument("attention: heads must be >= 1");
  if (keys.rows() != values.rows()) {
    throw std::invalid_argument("attention: key/value row counts differ");
  }
  if (keys.rows() == 0) throw std::invalid_argument("attention: no keys");
  if (queries.cols() != keys.cols()) {
    throw std::invalid_argument("attention: query/key dimensions differ");
  }
  if (queries.cols() % heads != 0 || values.cols() % heads != 0) {
    throw std::invalid_argument("attention: dimensions not divisible by head count");
  }
  const Eigen::Index dk = queries.cols() / heads;
  const Eigen::Index dv = values.cols() / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dk));
  if (heads == 1) {
    auto weights = ad::softmax_rows(ad::scale(ad::matmul_nt(queries, keys), inv_sqrt));
    return ad::matmul(weights, values);
  }
  std::vector<ad::Expr> outs;
  outs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    auto q = ad::slice_cols(queries, h * dk, dk);
    auto k = ad::slice_cols(keys, h * dk, dk);
    auto v = ad::slice_cols(values, h * dv, dv);
    auto weights = ad::softmax_rows(ad::scale(ad::matmul_nt(q, k), inv_sqrt));
    outs.push_back(ad::matmul(weights, v));
  }
  return ad::concat_cols(outs);
}

Matrix attention(const Matrix &queries, const Matrix &keys, const Matrix &values, int heads) {
  ad::Graph g(false);
  return attention(g.constant(queries), g.constant(keys), g.constant(values), heads).value();
}

}  // namespace alee
