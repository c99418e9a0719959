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

#include "support.hpp"

#include <gtest/gtest.h>

namespace alee {
namespace {

using testing::naive_attention;
using testing::random_matrix;

TEST(Attention, MatchesNaiveLoops) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 200; ++t) {
    const int heads = 1 + static_cast<int>(rng() % 3);
    const Eigen::Index dk = heads * (1 + static_cast<Eigen::Index>(rng() % 4));
    const Eigen::Index dv = heads * (1 + static_cast<Eigen::Index>(rng() % 4));
    const Eigen::Index nq = 1 + static_cast<Eigen::Index>(rng() % 5);
    const Eigen::Index nk = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Matrix q = random_matrix(nq, dk, rng, 2.0);
    const Matrix k = random_matrix(nk, dk, rng, 2.0);
    const Matrix v = random_matrix(nk, dv, rng);
    const Matrix got = attention(q, k, v, heads);
    EXPECT_LT((got - naive_attention(q, k, v, heads)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Attention, SingleKeyReturnsItsValue) {
  std::mt19937_64 rng(2);
  const Matrix v = random_matrix(1, 4, rng);
  const Matrix out = attention(random_matrix(3, 4, rng), random_matrix(1, 4, rng), v, 2);
  for (Eigen::Index r = 0; r < 3; ++r) EXPECT_LT((out.row(r) - v.row(0)).norm(), 1e-12);
}

TEST(Attention, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  ad::Parameter q("q", random_matrix(2, 4, rng));
  ad::Parameter k("k", random_matrix(3, 4, rng));
  ad::Parameter v("v", random_matrix(3, 6, rng));
  const Matrix w = random_matrix(2, 6, rng);
  auto build = [&](ad::Graph &g) {
    return ad::sum(ad::hadamard(attention(g.parameter(q), g.parameter(k), g.parameter(v), 2),
                                g.constant(w)));
  };
  EXPECT_LT(testing::gradient_check({&q, &k, &v}, build, 30, rng), 1e-6);
}

TEST(Attention, RejectsIncompatibleShapes) {
  const Matrix a = Matrix::Ones(2, 4);
  EXPECT_THROW(attention(a, Matrix::Ones(3, 4), Matrix::Ones(2, 4), 1), std::invalid_argument);
  EXPECT_THROW(attention(a, Matrix::Ones(3, 2), Matrix::Ones(3, 4), 1), std::invalid_argument);
  EXPECT_THROW(attention(a, Matrix::Ones(3, 4), Matrix::Ones(3, 4), 3), std::invalid_argument);
  EXPECT_THROW(attention(a, Matrix::Ones(0, 4), Matrix::Ones(0, 4), 1), std::invalid_argument);
  EXPECT_THROW(attention(a, Matrix::Ones(3, 4), Matrix::Ones(3, 4), 0), std::invalid_argument);
}

}  // namespace
}  // namespace alee
