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

#ifndef ALEE_ATTENTION_HPP_
#define ALEE_ATTENTION_HPP_

#include "alee/autodiff.hpp"

namespace alee {

// Scaled dot-product attention split into `heads` heads. Query and key
// columns are divided evenly among heads, as are value columns; the head
// outputs are concatenated. One output row per query row. Throws
// std::invalid_argument on incompatible dimensions.
ad::Expr attention(const ad::Expr &queries, const ad::Expr &keys, const ad::Expr &values,
                   int heads = 1);

Matrix attention(const Matrix &queries, const Matrix &keys, const Matrix &values,
                 int heads = 1);

}  // namespace alee

#endif  // ALEE_ATTENTION_HPP_
