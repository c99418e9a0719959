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

// Memory-based loss prediction.
//
// Each task (trigger classification, argument labeling) owns a memory matrix
// with one row per output category. Adding a sentence to the memory runs a
// gated update per row:
//
//   f_p   = Att(M_p, B(S), B(S))
//   g_p   = sigmoid(W_g [f_p; M_p] + b_g)
//   M_p' = g_p * (W_M f_p) + (1 - g_p) * M_p
//
// and the predicted balanced loss of a prediction with hidden vector h and
// output distribution P is softplus(F([h; P; Att(h, M, M)])).
//
// Query and key projections are learned; attention values are used raw, so
// f_p lives in encoder space and Att(h, M, M) in memory space.

#ifndef ALEE_MBLP_HPP_
#define ALEE_MBLP_HPP_

#include "alee/autodiff.hpp"
#include "alee/corpus.hpp"
#include "alee/extractor.hpp"
#include "alee/nn.hpp"

#include <array>
#include <random>
#include <vector>

namespace alee {

struct MblpConfig {
  int d_m = 256;
  int hidden = 0;  // 0 = d_m
  bool gate_per_dim = false;
  // Without memory the predictor sees [h; P] only (plain loss prediction).
  bool use_memory = true;
};

// Current memory rows per task, as values.
struct MemoryState {
  std::array<Matrix, 2> rows;

  const Matrix &of(Task t) const { return rows[static_cast<std::size_t>(task_index(t))]; }
  bool operator==(const MemoryState &o) const { return rows == o.rows; }
};

class MblpModel {
 public:
  MblpModel(const TaskSchema &schema, int d_h, const MblpConfig &config, std::uint64_t seed);
  MblpModel(const MblpModel &) = delete;
  MblpModel &operator=(const MblpModel &) = delete;

  const MblpConfig &config() const { return config_; }
  bool uses_memory() const { return config_.use_memory; }
  int categories(Task t) const { return categories_[static_cast<std::size_t>(task_index(t))]; }
  nn::ParameterStore &parameters() { return store_; }
  const nn::ParameterStore &parameters() const { return store_; }

  // Graph-level memory: one expression per task.
  struct GraphMemory {
    std::array<ad::Expr, 2> rows;
  };
  GraphMemory initial(ad::Graph &g) const;
  // Adds one sentence's encoding (treated as a constant) to the memory.
  GraphMemory update(ad::Graph &g, const GraphMemory &memory, const Matrix &encoding) const;
  // Gate values of the update for one task (K x 1, or K x d_m per-dim).
  ad::Expr gates(ad::Graph &g, Task t, const ad::Expr &memory, const Matrix &encoding) const;
  // Predicted balanced losses (column) for the rows of `hidden`/`probs`.
  // `memory` is ignored when the model runs without memory.
  ad::Expr predict(ad::Graph &g, const GraphMemory *memory, Task t, const Matrix &hidden,
                   const Matrix &probs) const;
  // All k + k*n predictions of a sample, trigger rows first.
  ad::Expr predict(ad::Graph &g, const GraphMemory *memory, const SamplePredictions &preds) const;

  // Value-level operations.
  MemoryState reset() const;
  MemoryState smm_update(const MemoryState &memory, const EncoderOutput &encoding) const;
  std::vector<double> predict_losses(const MemoryState &memory, const SamplePredictions &preds) const;
  std::vector<double> predict_losses(const SamplePredictions &preds) const;  // memoryless

 private:
  struct TaskHead {
    ad::Parameter *memory_init = nullptr;
    nn::Linear update_query;   // d_m -> d_m
    nn::Linear update_key;     // d_h -> d_m
    nn::Linear write;          // W_M: d_h -> d_m, no bias
    nn::Linear gate;           // W_g, b_g: d_h + d_m -> 1 (or d_m)
    nn::Linear read_query;     // hidden dim -> d_m
    nn::Linear read_key;       // d_m -> d_m
    nn::FeedForward regressor;
  };

  ad::Expr update_task(ad::Graph &g, Task t, const ad::Expr &memory, const ad::Expr &enc) const;
  const TaskHead &head(Task t) const { return heads_[static_cast<std::size_t>(task_index(t))]; }

  MblpConfig config_;
  int d_h_;
  std::array<int, 2> categories_;
  nn::ParameterStore store_;
  std::array<TaskHead, 2> heads_;
};

}  // namespace alee

#endif  // ALEE_MBLP_HPP_
