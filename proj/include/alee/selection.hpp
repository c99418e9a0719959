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

// Sample selection: balanced losses, top-m importance, the batch-based
// memory selection and the baseline strategies.
//
// Every strategy breaks ties by the lowest sentence id.

#ifndef ALEE_SELECTION_HPP_
#define ALEE_SELECTION_HPP_

#include "alee/corpus.hpp"
#include "alee/extractor.hpp"
#include "alee/mblp.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace alee {

// m value meaning "use every prediction".
inline constexpr int kAllPredictions = std::numeric_limits<int>::max();

// loss / ln K. Throws std::invalid_argument when K < 2 or loss < 0.
double balanced(double loss, int categories);

// Balanced version of every per-prediction loss of a sample (trigger
// predictions divided by ln M, argument predictions by ln(2N+1)).
std::vector<double> balance_losses(const SamplePredictions &preds, std::span<const double> losses,
                                   const TaskSchema &schema);

struct ImportanceScore {
  std::string id;
  std::vector<double> balanced_losses;
  double top_m_mean = 0.0;
  int m_used = 0;
};

// Mean of the min(m, size) largest balanced losses; 0 for an empty list.
ImportanceScore importance(std::span<const double> balanced_losses, int m);

enum class StrategyKind { kMblp, kRandom, kUncertainty, kDiversity, kUncertDiver, kLossPred };

const char *strategy_name(StrategyKind kind);
StrategyKind parse_strategy(const std::string &name);

struct SelectionPlan {
  std::string strategy;
  int query_size = 0;
  std::vector<std::vector<std::string>> batches;  // batch-based strategies only
  std::vector<std::string> selected;               // pick order
  std::vector<double> scores;                      // score of each pick
  std::string warning;
  // Instrumentation.
  int scorings = 0;
  int smm_updates = 0;
};

// Frozen-model view of the unlabeled pool.
struct PoolAnalysis {
  std::vector<const Sentence *> sentences;
  std::vector<EventModel::Analysis> analyses;
};

PoolAnalysis analyze_pool(const EventModel &model, const std::vector<Sentence> &unlabeled);

// Splits `ids` (already shuffled) into `count` near-equal batches, extra
// members going one per batch from the front.
std::vector<std::vector<std::size_t>> partition_batches(std::size_t size, int count);

// Batch-based selection with the memory: reset the memory, shuffle the pool
// into Q batches, pick the highest top-m importance per batch and feed each
// pick to the memory before scoring the next batch.
SelectionPlan select_mblp(const PoolAnalysis &pool, const MblpModel &mblp, const TaskSchema &schema,
                          int m, int query_size, std::uint64_t seed);

// Same batch procedure with an explicit per-sentence scorer; exposed for
// tests of the batch mechanics.
using BatchScorer = std::function<double(std::size_t index)>;
using PickObserver = std::function<void(std::size_t index)>;
SelectionPlan select_batches(const std::vector<std::string> &ids, int query_size,
                             std::uint64_t seed, const BatchScorer &score,
                             const PickObserver &on_pick);

SelectionPlan select_random(const std::vector<Sentence> &unlabeled, int query_size,
                            std::uint64_t seed);

// Top-Q by mean normalized prediction entropy.
SelectionPlan select_uncertainty(const PoolAnalysis &pool, const TaskSchema &schema,
                                 int query_size);

// Greedy k-center over mean-pooled sentence encodings. Distances are to the
// labeled set plus picks so far; with nothing to compare against, to the
// pool centroid.
SelectionPlan select_diversity(const PoolAnalysis &pool, const std::vector<Matrix> &labeled_encodings,
                               int query_size);
SelectionPlan select_diversity_points(const std::vector<std::string> &ids,
                                      const std::vector<RowVector> &points,
                                      const std::vector<RowVector> &reference, int query_size);

// Top-Q by (entropy / max entropy) * (min distance / max min distance).
SelectionPlan select_uncert_diver(const PoolAnalysis &pool, const TaskSchema &schema,
                                  const std::vector<Matrix> &labeled_encodings, int query_size);

// Top-Q by the memoryless predictor's top-m importance (m = kAllPredictions
// gives the plain mean).
SelectionPlan select_loss_pred_greedy(const PoolAnalysis &pool, const MblpModel &predictor,
                                      const TaskSchema &schema, int m, int query_size);

// Mean normalized entropy of a sample's predictions.
double mean_normalized_entropy(const SamplePredictions &preds, const TaskSchema &schema);
RowVector mean_pool(const Matrix &token_features);

}  // namespace alee

#endif  // ALEE_SELECTION_HPP_
