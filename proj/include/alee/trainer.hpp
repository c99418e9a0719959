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

// Delayed training of the extraction model and the loss predictor.
//
// Each epoch shuffles the labeled set into batches b_1..b_B. At step i:
//   a. forward b_i, record per-prediction losses and the extraction loss;
//   b. (i > 1) supervise the predictions made for b_i at step i-1 with the
//      fresh balanced losses and update the predictor only;
//   c. reset the memory and feed it every sentence of b_i;
//   d. (i < B) predict and keep the losses of b_{i+1};
//   e. apply the extraction-loss update to encoder and extractor.

#ifndef ALEE_TRAINER_HPP_
#define ALEE_TRAINER_HPP_

#include "alee/autodiff.hpp"
#include "alee/corpus.hpp"
#include "alee/extractor.hpp"
#include "alee/mblp.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace alee {

// Sum of squared differences.
double mse_loss(std::span<const double> true_balanced, std::span<const double> pred_balanced);
// Sum over adjacent pairs of [pred[j+1] - pred[j]]_+ ; input ordered by
// descending true loss.
double internal_rank_loss(std::span<const double> pred_in_true_order);
// Same hinge over per-sentence scores ordered by descending true score.
double external_rank_loss(std::span<const double> sample_scores_in_true_order);

// Positions of `values` sorted by descending value, ties by position.
std::vector<std::size_t> descending_order(std::span<const double> values);

namespace ad_losses {
// Graph versions; `pred` is a column expression.
ad::Expr mse(ad::Graph &g, std::span<const double> true_balanced, const ad::Expr &pred);
ad::Expr internal_rank(ad::Graph &g, std::span<const double> true_balanced, const ad::Expr &pred);
// Top-m mean of the predicted column (selection by predicted value).
ad::Expr top_m_mean(ad::Graph &g, const ad::Expr &pred, int m);
// Hinge across samples given predicted sample scores and their true scores.
ad::Expr external_rank(ad::Graph &g, std::span<const ad::Expr> pred_scores,
                       std::span<const double> true_scores);
}  // namespace ad_losses

struct TrainerConfig {
  int ee_batch_size = 16;
  double ee_learning_rate = 0.05;
  double mblp_learning_rate = 0.005;
  int epochs = 10;
  int m = 10;
  std::uint64_t seed = 1;
  double clip_norm = 5.0;
  // Ranking losses in the predictor objective; off leaves only the MSE.
  bool ranking_losses = true;
  // Stop once the extraction loss improves by less than early_stop_tolerance
  // (relative) over early_stop_window epochs.
  bool early_stop = true;
  double early_stop_tolerance = 0.01;
  int early_stop_window = 3;
};

struct StepRecord {
  int round = 0;
  int epoch = 0;
  int step = 0;
  double l_ee = 0.0;
  double l_mse = 0.0;
  double l_ri = 0.0;
  double l_re = 0.0;
  bool mblp_updated = false;
};

struct TrainLog {
  std::vector<StepRecord> steps;
  std::vector<double> epoch_ee_loss;  // mean per-sentence extraction loss
  int epochs_run = 0;
  int ee_updates = 0;
  int mblp_updates = 0;
  // Predictions consumed at step i that were produced at step i-1 from a
  // memory fed only with b_{i-1}.
  int delay_checks = 0;
  std::vector<int> mblp_updates_per_epoch;
  std::vector<int> ee_updates_per_epoch;
};

// One JSON object per step; `seed` is added as a field when given.
void write_log_jsonl(std::ostream &out, const TrainLog &log,
                     std::optional<std::uint64_t> seed = std::nullopt);

// Optional hooks for instrumentation in tests.
struct TrainHooks {
  std::function<void(int epoch, int step)> after_mblp_update;
  std::function<void(int epoch, int step)> after_ee_update;
};

// Trains one active-learning round on the labeled set. `mblp` may be null, in
// which case only the extraction model is trained.
TrainLog train_round(const PoolState &pool, EventModel &model, MblpModel *mblp,
                     const TrainerConfig &config, int round = 0, const TrainHooks &hooks = {});

}  // namespace alee

#endif  // ALEE_TRAINER_HPP_
