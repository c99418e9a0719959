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

#include "alee/trainer.hpp"

#include "alee/selection.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace alee {

double mse_loss(std::span<const double> true_balanced, std::span<const double> pred_balanced) {
  if (true_balanced.size() != pred_balanced.size()) {
    throw std::invalid_argument("mse_loss: length mismatch");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < true_balanced.size(); ++j) {
    const double d = true_balanced[j] - pred_balanced[j];
    total += d * d;
  }
  return total;
}

double internal_rank_loss(std::span<const double> pred) {
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < pred.size(); ++j) total += std::max(0.0, pred[j + 1] - pred[j]);
  return total;
}

double external_rank_loss(std::span<const double> scores) { return internal_rank_loss(scores); }

std::vector<std::size_t> descending_order(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });
  return order;
}

namespace ad_losses {

ad::Expr mse(ad::Graph &g, std::span<const double> true_balanced, const ad::Expr &pred) {
  if (static_cast<Eigen::Index>(true_balanced.size()) != pred.rows() || pred.cols() != 1) {
    throw std::invalid_argument("mse: length mismatch");
  }
  Matrix t(pred.rows(), 1);
  for (std::size_t j = 0; j < true_balanced.size(); ++j) t(static_cast<Eigen::Index>(j), 0) = true_balanced[j];
  return ad::sum(ad::square(ad::sub(g.constant(std::move(t)), pred)));
}

ad::Expr internal_rank(ad::Graph &g, std::span<const double> true_balanced, const ad::Expr &pred) {
  if (static_cast<Eigen::Index>(true_balanced.size()) != pred.rows()) {
    throw std::invalid_argument("internal_rank: length mismatch");
  }
  if (true_balanced.size() < 2) return g.scalar(0.0);
  // Reorder the column by descending true loss with one gather, then take
  // adjacent differences.
  std::vector<std::size_t> order = descending_order(true_balanced);
  const auto n = static_cast<Eigen::Index>(order.size());
  Matrix diff = Matrix::Zero(n - 1, n);
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    diff(j, static_cast<Eigen::Index>(order[static_cast<std::size_t>(j + 1)])) += 1.0;
    diff(j, static_cast<Eigen::Index>(order[static_cast<std::size_t>(j)])) -= 1.0;
  }
  return ad::sum(ad::relu(ad::matmul(g.constant(std::move(diff)), pred)));
}

ad::Expr top_m_mean(ad::Graph &g, const ad::Expr &pred, int m) {
  if (m < 1) throw std::invalid_argument("top_m_mean: m must be >= 1");
  const Matrix &v = pred.value();
  std::vector<double> vals(v.data(), v.data() + v.size());
  std::vector<std::size_t> order = descending_order(vals);
  const std::size_t used = std::min<std::size_t>(static_cast<std::size_t>(m), order.size());
  if (used == 0) return g.scalar(0.0);
  Matrix pick = Matrix::Zero(1, pred.rows());
  for (std::size_t j = 0; j < used; ++j) pick(0, static_cast<Eigen::Index>(order[j])) = 1.0 / static_cast<double>(used);
  return ad::matmul(g.constant(std::move(pick)), pred);
}

ad::Expr external_rank(ad::Graph &g, std::span<const ad::Expr> pred_scores,
                       std::span<const double> true_scores) {
  if (pred_scores.size() != true_scores.size()) {
    throw std::invalid_argument("external_rank: length mismatch");
  }
  if (pred_scores.size() < 2) return g.scalar(0.0);
  std::vector<std::size_t> order = descending_order(true_scores);
  std::vector<ad::Expr> hinges;
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    hinges.push_back(ad::relu(ad::sub(pred_scores[order[j + 1]], pred_scores[order[j]])));
  }
  return ad::sum_scalars(g, hinges);
}

}  // namespace ad_losses

void write_log_jsonl(std::ostream &out, const TrainLog &log, std::optional<std::uint64_t> seed) {
  for (const auto &s : log.steps) {
    nlohmann::json j{{"round", s.round}, {"epoch", s.epoch}, {"step", s.step},
                     {"l_ee", s.l_ee},   {"l_mse", s.l_mse}, {"l_rI", s.l_ri},
                     {"l_rE", s.l_re}};
    if (seed) j["seed"] = *seed;
    out << j.dump() << "\n";
  }
}

namespace {

struct PendingPredictions {
  std::unique_ptr<ad::Graph> graph;
  std::vector<ad::Expr> predictions;  // one column per sentence of the batch
  int produced_step = -1;
  int memory_batch = -1;
};

std::vector<double> balanced_losses(const Matrix &ce, int k, int n, const TaskSchema &schema) {
  std::vector<double> out(static_cast<std::size_t>(ce.rows()));
  const double ln_tr = std::log(static_cast<double>(schema.num_event_types()));
  const double ln_ar = std::log(static_cast<double>(schema.num_argument_labels()));
  (void)n;
  for (Eigen::Index r = 0; r < ce.rows(); ++r) {
    out[static_cast<std::size_t>(r)] = ce(r, 0) / (r < k ? ln_tr : ln_ar);
  }
  return out;
}

}  // namespace

TrainLog train_round(const PoolState &pool, EventModel &model, MblpModel *mblp,
                     const TrainerConfig &config, int round, const TrainHooks &hooks) {
  if (pool.labeled.empty()) throw std::invalid_argument("train_round: labeled set is empty");
  if (config.ee_batch_size < 1 || config.epochs < 1 || config.m < 1) {
    throw std::invalid_argument("train_round: batch size, epochs and m must be positive");
  }
  const TaskSchema &schema = model.schema();
  std::mt19937_64 rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(round));
  TrainLog log;
  std::vector<std::size_t> order(pool.labeled.size());
  std::iota(order.begin(), order.end(), 0);
  model.parameters().zero_grad();
  if (mblp != nullptr) mblp->parameters().zero_grad();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t s = 0; s < order.size(); s += static_cast<std::size_t>(config.ee_batch_size)) {
      const std::size_t e = std::min(order.size(), s + static_cast<std::size_t>(config.ee_batch_size));
      batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(s),
                           order.begin() + static_cast<std::ptrdiff_t>(e));
    }
    const int num_batches = static_cast<int>(batches.size());
    PendingPredictions pending;
    double epoch_loss = 0.0;
    int mblp_updates = 0, ee_updates = 0;

    for (int step = 0; step < num_batches; ++step) {
      const auto &batch = batches[static_cast<std::size_t>(step)];
      StepRecord rec;
      rec.round = round;
      rec.epoch = epoch;
      rec.step = step;

      // (a) extraction forward/backward; gradients are held until (e).
      std::vector<std::vector<double>> true_balanced;
      std::vector<Matrix> encodings;
      const double inv = 1.0 / static_cast<double>(batch.size());
      for (std::size_t idx : batch) {
        const LabeledExample &ex = pool.labeled[idx];
        ad::Graph g;
        ExtractorForward fwd = model.forward(g, ex.sentence);
        encodings.push_back(fwd.encoding.value());
        if (fwd.empty()) {
          true_balanced.emplace_back();
          continue;
        }
        ad::Expr losses = model.loss_column(fwd, ex.labels);
        ad::Expr total = ad::sum(losses);
        rec.l_ee += total.scalar() * inv;
        true_balanced.push_back(balanced_losses(losses.value(), fwd.trigger_logits.rows(),
                                                ex.sentence.length(), schema));
        g.backward(ad::scale(total, inv));
      }
      epoch_loss += rec.l_ee * static_cast<double>(batch.size());

      // (b) supervise the predictions made for this batch one step earlier.
      if (mblp != nullptr && step > 0 && pending.graph) {
        if (pending.produced_step != step - 1 || pending.memory_batch != step - 1) {
          throw std::logic_error("train_round: stale delayed predictions");
        }
        ++log.delay_checks;
        ad::Graph &g = *pending.graph;
        std::vector<ad::Expr> terms, scores;
        std::vector<double> true_scores;
        for (std::size_t s = 0; s < batch.size(); ++s) {
          const ad::Expr &pred = pending.predictions[s];
          const auto &t = true_balanced[s];
          if (!pred.valid() || t.empty()) continue;
          ad::Expr mse = ad_losses::mse(g, t, pred);
          rec.l_mse += mse.scalar();
          terms.push_back(mse);
          if (config.ranking_losses) {
            ad::Expr ri = ad_losses::internal_rank(g, t, pred);
            rec.l_ri += ri.scalar();
            terms.push_back(ri);
            scores.push_back(ad_losses::top_m_mean(g, pred, config.m));
            true_scores.push_back(importance(t, config.m).top_m_mean);
          }
        }
        if (config.ranking_losses) {
          ad::Expr re = ad_losses::external_rank(g, scores, true_scores);
          rec.l_re = re.scalar();
          terms.push_back(re);
        }
        if (!terms.empty()) {
          ad::Expr objective = ad::sum_scalars(g, terms);
          g.backward(objective);
          nn::sgd_step(mblp->parameters(), config.mblp_learning_rate, config.clip_norm);
          rec.mblp_updated = true;
          ++mblp_updates;
          if (hooks.after_mblp_update) hooks.after_mblp_update(epoch, step);
        }
        pending = PendingPredictions{};
      }

      // (c)+(d) memory fed with this batch, predictions for the next one.
      if (mblp != nullptr && step + 1 < num_batches) {
        pending.graph = std::make_unique<ad::Graph>(true);
        ad::Graph &g = *pending.graph;
        MblpModel::GraphMemory memory;
        if (mblp->uses_memory()) {
          memory = mblp->initial(g);
          for (const Matrix &enc : encodings) memory = mblp->update(g, memory, enc);
        }
        for (std::size_t idx : batches[static_cast<std::size_t>(step + 1)]) {
          SamplePredictions preds = model.predict(pool.labeled[idx].sentence);
          pending.predictions.push_back(
              mblp->predict(g, mblp->uses_memory() ? &memory : nullptr, preds));
        }
        pending.produced_step = step;
        pending.memory_batch = step;
      }

      // (e) extraction update.
      nn::sgd_step(model.parameters(), config.ee_learning_rate, config.clip_norm);
      ++ee_updates;
      if (hooks.after_ee_update) hooks.after_ee_update(epoch, step);
      log.steps.push_back(rec);
    }

    log.ee_updates += ee_updates;
    log.mblp_updates += mblp_updates;
    log.ee_updates_per_epoch.push_back(ee_updates);
    log.mblp_updates_per_epoch.push_back(mblp_updates);
    log.epoch_ee_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    log.epochs_run = epoch + 1;

    if (config.early_stop && epoch >= config.early_stop_window) {
      const double before = log.epoch_ee_loss[static_cast<std::size_t>(epoch - config.early_stop_window)];
      const double now = log.epoch_ee_loss.back();
      if (before <= 0.0 || (before - now) / before < config.early_stop_tolerance) break;
    }
  }
  return log;
}

}  // namespace alee
