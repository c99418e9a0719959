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

#include "alee/selection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace alee {

double balanced(double loss, int categories) {
  if (categories < 2) throw std::invalid_argument("balanced: need at least 2 categories");
  if (loss < 0.0) throw std::invalid_argument("balanced: negative loss");
  return loss / std::log(static_cast<double>(categories));
}

std::vector<double> balance_losses(const SamplePredictions &preds, std::span<const double> losses,
                                   const TaskSchema &schema) {
  if (static_cast<int>(losses.size()) != preds.count()) {
    throw std::invalid_argument("balance_losses: size mismatch");
  }
  std::vector<double> out(losses.size());
  const int k_tr = schema.num_event_types();
  const int k_ar = schema.num_argument_labels();
  for (std::size_t i = 0; i < losses.size(); ++i) {
    const bool trig = preds.task_of(static_cast<int>(i)) == Task::kTrigger;
    out[i] = balanced(losses[i], trig ? k_tr : k_ar);
  }
  return out;
}

ImportanceScore importance(std::span<const double> balanced_losses, int m) {
  if (m < 1) throw std::invalid_argument("importance: m must be >= 1");
  ImportanceScore s;
  s.balanced_losses.assign(balanced_losses.begin(), balanced_losses.end());
  if (balanced_losses.empty()) return s;
  std::vector<double> sorted(balanced_losses.begin(), balanced_losses.end());
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  s.m_used = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(m), sorted.size()));
  double total = 0.0;
  for (int i = 0; i < s.m_used; ++i) total += sorted[static_cast<std::size_t>(i)];
  s.top_m_mean = total / s.m_used;
  return s;
}

const char *strategy_name(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kMblp: return "mblp";
    case StrategyKind::kRandom: return "random";
    case StrategyKind::kUncertainty: return "uncertainty";
    case StrategyKind::kDiversity: return "diversity";
    case StrategyKind::kUncertDiver: return "uncert_diver";
    case StrategyKind::kLossPred: return "loss_pred";
  }
  return "?";
}

StrategyKind parse_strategy(const std::string &name) {
  for (auto k : {StrategyKind::kMblp, StrategyKind::kRandom, StrategyKind::kUncertainty,
                 StrategyKind::kDiversity, StrategyKind::kUncertDiver, StrategyKind::kLossPred}) {
    if (name == strategy_name(k)) return k;
  }
  throw std::invalid_argument("unknown strategy '" + name + "'");
}

PoolAnalysis analyze_pool(const EventModel &model, const std::vector<Sentence> &unlabeled) {
  PoolAnalysis out;
  out.sentences.reserve(unlabeled.size());
  out.analyses.reserve(unlabeled.size());
  for (const auto &s : unlabeled) {
    out.sentences.push_back(&s);
    out.analyses.push_back(model.analyze(s));
  }
  return out;
}

std::vector<std::vector<std::size_t>> partition_batches(std::size_t size, int count) {
  if (count < 1) throw std::invalid_argument("partition_batches: count must be >= 1");
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(count));
  const std::size_t base = size / static_cast<std::size_t>(count);
  const std::size_t extra = size % static_cast<std::size_t>(count);
  std::size_t next = 0;
  for (std::size_t b = 0; b < out.size(); ++b) {
    std::size_t len = base + (b < extra ? 1 : 0);
    for (std::size_t i = 0; i < len; ++i) out[b].push_back(next++);
  }
  return out;
}

namespace {

int clamp_query(int query_size, std::size_t pool_size, SelectionPlan &plan) {
  if (query_size < 1) throw std::invalid_argument("selection: query size must be >= 1");
  if (static_cast<std::size_t>(query_size) > pool_size) {
    plan.warning = "query size " + std::to_string(query_size) + " clamped to pool size " +
                   std::to_string(pool_size);
    return static_cast<int>(pool_size);
  }
  return query_size;
}

// Indices of the top-q scores; ties go to the lowest id.
std::vector<std::size_t> top_q(const std::vector<double> &scores,
                               const std::vector<const Sentence *> &sentences, int q) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return sentences[a]->id < sentences[b]->id;
  });
  order.resize(static_cast<std::size_t>(q));
  return order;
}

SelectionPlan greedy_plan(const char *name, const PoolAnalysis &pool,
                          const std::vector<double> &scores, int query_size) {
  SelectionPlan plan;
  plan.strategy = name;
  const int q = clamp_query(query_size, pool.sentences.size(), plan);
  plan.query_size = q;
  plan.scorings = static_cast<int>(scores.size());
  for (std::size_t i : top_q(scores, pool.sentences, q)) {
    plan.selected.push_back(pool.sentences[i]->id);
    plan.scores.push_back(scores[i]);
  }
  return plan;
}

}  // namespace

SelectionPlan select_batches(const std::vector<std::string> &ids, int query_size,
                             std::uint64_t seed, const BatchScorer &score,
                             const PickObserver &on_pick) {
  SelectionPlan plan;
  const int q = clamp_query(query_size, ids.size(), plan);
  plan.query_size = q;
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (const auto &batch : partition_batches(order.size(), q)) {
    if (batch.empty()) continue;
    std::vector<std::string> names;
    std::size_t best = order[batch[0]];
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t pos : batch) {
      const std::size_t idx = order[pos];
      names.push_back(ids[idx]);
      const double s = score(idx);
      ++plan.scorings;
      if (s > best_score || (s == best_score && ids[idx] < ids[best])) {
        best = idx;
        best_score = s;
      }
    }
    plan.batches.push_back(std::move(names));
    plan.selected.push_back(ids[best]);
    plan.scores.push_back(best_score);
    if (on_pick) on_pick(best);
  }
  return plan;
}

SelectionPlan select_mblp(const PoolAnalysis &pool, const MblpModel &mblp, const TaskSchema &schema,
                          int m, int query_size, std::uint64_t seed) {
  (void)schema;
  if (!mblp.uses_memory()) throw std::invalid_argument("select_mblp: predictor has no memory");
  std::vector<std::string> ids;
  for (const Sentence *s : pool.sentences) ids.push_back(s->id);
  MemoryState memory = mblp.reset();
  int updates = 0;
  SelectionPlan plan = select_batches(
      ids, query_size, seed,
      [&](std::size_t i) {
        auto losses = mblp.predict_losses(memory, pool.analyses[i].predictions);
        return importance(losses, m).top_m_mean;
      },
      [&](std::size_t i) {
        memory = mblp.smm_update(memory, pool.analyses[i].encoding);
        ++updates;
      });
  plan.strategy = strategy_name(StrategyKind::kMblp);
  plan.smm_updates = updates;
  return plan;
}

SelectionPlan select_random(const std::vector<Sentence> &unlabeled, int query_size,
                            std::uint64_t seed) {
  SelectionPlan plan;
  plan.strategy = strategy_name(StrategyKind::kRandom);
  const int q = clamp_query(query_size, unlabeled.size(), plan);
  plan.query_size = q;
  std::vector<std::size_t> order(unlabeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < q; ++i) {
    plan.selected.push_back(unlabeled[order[static_cast<std::size_t>(i)]].id);
    plan.scores.push_back(0.0);
  }
  return plan;
}

double mean_normalized_entropy(const SamplePredictions &preds, const TaskSchema &schema) {
  if (preds.count() == 0) return 0.0;
  double total = 0.0;
  for (Task t : kTasks) {
    const Matrix &p = preds.tasks[static_cast<std::size_t>(task_index(t))].probs;
    const double norm = std::log(static_cast<double>(
        t == Task::kTrigger ? schema.num_event_types() : schema.num_argument_labels()));
    for (Eigen::Index r = 0; r < p.rows(); ++r) {
      double h = 0.0;
      for (Eigen::Index c = 0; c < p.cols(); ++c) {
        if (p(r, c) > 0.0) h -= p(r, c) * std::log(p(r, c));
      }
      total += h / norm;
    }
  }
  return total / preds.count();
}

SelectionPlan select_uncertainty(const PoolAnalysis &pool, const TaskSchema &schema,
                                 int query_size) {
  std::vector<double> scores;
  for (const auto &a : pool.analyses) scores.push_back(mean_normalized_entropy(a.predictions, schema));
  return greedy_plan(strategy_name(StrategyKind::kUncertainty), pool, scores, query_size);
}

RowVector mean_pool(const Matrix &token_features) {
  return token_features.colwise().mean();
}

namespace {

// Distance of each point to its nearest reference point, or to the centroid of
// `points` when there is no reference.
std::vector<double> min_distances(const std::vector<RowVector> &points,
                                  const std::vector<RowVector> &reference) {
  std::vector<double> out(points.size(), std::numeric_limits<double>::infinity());
  if (reference.empty()) {
    if (points.empty()) return out;
    RowVector centroid = RowVector::Zero(points[0].size());
    for (const auto &p : points) centroid += p;
    centroid /= static_cast<double>(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = (points[i] - centroid).norm();
    return out;
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const auto &r : reference) out[i] = std::min(out[i], (points[i] - r).norm());
  }
  return out;
}

std::vector<RowVector> pooled(const std::vector<Matrix> &encodings) {
  std::vector<RowVector> out;
  for (const auto &e : encodings) out.push_back(mean_pool(e));
  return out;
}

}  // namespace

SelectionPlan select_diversity_points(const std::vector<std::string> &ids,
                                      const std::vector<RowVector> &points,
                                      const std::vector<RowVector> &reference, int query_size) {
  SelectionPlan plan;
  plan.strategy = strategy_name(StrategyKind::kDiversity);
  const int q = clamp_query(query_size, points.size(), plan);
  plan.query_size = q;
  std::vector<double> dist = min_distances(points, reference);
  plan.scorings = static_cast<int>(points.size());
  std::vector<bool> taken(points.size(), false);
  for (int pick = 0; pick < q; ++pick) {
    std::size_t best = points.size();
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (taken[i]) continue;
      if (best == points.size() || dist[i] > dist[best] ||
          (dist[i] == dist[best] && ids[i] < ids[best])) {
        best = i;
      }
    }
    taken[best] = true;
    plan.selected.push_back(ids[best]);
    plan.scores.push_back(dist[best]);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double d = (points[i] - points[best]).norm();
      // The first pick replaces the centroid fallback with real distances.
      if (reference.empty() && pick == 0) {
        dist[i] = d;
      } else {
        dist[i] = std::min(dist[i], d);
      }
    }
  }
  return plan;
}

SelectionPlan select_diversity(const PoolAnalysis &pool, const std::vector<Matrix> &labeled_encodings,
                               int query_size) {
  std::vector<std::string> ids;
  std::vector<RowVector> points;
  for (std::size_t i = 0; i < pool.sentences.size(); ++i) {
    ids.push_back(pool.sentences[i]->id);
    points.push_back(mean_pool(pool.analyses[i].encoding.token_features));
  }
  return select_diversity_points(ids, points, pooled(labeled_encodings), query_size);
}

SelectionPlan select_uncert_diver(const PoolAnalysis &pool, const TaskSchema &schema,
                                  const std::vector<Matrix> &labeled_encodings, int query_size) {
  std::vector<RowVector> points;
  std::vector<double> entropy;
  for (const auto &a : pool.analyses) {
    points.push_back(mean_pool(a.encoding.token_features));
    entropy.push_back(mean_normalized_entropy(a.predictions, schema));
  }
  std::vector<double> dist = min_distances(points, pooled(labeled_encodings));
  const double max_e = entropy.empty() ? 0.0 : *std::max_element(entropy.begin(), entropy.end());
  const double max_d = dist.empty() ? 0.0 : *std::max_element(dist.begin(), dist.end());
  std::vector<double> scores(points.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double e = max_e > 0.0 ? entropy[i] / max_e : 0.0;
    const double d = max_d > 0.0 ? dist[i] / max_d : 0.0;
    scores[i] = e * d;
  }
  return greedy_plan(strategy_name(StrategyKind::kUncertDiver), pool, scores, query_size);
}

SelectionPlan select_loss_pred_greedy(const PoolAnalysis &pool, const MblpModel &predictor,
                                      const TaskSchema &schema, int m, int query_size) {
  (void)schema;
  std::vector<double> scores;
  for (const auto &a : pool.analyses) {
    auto losses = predictor.uses_memory() ? predictor.predict_losses(predictor.reset(), a.predictions)
                                          : predictor.predict_losses(a.predictions);
    scores.push_back(importance(losses, m).top_m_mean);
  }
  return greedy_plan(strategy_name(StrategyKind::kLossPred), pool, scores, query_size);
}

}  // namespace alee
