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

#include "support.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

#include <sstream>

namespace alee {
namespace {

using testing::naive_rank_loss;
using testing::random_matrix;
using testing::tiny_mblp_config;
using testing::tiny_model_config;

std::vector<double> random_values(std::mt19937_64 &rng, std::size_t n) {
  std::vector<double> v(n);
  for (auto &x : v) x = std::uniform_real_distribution<double>(0.0, 2.0)(rng);
  return v;
}

Matrix column(const std::vector<double> &v) {
  return Eigen::Map<const Matrix>(v.data(), static_cast<Eigen::Index>(v.size()), 1);
}

TEST(Losses, HandCases) {
  const std::vector<double> a{1.0, 0.0}, z{0.0, 0.0};
  EXPECT_EQ(mse_loss(a, a), 0.0);
  EXPECT_EQ(mse_loss(a, z), 1.0);
  EXPECT_THROW(mse_loss(a, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_EQ(internal_rank_loss(std::vector<double>{0.9, 0.5, 0.1}), 0.0);
  EXPECT_NEAR(internal_rank_loss(std::vector<double>{0.5, 0.6}), 0.1, 1e-15);
  EXPECT_EQ(internal_rank_loss(std::vector<double>{0.5}), 0.0);
  EXPECT_EQ(external_rank_loss(std::vector<double>{0.3}), 0.0);
  EXPECT_NEAR(external_rank_loss(std::vector<double>{0.3, 0.7}), 0.4, 1e-15);
}

TEST(Losses, MatchLoopOraclesOnRandomCases) {
  std::mt19937_64 rng(1);
  for (int c = 0; c < 1000; ++c) {
    const std::size_t n = 1 + rng() % 20;
    const auto t = random_values(rng, n), p = random_values(rng, n);
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) mse += (t[i] - p[i]) * (t[i] - p[i]);
    ASSERT_NEAR(mse_loss(t, p), mse, 1e-10);
    std::vector<double> in_true_order;
    for (std::size_t i : descending_order(t)) in_true_order.push_back(p[i]);
    ASSERT_NEAR(internal_rank_loss(in_true_order), naive_rank_loss(t, p), 1e-10);
    ASSERT_NEAR(external_rank_loss(in_true_order), naive_rank_loss(t, p), 1e-10);

    ad::Graph g(false);
    const ad::Expr pred = g.constant(column(p));
    ASSERT_NEAR(ad_losses::mse(g, t, pred).scalar(), mse, 1e-10);
    ASSERT_NEAR(ad_losses::internal_rank(g, t, pred).scalar(), naive_rank_loss(t, p), 1e-10);
    const int m = 1 + static_cast<int>(rng() % 12);
    ASSERT_NEAR(ad_losses::top_m_mean(g, pred, m).scalar(), testing::brute_force_top_m(p, m), 1e-12);
  }
}

TEST(Losses, ExternalRankOverSampleScores) {
  std::mt19937_64 rng(2);
  for (int c = 0; c < 200; ++c) {
    const std::size_t batch = 1 + rng() % 8;
    std::vector<double> truth, pred;
    ad::Graph g(false);
    std::vector<ad::Expr> exprs;
    for (std::size_t s = 0; s < batch; ++s) {
      const std::size_t n = 1 + rng() % 14;
      const auto t = random_values(rng, n), p = random_values(rng, n);
      truth.push_back(importance(t, 10).top_m_mean);
      pred.push_back(testing::brute_force_top_m(p, 10));
      exprs.push_back(ad_losses::top_m_mean(g, g.constant(column(p)), 10));
    }
    ASSERT_NEAR(ad_losses::external_rank(g, exprs, truth).scalar(), naive_rank_loss(truth, pred), 1e-10);
  }
}

TEST(Losses, NonNegativeAndZeroOnPerfectInput) {
  std::mt19937_64 rng(3);
  for (int c = 0; c < 100; ++c) {
    const auto t = random_values(rng, 1 + rng() % 10), p = random_values(rng, t.size());
    EXPECT_GE(mse_loss(t, p), 0.0);
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    EXPECT_GE(internal_rank_loss(p), 0.0);
    EXPECT_EQ(internal_rank_loss(sorted), 0.0);
    EXPECT_EQ(external_rank_loss(sorted), 0.0);
    EXPECT_EQ(mse_loss(t, t), 0.0);
  }
}

TEST(Losses, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(4);
  for (int c = 0; c < 20; ++c) {
    nn::ParameterStore store("x");
    const std::size_t batch = 2 + rng() % 4;
    std::vector<std::vector<double>> truth;
    std::vector<ad::Parameter *> params;
    for (std::size_t s = 0; s < batch; ++s) {
      const std::size_t n = 2 + rng() % 12;
      truth.push_back(random_values(rng, n));
      params.push_back(&store.add("p" + std::to_string(s), column(random_values(rng, n))));
    }
    const int m = 1 + static_cast<int>(rng() % 5);
    auto build = [&](ad::Graph &g) {
      std::vector<ad::Expr> terms, scores;
      std::vector<double> true_scores;
      for (std::size_t s = 0; s < batch; ++s) {
        const ad::Expr pred = g.parameter(*params[s]);
        terms.push_back(ad_losses::mse(g, truth[s], pred));
        terms.push_back(ad_losses::internal_rank(g, truth[s], pred));
        scores.push_back(ad_losses::top_m_mean(g, pred, m));
        true_scores.push_back(importance(truth[s], m).top_m_mean);
      }
      terms.push_back(ad_losses::external_rank(g, scores, true_scores));
      return ad::sum_scalars(g, terms);
    };
    EXPECT_LT(testing::gradient_check(params, build, 20, rng), 1e-4) << "case " << c;
  }
}

struct TrainFixture {
  TaskSchema schema = TaskSchema::make_default(8, 6);
  Corpus corpus;
  PoolState pool;
  std::unique_ptr<EventModel> model;
  std::unique_ptr<MblpModel> mblp;

  explicit TrainFixture(int n, bool memory = true) : corpus(synth_corpus(schema, n, 5, 0.3)) {
    for (const auto &ex : corpus) pool.labeled.push_back({ex.sentence, *ex.labels});
    model = std::make_unique<EventModel>(schema, Vocabulary::build(corpus), tiny_model_config(8), 1);
    MblpConfig mc = tiny_mblp_config();
    mc.use_memory = memory;
    mblp = std::make_unique<MblpModel>(schema, 8, mc, 2);
  }
};

TrainerConfig quick_config(int batch, int epochs) {
  TrainerConfig c;
  c.ee_batch_size = batch;
  c.epochs = epochs;
  c.early_stop = false;
  return c;
}

TEST(TrainRound, UpdateCountsPerEpoch) {
  for (int batches : {2, 3, 5}) {
    TrainFixture f(10 * batches);
    const TrainLog log = train_round(f.pool, *f.model, f.mblp.get(), quick_config(10, 2));
    ASSERT_EQ(log.epochs_run, 2);
    for (int e = 0; e < 2; ++e) {
      EXPECT_EQ(log.ee_updates_per_epoch[static_cast<std::size_t>(e)], batches);
      EXPECT_EQ(log.mblp_updates_per_epoch[static_cast<std::size_t>(e)], batches - 1);
    }
    EXPECT_EQ(log.delay_checks, 2 * (batches - 1));
  }
}

TEST(TrainRound, RaggedLastBatchCounts) {
  TrainFixture f(23);
  const TrainLog log = train_round(f.pool, *f.model, f.mblp.get(), quick_config(10, 1));
  EXPECT_EQ(log.ee_updates, 3);
  EXPECT_EQ(log.mblp_updates, 2);
}

TEST(TrainRound, WithoutPredictorOnlyExtractionUpdates) {
  TrainFixture f(30);
  const TrainLog log = train_round(f.pool, *f.model, nullptr, quick_config(10, 1));
  EXPECT_EQ(log.ee_updates, 3);
  EXPECT_EQ(log.mblp_updates, 0);
}

TEST(TrainRound, ParameterPartitionIsBitwise) {
  for (bool memory : {true, false}) {
    TrainFixture f(40, memory);
    auto ee = f.model->parameters().snapshot();
    auto mb = f.mblp->parameters().snapshot();
    int checked_mblp = 0, checked_ee = 0;
    TrainHooks hooks;
    hooks.after_mblp_update = [&](int, int) {
      EXPECT_EQ(f.model->parameters().snapshot(), ee);
      EXPECT_NE(f.mblp->parameters().snapshot(), mb);
      mb = f.mblp->parameters().snapshot();
      ++checked_mblp;
    };
    hooks.after_ee_update = [&](int, int) {
      EXPECT_EQ(f.mblp->parameters().snapshot(), mb);
      EXPECT_NE(f.model->parameters().snapshot(), ee);
      ee = f.model->parameters().snapshot();
      ++checked_ee;
    };
    train_round(f.pool, *f.model, f.mblp.get(), quick_config(8, 2), 0, hooks);
    EXPECT_EQ(checked_ee, 10);
    EXPECT_EQ(checked_mblp, 8);
  }
}

TEST(TrainRound, SmokeLossesFiniteAndDecreasing) {
  TrainFixture f(50);
  TrainerConfig c = quick_config(10, 3);
  c.ee_learning_rate = 0.1;
  const TrainLog log = train_round(f.pool, *f.model, f.mblp.get(), c);
  for (const auto &s : log.steps) {
    EXPECT_TRUE(std::isfinite(s.l_ee));
    EXPECT_TRUE(std::isfinite(s.l_mse));
    EXPECT_TRUE(std::isfinite(s.l_ri));
    EXPECT_TRUE(std::isfinite(s.l_re));
    EXPECT_GE(s.l_mse, 0.0);
    EXPECT_GE(s.l_ri, 0.0);
    EXPECT_GE(s.l_re, 0.0);
    EXPECT_EQ(s.mblp_updated, s.step > 0);
  }
  ASSERT_EQ(log.epoch_ee_loss.size(), 3u);
  EXPECT_LT(log.epoch_ee_loss[2], log.epoch_ee_loss[0]);
}

TEST(TrainRound, RankingLossesCanBeDisabled) {
  TrainFixture f(30);
  TrainerConfig c = quick_config(10, 1);
  c.ranking_losses = false;
  const TrainLog log = train_round(f.pool, *f.model, f.mblp.get(), c);
  for (const auto &s : log.steps) {
    EXPECT_EQ(s.l_ri, 0.0);
    EXPECT_EQ(s.l_re, 0.0);
  }
  EXPECT_EQ(log.mblp_updates, 2);
}

TEST(TrainRound, EarlyStopWindow) {
  TrainFixture f(20);
  TrainerConfig c = quick_config(10, 20);
  c.early_stop = true;
  c.early_stop_tolerance = 1e9;  // no improvement can satisfy it
  EXPECT_EQ(train_round(f.pool, *f.model, nullptr, c).epochs_run, 4);
  c.early_stop = false;
  c.epochs = 6;
  EXPECT_EQ(train_round(f.pool, *f.model, nullptr, c).epochs_run, 6);
}

TEST(TrainRound, DeterministicForFixedSeed) {
  TrainFixture a(30), b(30);
  train_round(a.pool, *a.model, a.mblp.get(), quick_config(10, 2), 3);
  train_round(b.pool, *b.model, b.mblp.get(), quick_config(10, 2), 3);
  EXPECT_EQ(a.model->parameters().snapshot(), b.model->parameters().snapshot());
  EXPECT_EQ(a.mblp->parameters().snapshot(), b.mblp->parameters().snapshot());
}

TEST(TrainRound, RejectsBadInput) {
  TrainFixture f(10);
  PoolState empty;
  EXPECT_THROW(train_round(empty, *f.model, nullptr, quick_config(4, 1)), std::invalid_argument);
  EXPECT_THROW(train_round(f.pool, *f.model, nullptr, quick_config(0, 1)), std::invalid_argument);
}

TEST(TrainLog, JsonLinesFormat) {
  TrainFixture f(20);
  const TrainLog log = train_round(f.pool, *f.model, f.mblp.get(), quick_config(10, 2), 4);
  std::ostringstream out;
  write_log_jsonl(out, log, 9);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    for (const char *key : {"round", "epoch", "step", "l_ee", "l_mse", "l_rI", "l_rE", "seed"}) {
      EXPECT_TRUE(j.contains(key)) << key;
    }
    EXPECT_EQ(j["round"], 4);
    EXPECT_EQ(j["seed"], 9);
    ++lines;
  }
  EXPECT_EQ(lines, 4);
}

}  // namespace
}  // namespace alee
