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


#include "alee/mblp.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

namespace alee {
namespace {

using testing::make_sentence;
using testing::naive_memory_update;
using testing::random_matrix;
using testing::tiny_mblp_config;
using testing::tiny_model_config;

constexpr int kDh = 8;

EncoderOutput random_encoding(std::mt19937_64 &rng, int n) {
  return EncoderOutput{random_matrix(n, kDh, rng)};
}

// Pseudo-predictions with random hidden rows and random distributions.
SamplePredictions random_predictions(std::mt19937_64 &rng, const TaskSchema &schema, int k, int n) {
  SamplePredictions p;
  p.num_candidates = k;
  p.length = n;
  const int widths[2] = {schema.num_event_types(), schema.num_argument_labels()};
  const int hidden[2] = {kDh, 3 * kDh};
  const int rows[2] = {k, k * n};
  for (int t = 0; t < 2; ++t) {
    auto &tp = p.tasks[static_cast<std::size_t>(t)];
    tp.hidden = random_matrix(rows[t], hidden[t], rng);
    tp.probs = random_matrix(rows[t], widths[t], rng).array().exp().matrix();
    for (Eigen::Index r = 0; r < tp.probs.rows(); ++r) tp.probs.row(r) /= tp.probs.row(r).sum();
    for (int r = 0; r < rows[t]; ++r) {
      tp.candidate.push_back(t == 0 ? r : r / n);
      tp.token.push_back(t == 0 ? -1 : r % n);
    }
  }
  return p;
}

ad::Parameter &param(MblpModel &m, const std::string &name) {
  ad::Parameter *p = m.parameters().find(name);
  EXPECT_NE(p, nullptr) << name;
  return *p;
}

TEST(Memory, GatesLieStrictlyInsideUnitInterval) {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  std::mt19937_64 rng(1);
  for (bool per_dim : {false, true}) {
    MblpConfig cfg = tiny_mblp_config();
    cfg.gate_per_dim = per_dim;
    for (int trial = 0; trial < 20; ++trial) {
      MblpModel mblp(schema, kDh, cfg, rng());
      ad::Graph g(false);
      auto mem = mblp.initial(g);
      for (Task t : kTasks) {
        const Matrix enc = random_matrix(1 + trial % 7, kDh, rng, 3.0);
        const Matrix gates = mblp.gates(g, t, mem.rows[static_cast<std::size_t>(task_index(t))], enc).value();
        EXPECT_EQ(gates.rows(), mblp.categories(t));
        EXPECT_EQ(gates.cols(), per_dim ? 8 : 1);
        EXPECT_GT(gates.minCoeff(), 0.0);
        EXPECT_LT(gates.maxCoeff(), 1.0);
      }
    }
  }
}

TEST(Memory, ResetRestoresInitializerExactly) {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  MblpModel mblp(schema, kDh, tiny_mblp_config(), 3);
  std::mt19937_64 rng(4);
  const MemoryState m0 = mblp.reset();
  EXPECT_EQ(m0.of(Task::kTrigger), param(mblp, "mblp/trigger/memory_init").value);
  EXPECT_EQ(m0.of(Task::kArgument).rows(), 13);
  MemoryState m = m0;
  for (int i = 0; i < 5; ++i) m = mblp.smm_update(m, random_encoding(rng, 4));
  EXPECT_FALSE(m == m0);
  EXPECT_TRUE(mblp.reset() == m0);
  EXPECT_TRUE(mblp.reset() == mblp.reset());
  EXPECT_TRUE(m.of(Task::kTrigger).allFinite());
}

TEST(Memory, UpdateMatchesRowByRowOracle) {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  std::mt19937_64 rng(5);
  double worst = 0.0;
  int cases = 0;
  for (int model = 0; model < 100; ++model) {
    MblpConfig cfg = tiny_mblp_config();
    cfg.gate_per_dim = model % 2 == 1;
    MblpModel mblp(schema, kDh, cfg, rng());
    MemoryState m = mblp.reset();
    for (int step = 0; step < 10; ++step, ++cases) {
      const EncoderOutput enc = random_encoding(rng, 1 + static_cast<int>(rng() % 9));
      const MemoryState next = mblp.smm_update(m, enc);
      for (Task t : kTasks) {
        const Matrix oracle = naive_memory_update(mblp.parameters(), task_name(t), m.of(t), enc.token_features);
        worst = std::max(worst, (oracle - next.of(t)).cwiseAbs().maxCoeff());
      }
      m = next;
    }
  }
  EXPECT_EQ(cases, 1000);
  EXPECT_LT(worst, 1e-6);
}

TEST(Memory, ForcedGateLimits) {
  const TaskSchema schema = TaskSchema::make_default(4, 2);
  MblpModel mblp(schema, kDh, tiny_mblp_config(), 6);
  std::mt19937_64 rng(7);
  const EncoderOutput enc = random_encoding(rng, 5);
  for (Task t : kTasks) param(mblp, std::string("mblp/") + task_name(t) + "/gate/b").value.setConstant(-60.0);
  const MemoryState m0 = mblp.reset();
  const MemoryState closed = mblp.smm_update(m0, enc);
  for (Task t : kTasks) EXPECT_LT((closed.of(t) - m0.of(t)).cwiseAbs().maxCoeff(), 1e-20);

  for (Task t : kTasks) param(mblp, std::string("mblp/") + task_name(t) + "/gate/b").value.setConstant(60.0);
  const MemoryState open = mblp.smm_update(m0, enc);
  for (Task t : kTasks) {
    const std::string pre = std::string("mblp/") + task_name(t) + "/";
    const Matrix &wq = param(mblp, pre + "update_query/w").value;
    const Matrix &wk = param(mblp, pre + "update_key/w").value;
    const Matrix &wm = param(mblp, pre + "write/w").value;
    const Matrix f = testing::naive_attention(m0.of(t) * wq, enc.token_features * wk, enc.token_features, 1);
    EXPECT_LT((open.of(t) - f * wm).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Predictor, ShapeSignAndDeterminism) {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  std::mt19937_64 rng(8);
  for (bool memory : {true, false}) {
    MblpConfig cfg = tiny_mblp_config();
    cfg.use_memory = memory;
    MblpModel mblp(schema, kDh, cfg, 9);
    const SamplePredictions p = random_predictions(rng, schema, 2, 6);
    const MemoryState m = memory ? mblp.smm_update(mblp.reset(), random_encoding(rng, 6)) : MemoryState{};
    const auto out = memory ? mblp.predict_losses(m, p) : mblp.predict_losses(p);
    ASSERT_EQ(out.size(), 14u);
    for (double v : out) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, 0.0);
    }
    EXPECT_EQ(out, memory ? mblp.predict_losses(m, p) : mblp.predict_losses(p));
  }
}

TEST(Predictor, MemoryChangesPredictions) {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  std::mt19937_64 rng(10);
  MblpModel mblp(schema, kDh, tiny_mblp_config(), 11);
  const SamplePredictions p = random_predictions(rng, schema, 1, 4);
  const MemoryState m0 = mblp.reset();
  const MemoryState m1 = mblp.smm_update(m0, random_encoding(rng, 4));
  EXPECT_NE(mblp.predict_losses(m0, p), mblp.predict_losses(m1, p));
}

TEST(Predictor, GraphAndValuePathsAgree) {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  std::mt19937_64 rng(12);
  MblpModel mblp(schema, kDh, tiny_mblp_config(), 13);
  const SamplePredictions p = random_predictions(rng, schema, 2, 3);
  const EncoderOutput e1 = random_encoding(rng, 3), e2 = random_encoding(rng, 5);
  const auto values = mblp.predict_losses(mblp.smm_update(mblp.smm_update(mblp.reset(), e1), e2), p);
  ad::Graph g(false);
  auto mem = mblp.update(g, mblp.update(g, mblp.initial(g), e1.token_features), e2.token_features);
  const Matrix col = mblp.predict(g, &mem, p).value();
  ASSERT_EQ(col.rows(), static_cast<Eigen::Index>(values.size()));
  for (Eigen::Index i = 0; i < col.rows(); ++i) EXPECT_NEAR(col(i, 0), values[static_cast<std::size_t>(i)], 1e-12);
}

TEST(Predictor, GradientsMatchFiniteDifferences) {
  const TaskSchema schema = TaskSchema::make_default(5, 3);
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 4; ++trial) {
    MblpConfig cfg = tiny_mblp_config();
    cfg.gate_per_dim = trial % 2 == 1;
    cfg.use_memory = trial < 3;
    MblpModel mblp(schema, kDh, cfg, rng());
    const SamplePredictions p = random_predictions(rng, schema, 2, 4);
    const Matrix e1 = random_matrix(4, kDh, rng), e2 = random_matrix(2, kDh, rng);
    const Matrix w = random_matrix(p.count(), 1, rng);
    auto build = [&](ad::Graph &g) {
      if (!cfg.use_memory) return ad::sum(ad::hadamard(mblp.predict(g, nullptr, p), g.constant(w)));
      auto mem = mblp.update(g, mblp.update(g, mblp.initial(g), e1), e2);
      return ad::sum(ad::hadamard(mblp.predict(g, &mem, p), g.constant(w)));
    };
    EXPECT_LT(testing::gradient_check(testing::all_parameters(mblp.parameters()), build, 6, rng, 1e-6, 1e-4),
              1e-4)
        << "trial " << trial;
  }
}

TEST(Predictor, NoGradientReachesExtractionModel) {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  const Corpus corpus = synth_corpus(schema, 5, 1, 0.0);
  EventModel model(schema, Vocabulary::build(corpus), tiny_model_config(kDh), 1);
  MblpModel mblp(schema, kDh, tiny_mblp_config(), 2);
  model.parameters().zero_grad();
  mblp.parameters().zero_grad();
  {
    ad::Graph g(true);
    const ExtractorForward fwd = model.forward(g, corpus[0].sentence);
    const SamplePredictions p = to_predictions(corpus[0].sentence, fwd);
    auto mem = mblp.update(g, mblp.initial(g), fwd.encoding.value());
    g.backward(ad::sum(ad::square(mblp.predict(g, &mem, p))));
  }
  for (const auto &prm : model.parameters().all()) EXPECT_TRUE(prm.grad.isZero(0.0)) << prm.name();
  EXPECT_GT(mblp.parameters().grad_norm(), 0.0);
}

}  // namespace
}  // namespace alee
