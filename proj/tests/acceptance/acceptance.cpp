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


// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
//
//   acceptance [--only name[,name...]] [--config path]
//
// The experiment criteria run on the default synthetic corpus with the
// compact model of configs/desk.json.

#include "alee/attention.hpp"
#include "alee/config.hpp"
#include "alee/harness.hpp"
#include "alee/trainer.hpp"

#include "../support.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace alee {
namespace {

using testing::all_parameters;
using testing::brute_force_top_m;
using testing::gradient_check;
using testing::naive_attention;
using testing::naive_memory_update;
using testing::naive_rank_loss;
using testing::random_matrix;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string labels_string(const std::optional<double> &v) {
  return v ? fmt("%.0f", *v) : std::string("unreached");
}

std::vector<double> uniform_values(std::mt19937_64 &rng, std::size_t n, double hi = 2.0) {
  std::vector<double> v(n);
  for (auto &x : v) x = std::uniform_real_distribution<double>(0.0, hi)(rng);
  return v;
}

Matrix column(const std::vector<double> &v) {
  return Eigen::Map<const Matrix>(v.data(), static_cast<Eigen::Index>(v.size()), 1);
}

// Central differences round off at about eps * |loss| / h, so the relative
// error is floored at a scale proportional to the loss.
double loss_floor(double loss) { return 1e-4 * std::max(1.0, std::abs(loss)); }

double checked(std::vector<ad::Parameter *> params, const std::function<ad::Expr(ad::Graph &)> &build,
               int per_param, std::mt19937_64 &rng) {
  ad::Graph g(false);
  const double loss = build(g).scalar();
  return gradient_check(std::move(params), build, per_param, rng, 1e-6, loss_floor(loss));
}

Outcome gradient_suite() {
  std::mt19937_64 rng(101);
  double ee = 0.0, ranking = 0.0, memory = 0.0;
  constexpr int kInstances = 20;
  for (int i = 0; i < kInstances; ++i) {
    const TaskSchema schema = TaskSchema::make_default(3 + i % 5, 2 + i % 3);
    const Corpus corpus = synth_corpus(schema, 4, rng(), 0.3);
    EventModel model(schema, Vocabulary::build(corpus), testing::tiny_model_config(8, 1 + i % 2, 2), rng());
    const Example &ex = corpus[static_cast<std::size_t>(i) % corpus.size()];
    ee = std::max(ee, checked(all_parameters(model.parameters()),
                              [&](ad::Graph &g) { return ad::sum(model.loss_column(model.forward(g, ex.sentence), *ex.labels)); },
                              3, rng));

    nn::ParameterStore store("x");
    const std::size_t batch = 2 + rng() % 4;
    std::vector<std::vector<double>> truth;
    std::vector<ad::Parameter *> preds;
    for (std::size_t s = 0; s < batch; ++s) {
      const std::size_t n = 2 + rng() % 12;
      truth.push_back(uniform_values(rng, n));
      preds.push_back(&store.add("p" + std::to_string(s), column(uniform_values(rng, n))));
    }
    const int m = 1 + static_cast<int>(rng() % 5);
    ranking = std::max(ranking, checked(preds, [&](ad::Graph &g) {
      std::vector<ad::Expr> terms, scores;
      std::vector<double> true_scores;
      for (std::size_t s = 0; s < batch; ++s) {
        const ad::Expr p = g.parameter(*preds[s]);
        terms.push_back(ad_losses::mse(g, truth[s], p));
        terms.push_back(ad_losses::internal_rank(g, truth[s], p));
        scores.push_back(ad_losses::top_m_mean(g, p, m));
        true_scores.push_back(importance(truth[s], m).top_m_mean);
      }
      terms.push_back(ad_losses::external_rank(g, scores, true_scores));
      return ad::sum_scalars(g, terms);
    }, 20, rng));

    MblpConfig mc = testing::tiny_mblp_config();
    mc.gate_per_dim = i % 4 == 3;
    MblpModel mblp(schema, 8, mc, rng());
    const SamplePredictions sp = model.predict(ex.sentence);
    const Matrix e1 = random_matrix(3, 8, rng), e2 = random_matrix(5, 8, rng);
    const Matrix w = random_matrix(sp.count(), 1, rng);
    memory = std::max(memory, checked(all_parameters(mblp.parameters()), [&](ad::Graph &g) {
      auto mem = mblp.update(g, mblp.update(g, mblp.initial(g), e1), e2);
      return ad::sum(ad::hadamard(mblp.predict(g, &mem, sp), g.constant(w)));
    }, 5, rng));
  }
  const double worst = std::max({ee, ranking, memory});
  return {worst < 1e-4, std::to_string(kInstances) + " instances per family; max rel err L_ee " +
                            fmt("%.2e", ee) + ", mse+rank " + fmt("%.2e", ranking) +
                            ", memory+predictor " + fmt("%.2e", memory)};
}

Outcome oracle_equivalence() {
  std::mt19937_64 rng(202);
  constexpr int kCases = 1000;
  bool importance_exact = true;
  double d_ri = 0.0, d_re = 0.0, d_mse = 0.0, d_att = 0.0, d_smm = 0.0;
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = 1 + rng() % 40;
    const auto t = uniform_values(rng, n), p = uniform_values(rng, n);
    const int m = 1 + static_cast<int>(rng() % 15);
    importance_exact &= importance(p, m).top_m_mean == brute_force_top_m(p, m);
    std::vector<double> in_order;
    for (std::size_t i : descending_order(t)) in_order.push_back(p[i]);
    d_ri = std::max(d_ri, std::abs(internal_rank_loss(in_order) - naive_rank_loss(t, p)));
    d_re = std::max(d_re, std::abs(external_rank_loss(in_order) - naive_rank_loss(t, p)));
    double mse = 0.0;
    for (std::size_t i = 0; i < n; ++i) mse += (t[i] - p[i]) * (t[i] - p[i]);
    d_mse = std::max(d_mse, std::abs(mse_loss(t, p) - mse));

    const int heads = 1 + static_cast<int>(rng() % 3);
    const Eigen::Index dk = heads * (1 + static_cast<Eigen::Index>(rng() % 4));
    const Eigen::Index dv = heads * (1 + static_cast<Eigen::Index>(rng() % 4));
    const Eigen::Index nq = 1 + static_cast<Eigen::Index>(rng() % 6), nk = 1 + static_cast<Eigen::Index>(rng() % 8);
    const Matrix q = random_matrix(nq, dk, rng), k = random_matrix(nk, dk, rng), v = random_matrix(nk, dv, rng);
    d_att = std::max(d_att, (attention(q, k, v, heads) - naive_attention(q, k, v, heads)).cwiseAbs().maxCoeff());
  }
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  int smm_cases = 0;
  for (int model = 0; model < 100; ++model) {
    MblpConfig mc = testing::tiny_mblp_config();
    mc.gate_per_dim = model % 2 == 1;
    MblpModel mblp(schema, 8, mc, rng());
    MemoryState mem = mblp.reset();
    for (int step = 0; step < 10; ++step, ++smm_cases) {
      const EncoderOutput enc{random_matrix(1 + static_cast<Eigen::Index>(rng() % 9), 8, rng)};
      const MemoryState next = mblp.smm_update(mem, enc);
      for (Task task : kTasks) {
        const Matrix oracle = naive_memory_update(mblp.parameters(), task_name(task), mem.of(task), enc.token_features);
        d_smm = std::max(d_smm, (oracle - next.of(task)).cwiseAbs().maxCoeff());
      }
      mem = next;
    }
  }
  const double worst = std::max({d_ri, d_re, d_mse, d_att, d_smm});
  return {importance_exact && worst < 1e-6 && smm_cases == kCases,
          std::to_string(kCases) + " cases each; importance " + (importance_exact ? "exact" : "MISMATCH") +
              "; max |d| rank_I " + fmt("%.1e", d_ri) + ", rank_E " + fmt("%.1e", d_re) + ", mse " +
              fmt("%.1e", d_mse) + ", attention " + fmt("%.1e", d_att) + ", smm_update " + fmt("%.1e", d_smm)};
}

Outcome counters() {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  const Corpus corpus = synth_corpus(schema, 700, 5, 0.3);
  std::vector<Sentence> unlabeled;
  for (const auto &ex : corpus) unlabeled.push_back(ex.sentence);
  EventModel model(schema, Vocabulary::build(corpus), testing::tiny_model_config(8), 1);
  MblpModel mblp(schema, 8, testing::tiny_mblp_config(), 2);
  const SelectionPlan plan = select_mblp(analyze_pool(model, unlabeled), mblp, schema, 10, 100, 3);
  bool ok = plan.scorings == 700 && plan.smm_updates == 100 && plan.selected.size() == 100;
  std::string detail = "select_mblp |U|=700 Q=100: " + std::to_string(plan.scorings) + " scorings, " +
                       std::to_string(plan.smm_updates) + " SMM updates";
  for (int batches : {2, 3, 7}) {
    PoolState pool;
    for (int i = 0; i < 8 * batches; ++i) pool.labeled.push_back({corpus[static_cast<std::size_t>(i)].sentence, *corpus[static_cast<std::size_t>(i)].labels});
    TrainerConfig tc;
    tc.ee_batch_size = 8;
    tc.epochs = 2;
    tc.early_stop = false;
    const TrainLog log = train_round(pool, model, &mblp, tc);
    for (int e = 0; e < 2; ++e) {
      ok &= log.ee_updates_per_epoch[static_cast<std::size_t>(e)] == batches;
      ok &= log.mblp_updates_per_epoch[static_cast<std::size_t>(e)] == batches - 1;
    }
    detail += "; B=" + std::to_string(batches) + ": " + std::to_string(log.ee_updates_per_epoch[0]) + " EE / " +
              std::to_string(log.mblp_updates_per_epoch[0]) + " MBLP per epoch";
  }
  return {ok, detail};
}

Outcome isolation() {
  const TaskSchema schema = TaskSchema::make_default(8, 6);
  const Corpus corpus = synth_corpus(schema, 64, 6, 0.3);
  int mblp_checks = 0, ee_checks = 0, violations = 0;
  for (bool memory : {true, false}) {
    EventModel model(schema, Vocabulary::build(corpus), testing::tiny_model_config(8), 1);
    MblpConfig mc = testing::tiny_mblp_config();
    mc.use_memory = memory;
    MblpModel mblp(schema, 8, mc, 2);
    PoolState pool;
    for (const auto &ex : corpus) pool.labeled.push_back({ex.sentence, *ex.labels});
    auto ee = model.parameters().snapshot();
    auto mb = mblp.parameters().snapshot();
    TrainHooks hooks;
    hooks.after_mblp_update = [&](int, int) {
      violations += model.parameters().snapshot() != ee;
      mb = mblp.parameters().snapshot();
      ++mblp_checks;
    };
    hooks.after_ee_update = [&](int, int) {
      violations += mblp.parameters().snapshot() != mb;
      ee = model.parameters().snapshot();
      ++ee_checks;
    };
    TrainerConfig tc;
    tc.ee_batch_size = 8;
    tc.epochs = 3;
    tc.early_stop = false;
    train_round(pool, model, &mblp, tc, 0, hooks);
  }
  return {violations == 0 && mblp_checks > 0 && ee_checks > 0,
          std::to_string(mblp_checks) + " MBLP updates and " + std::to_string(ee_checks) +
              " EE updates compared bitwise; " + std::to_string(violations) + " violations"};
}

Outcome invariants() {
  std::mt19937_64 rng(303);
  std::vector<std::string> failures;
  const TaskSchema schema = TaskSchema::make_default(8, 6);

  // Gate range.
  for (int c = 0; c < 200; ++c) {
    MblpConfig mc = testing::tiny_mblp_config();
    mc.gate_per_dim = c % 2 == 1;
    MblpModel mblp(schema, 8, mc, rng());
    ad::Graph g(false);
    auto mem = mblp.initial(g);
    for (Task t : kTasks) {
      const Matrix gates = mblp.gates(g, t, mem.rows[static_cast<std::size_t>(task_index(t))], random_matrix(1 + c % 7, 8, rng, 3.0)).value();
      if (!(gates.minCoeff() > 0.0 && gates.maxCoeff() < 1.0)) failures.push_back("gate range");
    }
  }
  // Reset idempotence.
  {
    MblpModel mblp(schema, 8, testing::tiny_mblp_config(), 4);
    MemoryState m = mblp.reset();
    for (int i = 0; i < 5; ++i) m = mblp.smm_update(m, EncoderOutput{random_matrix(4, 8, rng)});
    const MemoryState r1 = mblp.reset();
    if (!(mblp.reset() == r1) || m == r1) failures.push_back("reset idempotence");
    mblp.smm_update(r1, EncoderOutput{random_matrix(3, 8, rng)});
    if (!(mblp.reset() == r1)) failures.push_back("reset after update");
  }
  // Balanced uniform cross-entropy.
  for (int k = 2; k <= 64; ++k) {
    SamplePredictions p;
    p.num_candidates = 1;
    p.length = 0;
    p.tasks[0].probs = Matrix::Constant(1, k, 1.0 / k);
    const LabelSet ls{{k - 1}, {{}}};
    const double ce = ee_loss(p, ls).per_prediction[0];
    if (std::abs(balanced(ce, k) - 1.0) > 1e-6) failures.push_back("balanced uniform CE at K=" + std::to_string(k));
  }
  // Stored labels after a short loop, and decoded predictions.
  {
    ExperimentConfig cfg;
    cfg.data.sentences = 300;
    cfg.model = testing::tiny_model_config(8);
    cfg.mblp = testing::tiny_mblp_config();
    const ExperimentData data = prepare_data(cfg);
    const Oracle oracle(data.corpus);
    EventModel model(data.schema, data.vocab, cfg.model, 1);
    MblpModel mblp(data.schema, 8, cfg.mblp, 2);
    PoolState pool = data.split.pool;
    std::mt19937_64 commit_rng(9);
    for (int round = 0; round < 4; ++round) {
      const SelectionPlan plan = round == 0 ? select_random(pool.unlabeled, 20, 1)
                                            : select_mblp(analyze_pool(model, pool.unlabeled), mblp, data.schema, 10, 20, round);
      pool = commit_round(pool, data.schema, plan.selected, oracle.label(plan.selected), commit_rng);
      TrainerConfig tc;
      tc.epochs = 2;
      train_round(pool, model, &mblp, tc, round);
    }
    pool.check_invariants();
    int stored = 0;
    for (const auto &ex : pool.labeled) {
      ++stored;
      try {
        validate_labels(data.schema, ex.sentence, ex.labels);
      } catch (const CorpusError &e) {
        failures.push_back(std::string("stored label: ") + e.what());
      }
      for (std::size_t c = 0; c < ex.labels.triggers.size(); ++c) {
        const auto &row = ex.labels.arguments[c];
        if (!is_well_formed_bio(row)) failures.push_back("BIO on " + ex.sentence.id);
        if (ex.labels.triggers[c] == kNoEvent && std::any_of(row.begin(), row.end(), [](int l) { return l != kOutside; })) {
          failures.push_back("NA with arguments on " + ex.sentence.id);
        }
      }
      try {
        validate_labels(data.schema, ex.sentence, decode(model.predict(ex.sentence)));
      } catch (const CorpusError &e) {
        failures.push_back(std::string("decoded label: ") + e.what());
      }
    }
    if (stored != 80) failures.push_back("expected 80 stored labels");
  }
  // decode of one-hot gold is the identity.
  for (int c = 0; c < 1000; ++c) {
    const int k = 1 + static_cast<int>(rng() % 3), n = 1 + static_cast<int>(rng() % 10);
    LabelSet ls;
    SamplePredictions p;
    p.num_candidates = k;
    p.length = n;
    p.tasks[0].probs = Matrix::Zero(k, 8);
    p.tasks[1].probs = Matrix::Zero(k * n, 13);
    for (int i = 0; i < k; ++i) {
      const int type = static_cast<int>(rng() % 8);
      ls.triggers.push_back(type);
      std::vector<int> row(static_cast<std::size_t>(n), kOutside);
      if (type != kNoEvent) {
        for (int j = 0; j < n;) {
          if (rng() % 3 == 0) {
            const int r = static_cast<int>(rng() % 6), len = 1 + static_cast<int>(rng() % 3);
            row[static_cast<std::size_t>(j)] = TaskSchema::begin_label(r);
            for (int t = j + 1; t < std::min(n, j + len); ++t) row[static_cast<std::size_t>(t)] = TaskSchema::inside_label(r);
            j += len;
          } else {
            ++j;
          }
        }
      }
      p.tasks[0].probs(i, type) = 1.0;
      for (int j = 0; j < n; ++j) p.tasks[1].probs(i * n + j, row[static_cast<std::size_t>(j)]) = 1.0;
      ls.arguments.push_back(std::move(row));
    }
    if (!(decode(p) == ls)) {
      failures.push_back("decode identity");
      break;
    }
  }
  // Per-batch argmax under positive scaling.
  {
    std::vector<std::string> ids;
    for (int i = 0; i < 500; ++i) ids.push_back("s" + std::to_string(1000 + i));
    for (int c = 0; c < 100; ++c) {
      const auto s = uniform_values(rng, ids.size());
      const double scale = std::exp(std::uniform_real_distribution<double>(-6, 6)(rng));
      const auto a = select_batches(ids, 25, c, [&](std::size_t i) { return s[i]; }, nullptr);
      const auto b = select_batches(ids, 25, c, [&](std::size_t i) { return scale * s[i]; }, nullptr);
      if (a.selected != b.selected) failures.push_back("scaling invariance");
    }
  }
  std::string detail = "gate range, reset, balanced uniform CE, stored/decoded label validity, decode identity, scaling invariance";
  if (!failures.empty()) detail = std::to_string(failures.size()) + " failures, first: " + failures.front();
  return {failures.empty(), detail};
}

Outcome label_efficiency(const ExperimentConfig &cfg, const ExperimentData &data) {
  const double pool = static_cast<double>(data.split.pool.total());
  std::map<std::string, std::vector<std::optional<double>>> labels;
  for (const std::string s : {"mblp", "random", "loss_pred"}) {
    RunOptions opt;
    opt.strategy = s;
    opt.stop_at_trigger_f1 = cfg.target_trigger_f1;
    const LearningCurve c = run_experiment(data, cfg, opt);
    for (const auto &r : c.runs) labels[s].push_back(labels_to_target(r.points, cfg.target_trigger_f1));
  }
  // An unreached target counts as more labels than any reached one.
  auto value = [&](const std::optional<double> &v) { return v ? *v : pool + 1.0; };
  int groups = 0;
  std::string per_seed;
  double sum[3] = {0, 0, 0};
  const std::size_t n = cfg.seeds.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double mb = value(labels["mblp"][i]), rn = value(labels["random"][i]), lp = value(labels["loss_pred"][i]);
    const bool ok = labels["mblp"][i] && mb <= rn - 0.1 * pool && mb <= lp;
    groups += ok;
    sum[0] += mb, sum[1] += rn, sum[2] += lp;
    per_seed += " seed " + std::to_string(cfg.seeds[i]) + " (" + labels_string(labels["mblp"][i]) + "/" +
                labels_string(labels["random"][i]) + "/" + labels_string(labels["loss_pred"][i]) + (ok ? " ok)" : " x)");
  }
  const double dn = static_cast<double>(n);
  return {groups >= 4 && n == 5,
          "labels to trigger F1 " + fmt("%.2f", cfg.target_trigger_f1) + " mblp/random/loss_pred:" + per_seed +
              "; means " + fmt("%.0f", sum[0] / dn) + "/" + fmt("%.0f", sum[1] / dn) + "/" + fmt("%.0f", sum[2] / dn) +
              "; margin needed " + fmt("%.0f", 0.1 * pool) + "; " + std::to_string(groups) + "/" + std::to_string(n) + " seed groups hold"};
}

Outcome ablation_shape(ExperimentConfig cfg, const ExperimentData &data) {
  cfg.ablation_fractions = {0.2};
  const AblationReport r = ablation_suite(data, cfg);
  auto f1 = [&](const std::string &v) {
    for (std::size_t i = 0; i < r.variants.size(); ++i) {
      if (r.variants[i] == v) return r.trigger_f1[i][0];
    }
    throw std::logic_error("missing ablation variant " + v);
  };
  const double full = f1("full"), batch = f1("mblp_batch"), ie = f1("lp_ie"), mean = f1("lp_mean");
  const bool ok = full >= batch && full >= ie && (full > batch || full > ie);
  return {ok, "trigger F1 at 20% labeled: full " + fmt("%.4f", full) + ", mblp_batch " + fmt("%.4f", batch) +
                  ", lp_ie " + fmt("%.4f", ie) + ", lp_mean " + fmt("%.4f", mean)};
}

Outcome m_sweep_shape(ExperimentConfig cfg, const ExperimentData &data) {
  cfg.sweep_m = {2, 5, 10, kAllPredictions};
  const SweepReport r = sweep_m(data, cfg);
  const double pool = static_cast<double>(data.split.pool.total());
  std::vector<double> y;
  std::string detail = "target trigger F1 " + fmt("%.4f", r.target) + " (full data " + fmt("%.4f", r.full_data_trigger_f1) + "); labels:";
  for (const auto &e : r.entries) {
    y.push_back(e.fraction_of_pool ? *e.fraction_of_pool * pool : 2.0 * pool);
    detail += " m=" + m_to_string(e.m) + " " + (e.fraction_of_pool ? fmt("%.0f", *e.fraction_of_pool * pool) : std::string(">100%"));
  }
  bool increasing = true;
  for (std::size_t i = 1; i < y.size(); ++i) increasing &= y[i] >= y[i - 1];
  const double interior = std::min(y[1], y[2]);
  const bool ok = !increasing && interior < y.front() && interior < y.back();
  return {ok, detail};
}

}  // namespace
}  // namespace alee

int main(int argc, char **argv) {
  using namespace alee;
  std::set<std::string> only;
  std::string config = ALEE_DESK_CONFIG;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      for (std::string item; std::getline(ss, item, ',');) only.insert(item);
    } else if (a == "--config" && i + 1 < argc) {
      config = argv[++i];
    } else {
      std::cerr << "usage: acceptance [--only name[,name...]] [--config path]\n";
      return 2;
    }
  }

  std::optional<ExperimentConfig> cfg;
  std::optional<ExperimentData> data;
  auto experiment = [&]() -> std::pair<const ExperimentConfig &, const ExperimentData &> {
    if (!cfg) {
      cfg = load_config(config);
      data = prepare_data(*cfg);
    }
    return {*cfg, *data};
  };

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"gradient_suite", gradient_suite},
      {"oracle_equivalence", oracle_equivalence},
      {"algorithmic_counters", counters},
      {"parameter_isolation", isolation},
      {"invariant_suite", invariants},
      {"desk_label_efficiency", [&] { auto [c, d] = experiment(); return label_efficiency(c, d); }},
      {"ablation_shape", [&] { auto [c, d] = experiment(); return ablation_shape(c, d); }},
      {"m_sweep_shape", [&] { auto [c, d] = experiment(); return m_sweep_shape(c, d); }},
  };

  int failed = 0;
  for (const auto &[name, run] : criteria) {
    if (!only.empty() && !only.count(name)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = run();
    } catch (const std::exception &e) {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !out.pass;
    std::cout << (out.pass ? "PASS " : "FAIL ") << name << " (" << fmt("%.1f", secs) << " s): " << out.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
