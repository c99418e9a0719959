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


#include "alee/harness.hpp"

#include "alee/checkpoint.hpp"
#include "alee/mblp.hpp"
#include "alee/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace alee {

using json = nlohmann::json;

// ---- F1 ---------------------------------------------------------------------

std::vector<std::pair<Span, int>> bio_spans(std::span<const int> row) {
  std::vector<std::pair<Span, int>> out;
  const int n = static_cast<int>(row.size());
  int t = 0;
  while (t < n) {
    const int label = row[static_cast<std::size_t>(t)];
    if (label == kOutside) {
      ++t;
      continue;
    }
    const int role = TaskSchema::role_of(label);
    int e = t + 1;
    while (e < n && row[static_cast<std::size_t>(e)] == TaskSchema::inside_label(role)) ++e;
    out.push_back({Span{t, e}, role});
    t = e;
  }
  return out;
}

namespace {

struct Counts {
  long long correct = 0, predicted = 0, gold = 0;
};

void f1_from_counts(const Counts &c, double &p, double &r, double &f) {
  p = c.predicted > 0 ? static_cast<double>(c.correct) / static_cast<double>(c.predicted) : 0.0;
  r = c.gold > 0 ? static_cast<double>(c.correct) / static_cast<double>(c.gold) : 0.0;
  f = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
}

std::set<ArgumentMention> mentions(const LabelSet &ls) {
  std::set<ArgumentMention> out;
  for (std::size_t c = 0; c < ls.arguments.size(); ++c) {
    for (const auto &[span, role] : bio_spans(ls.arguments[c])) {
      out.insert({static_cast<int>(c), span, role});
    }
  }
  return out;
}

}  // namespace

F1Scores score_labels(std::span<const LabelSet> gold, std::span<const LabelSet> predicted) {
  if (gold.empty()) throw std::invalid_argument("f1: empty test set");
  if (gold.size() != predicted.size()) throw std::invalid_argument("f1: gold/predicted size mismatch");
  Counts tr, ar;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const LabelSet &g = gold[i];
    const LabelSet &p = predicted[i];
    if (g.triggers.size() != p.triggers.size()) {
      throw std::invalid_argument("f1: candidate count mismatch");
    }
    for (std::size_t c = 0; c < g.triggers.size(); ++c) {
      const bool gp = g.triggers[c] != kNoEvent;
      const bool pp = p.triggers[c] != kNoEvent;
      tr.gold += gp;
      tr.predicted += pp;
      tr.correct += gp && pp && g.triggers[c] == p.triggers[c];
    }
    const auto gm = mentions(g);
    const auto pm = mentions(p);
    ar.gold += static_cast<long long>(gm.size());
    ar.predicted += static_cast<long long>(pm.size());
    for (const auto &m : pm) ar.correct += gm.count(m);
  }
  F1Scores s;
  f1_from_counts(tr, s.trigger_precision, s.trigger_recall, s.trigger_f1);
  f1_from_counts(ar, s.argument_precision, s.argument_recall, s.argument_f1);
  return s;
}

F1Scores f1_eval(const EventModel &model, const Corpus &test) {
  if (test.empty()) throw std::invalid_argument("f1_eval: empty test set");
  std::vector<LabelSet> gold, pred;
  gold.reserve(test.size());
  pred.reserve(test.size());
  for (const auto &ex : test) {
    if (!ex.labels) throw std::invalid_argument("f1_eval: unlabeled test sentence " + ex.sentence.id);
    gold.push_back(*ex.labels);
    pred.push_back(decode(model.predict(ex.sentence)));
  }
  return score_labels(gold, pred);
}

// ---- strategies -------------------------------------------------------------

const std::vector<StrategyVariant> &strategy_variants() {
  static const std::vector<StrategyVariant> v = {
      {"mblp", StrategyKind::kMblp, true, true, true, 0},
      {"full", StrategyKind::kMblp, true, true, true, 0},
      {"mblp_batch", StrategyKind::kMblp, true, true, false, kAllPredictions},
      {"lp_ie", StrategyKind::kLossPred, true, false, true, 0},
      {"loss_pred", StrategyKind::kLossPred, true, false, false, kAllPredictions},
      {"lp_mean", StrategyKind::kLossPred, true, false, false, kAllPredictions},
      {"random", StrategyKind::kRandom, false, false, false, 0},
      {"uncertainty", StrategyKind::kUncertainty, false, false, false, 0},
      {"diversity", StrategyKind::kDiversity, false, false, false, 0},
      {"uncert_diver", StrategyKind::kUncertDiver, false, false, false, 0},
  };
  return v;
}

StrategyVariant find_variant(const std::string &name) {
  for (const auto &v : strategy_variants()) {
    if (v.name == name) return v;
  }
  throw std::invalid_argument("unknown strategy: " + name);
}

const std::vector<std::string> &ablation_variants() {
  static const std::vector<std::string> v = {"lp_mean", "lp_ie", "mblp_batch", "full"};
  return v;
}

// ---- data -------------------------------------------------------------------

ExperimentData prepare_data(const ExperimentConfig &cfg) {
  ExperimentData d;
  d.schema = cfg.data.schema_path.empty()
                 ? TaskSchema::make_default(cfg.data.event_types, cfg.data.roles)
                 : load_schema(cfg.data.schema_path);
  d.corpus = cfg.data.corpus_path.empty()
                 ? synth_corpus(d.schema, cfg.data.sentences, cfg.data.synth_seed, cfg.data.noise,
                                cfg.data.synth)
                 : load_corpus(cfg.data.corpus_path, d.schema);
  d.split = split_pool(d.corpus, cfg.data.pool_fraction, cfg.data.split_seed);
  d.vocab = Vocabulary::build(d.corpus);
  return d;
}

// ---- curves -----------------------------------------------------------------

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size()));
}

std::vector<AggregatePoint> aggregate_runs(std::span<const SeedRun> runs) {
  std::vector<AggregatePoint> out;
  if (runs.empty()) return out;
  std::size_t rounds = std::numeric_limits<std::size_t>::max();
  for (const auto &r : runs) rounds = std::min(rounds, r.points.size());
  for (std::size_t i = 0; i < rounds; ++i) {
    std::vector<double> tr, ar, lab;
    for (const auto &r : runs) {
      tr.push_back(r.points[i].trigger_f1);
      ar.push_back(r.points[i].argument_f1);
      lab.push_back(r.points[i].labeled);
    }
    const double n = static_cast<double>(runs.size());
    AggregatePoint a;
    a.round = runs.front().points[i].round;
    a.seeds = static_cast<int>(runs.size());
    a.labeled = std::accumulate(lab.begin(), lab.end(), 0.0) / n;
    a.trigger_mean = std::accumulate(tr.begin(), tr.end(), 0.0) / n;
    a.trigger_std = population_std(tr);
    a.argument_mean = std::accumulate(ar.begin(), ar.end(), 0.0) / n;
    a.argument_std = population_std(ar);
    out.push_back(a);
  }
  return out;
}

std::optional<double> labels_to_target(std::span<const CurvePoint> points, double target) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].trigger_f1 >= target) {
      if (i == 0) return static_cast<double>(points[0].labeled);
      const CurvePoint &a = points[i - 1];
      const CurvePoint &b = points[i];
      const double t = (target - a.trigger_f1) / (b.trigger_f1 - a.trigger_f1);
      return a.labeled + t * (b.labeled - a.labeled);
    }
  }
  return std::nullopt;
}

double trigger_f1_at(std::span<const CurvePoint> points, double labeled) {
  if (points.empty()) throw std::invalid_argument("trigger_f1_at: empty curve");
  if (labeled <= points.front().labeled) return points.front().trigger_f1;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (labeled <= points[i].labeled) {
      const CurvePoint &a = points[i - 1];
      const CurvePoint &b = points[i];
      const double t = (labeled - a.labeled) / static_cast<double>(b.labeled - a.labeled);
      return a.trigger_f1 + t * (b.trigger_f1 - a.trigger_f1);
    }
  }
  return points.back().trigger_f1;
}

namespace {

double argument_f1_at(std::span<const CurvePoint> points, double labeled) {
  std::vector<CurvePoint> swapped(points.begin(), points.end());
  for (auto &p : swapped) p.trigger_f1 = p.argument_f1;
  return trigger_f1_at(swapped, labeled);
}

// Runs fn(i) for i in [0, n) on up to worker_threads() threads; rethrows the
// first exception.
template <typename Fn>
void parallel_for(std::size_t n, Fn fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(worker_threads()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto &t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<Matrix> labeled_encodings(const EventModel &model, const PoolState &pool) {
  std::vector<Matrix> out;
  out.reserve(pool.labeled.size());
  for (const auto &ex : pool.labeled) out.push_back(model.encoder().encode(ex.sentence).token_features);
  return out;
}

void init_from_checkpoint(const ExperimentConfig &cfg, const ExperimentData &data, EventModel &model) {
  if (cfg.init_checkpoint.empty()) return;
  const Checkpoint ckpt = read_checkpoint(cfg.init_checkpoint);
  check_schema(ckpt, data.schema);
  if (ckpt.vocab != data.vocab.tokens()) {
    throw CheckpointError("checkpoint vocabulary differs from the corpus vocabulary");
  }
  restore_namespace(ckpt, model.parameters());
}

}  // namespace

std::uint64_t predictor_seed(std::uint64_t seed) { return seed * 0x9E3779B97F4A7C15ULL + 11; }

SelectionPlan select_next(const StrategyVariant &variant, const EventModel &model,
                          const MblpModel *mblp, const PoolState &pool, int m, int query_size,
                          std::uint64_t seed) {
  const TaskSchema &schema = model.schema();
  if (variant.trains_predictor && mblp == nullptr) {
    throw std::invalid_argument("select_next: strategy " + variant.name + " needs a loss predictor");
  }
  if (variant.kind == StrategyKind::kRandom) return select_random(pool.unlabeled, query_size, seed);
  const PoolAnalysis analysis = analyze_pool(model, pool.unlabeled);
  switch (variant.kind) {
    case StrategyKind::kMblp: return select_mblp(analysis, *mblp, schema, m, query_size, seed);
    case StrategyKind::kLossPred:
      return select_loss_pred_greedy(analysis, *mblp, schema, m, query_size);
    case StrategyKind::kUncertainty: return select_uncertainty(analysis, schema, query_size);
    case StrategyKind::kDiversity:
      return select_diversity(analysis, labeled_encodings(model, pool), query_size);
    case StrategyKind::kUncertDiver:
      return select_uncert_diver(analysis, schema, labeled_encodings(model, pool), query_size);
    case StrategyKind::kRandom: break;
  }
  throw std::logic_error("select_next: unhandled strategy");
}

SeedRun run_seed(const ExperimentData &data, const ExperimentConfig &cfg,
                 const StrategyVariant &variant, int m, std::uint64_t seed,
                 std::optional<double> stop_at, int max_rounds) {
  const auto start = std::chrono::steady_clock::now();
  const TaskSchema &schema = data.schema;
  EventModel model(schema, data.vocab, cfg.model, seed);
  init_from_checkpoint(cfg, data, model);
  std::unique_ptr<MblpModel> mblp;
  if (variant.trains_predictor) {
    MblpConfig mc = cfg.mblp;
    mc.use_memory = variant.use_memory;
    mblp = std::make_unique<MblpModel>(schema, cfg.model.encoder.d_h, mc, predictor_seed(seed));
  }
  TrainerConfig tc = cfg.trainer;
  tc.seed = seed;
  tc.m = m;
  tc.ranking_losses = variant.ranking_losses;

  const Oracle oracle(data.corpus);
  std::mt19937_64 rng(seed * 7919ULL + 1);
  PoolState pool = data.split.pool;
  const SelectionPlan first = select_random(pool.unlabeled, cfg.query_size, seed);
  pool = commit_round(pool, schema, first.selected, oracle.label(first.selected), rng);

  SeedRun run;
  run.seed = seed;
  std::ostringstream log;
  for (int round = 0;; ++round) {
    const TrainLog tl = train_round(pool, model, mblp.get(), tc, round);
    write_log_jsonl(log, tl, seed);
    const F1Scores f1 = f1_eval(model, data.split.test);
    run.points.push_back({round, static_cast<int>(pool.labeled.size()), f1.trigger_f1, f1.argument_f1});
    if (pool.unlabeled.empty()) {
      run.stop_reason = "pool empty";
      break;
    }
    if (stop_at && f1.trigger_f1 >= *stop_at) {
      run.stop_reason = "target reached";
      break;
    }
    if (max_rounds > 0 && round + 1 >= max_rounds) {
      run.stop_reason = "round cap";
      break;
    }
    const SelectionPlan plan = select_next(variant, model, mblp.get(), pool, m, cfg.query_size,
                                            seed * 1000ULL + static_cast<std::uint64_t>(round) + 1);
    pool = commit_round(pool, schema, plan.selected, oracle.label(plan.selected), rng);
  }
  run.log_jsonl = log.str();
  run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return run;
}

LearningCurve run_experiment(const ExperimentData &data, const ExperimentConfig &cfg,
                             const RunOptions &options) {
  validate_config(cfg);
  const StrategyVariant variant = find_variant(options.strategy.value_or(cfg.strategy));
  int m = variant.m != 0 ? variant.m : options.m.value_or(cfg.m);
  if (variant.m != 0 && options.m) m = *options.m;
  std::optional<double> stop_at;
  const double stop = options.stop_at_trigger_f1.value_or(cfg.stop_at_trigger_f1);
  if (stop > 0.0) stop_at = stop;
  const int max_rounds = options.max_rounds.value_or(cfg.max_rounds);

  LearningCurve curve;
  curve.strategy = variant.name;
  curve.m = m;
  curve.pool_size = static_cast<int>(data.split.pool.total());
  curve.runs.resize(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), [&](std::size_t i) {
    curve.runs[i] = run_seed(data, cfg, variant, m, cfg.seeds[i], stop_at, max_rounds);
  });
  curve.aggregate = aggregate_runs(curve.runs);
  return curve;
}

// ---- artifacts --------------------------------------------------------------

void write_curve_csv(std::ostream &out, const LearningCurve &curve) {
  out << "round,labeled,trigger_f1,argument_f1,seed\n";
  out.precision(6);
  for (const auto &r : curve.runs) {
    for (const auto &p : r.points) {
      out << p.round << ',' << p.labeled << ',' << std::fixed << p.trigger_f1 << ','
          << p.argument_f1 << ',' << r.seed << '\n';
      out.unsetf(std::ios::fixed);
    }
  }
  for (const auto &a : curve.aggregate) {
    out << a.round << ',' << a.labeled << ',' << std::fixed << a.trigger_mean << ','
        << a.argument_mean << ",mean\n";
    out << a.round << ',' << a.labeled << ',' << a.trigger_std << ',' << a.argument_std << ",std\n";
    out.unsetf(std::ios::fixed);
  }
}

json curve_summary(const LearningCurve &curve, const ExperimentConfig &cfg) {
  json seeds = json::array();
  std::vector<double> reached;
  for (const auto &r : curve.runs) {
    const auto ltt = labels_to_target(r.points, cfg.target_trigger_f1);
    if (ltt) reached.push_back(*ltt);
    const CurvePoint &last = r.points.back();
    seeds.push_back({{"seed", r.seed},
                     {"rounds", r.points.size()},
                     {"stop_reason", r.stop_reason},
                     {"final_labeled", last.labeled},
                     {"final_trigger_f1", last.trigger_f1},
                     {"final_argument_f1", last.argument_f1},
                     {"labels_to_target", ltt ? json(*ltt) : json(nullptr)},
                     {"seconds", r.seconds}});
  }
  json agg = json::array();
  for (const auto &a : curve.aggregate) {
    agg.push_back({{"round", a.round},
                   {"labeled", a.labeled},
                   {"seeds", a.seeds},
                   {"trigger_f1_mean", a.trigger_mean},
                   {"trigger_f1_std", a.trigger_std},
                   {"argument_f1_mean", a.argument_mean},
                   {"argument_f1_std", a.argument_std}});
  }
  json j;
  j["strategy"] = curve.strategy;
  j["m"] = m_to_json(curve.m);
  j["pool_size"] = curve.pool_size;
  j["target_trigger_f1"] = cfg.target_trigger_f1;
  j["mean_labels_to_target"] =
      reached.size() == curve.runs.size() && !reached.empty()
          ? json(std::accumulate(reached.begin(), reached.end(), 0.0) /
                 static_cast<double>(reached.size()))
          : json(nullptr);
  j["seeds"] = seeds;
  j["aggregate"] = agg;
  j["config"] = to_json(cfg);
  return j;
}

void write_artifacts(const std::string &dir, const ExperimentConfig &cfg, const LearningCurve &curve) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  {
    std::ofstream out(base / "curve.csv");
    write_curve_csv(out, curve);
  }
  {
    std::ofstream out(base / "summary.json");
    out << curve_summary(curve, cfg).dump(2) << "\n";
  }
  {
    std::ofstream out(base / "log.jsonl");
    for (const auto &r : curve.runs) out << r.log_jsonl;
  }
}

// ---- ablation ---------------------------------------------------------------

AblationReport ablation_suite(const ExperimentData &data, const ExperimentConfig &cfg) {
  AblationReport report;
  report.fractions = cfg.ablation_fractions;
  report.variants = ablation_variants();
  const double pool = static_cast<double>(data.split.pool.total());
  const double max_fraction =
      report.fractions.empty() ? 1.0
                               : *std::max_element(report.fractions.begin(), report.fractions.end());
  const int rounds = static_cast<int>(std::ceil(max_fraction * pool / cfg.query_size - 1e-9));
  for (const auto &name : report.variants) {
    RunOptions opt;
    opt.strategy = name;
    opt.stop_at_trigger_f1 = 0.0;
    opt.max_rounds = std::max(1, rounds);
    LearningCurve curve = run_experiment(data, cfg, opt);
    std::vector<double> tr, ar;
    for (double f : report.fractions) {
      double t = 0.0, a = 0.0;
      for (const auto &r : curve.runs) {
        t += trigger_f1_at(r.points, f * pool);
        a += argument_f1_at(r.points, f * pool);
      }
      tr.push_back(t / static_cast<double>(curve.runs.size()));
      ar.push_back(a / static_cast<double>(curve.runs.size()));
    }
    report.trigger_f1.push_back(std::move(tr));
    report.argument_f1.push_back(std::move(ar));
    report.curves.push_back(std::move(curve));
  }
  return report;
}

json to_json(const AblationReport &report) {
  json rows = json::array();
  for (std::size_t v = 0; v < report.variants.size(); ++v) {
    json cells = json::array();
    for (std::size_t f = 0; f < report.fractions.size(); ++f) {
      cells.push_back({{"fraction", report.fractions[f]},
                       {"trigger_f1", report.trigger_f1[v][f]},
                       {"argument_f1", report.argument_f1[v][f]}});
    }
    rows.push_back({{"variant", report.variants[v]}, {"cells", cells}});
  }
  return {{"fractions", report.fractions}, {"rows", rows}};
}

// ---- m sweep ----------------------------------------------------------------

std::vector<F1Scores> full_data_scores(const ExperimentData &data, const ExperimentConfig &cfg) {
  std::vector<F1Scores> out(cfg.seeds.size());
  const Oracle oracle(data.corpus);
  std::vector<std::string> all;
  for (const auto &s : data.split.pool.unlabeled) all.push_back(s.id);
  parallel_for(cfg.seeds.size(), [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    EventModel model(data.schema, data.vocab, cfg.model, seed);
    init_from_checkpoint(cfg, data, model);
    std::mt19937_64 rng(seed * 7919ULL + 1);
    const PoolState pool =
        commit_round(data.split.pool, data.schema, all, oracle.label(all), rng);
    TrainerConfig tc = cfg.trainer;
    tc.seed = seed;
    tc.epochs = cfg.full_data_epochs;
    train_round(pool, model, nullptr, tc, 0);
    out[i] = f1_eval(model, data.split.test);
  });
  return out;
}

SweepReport sweep_m(const ExperimentData &data, const ExperimentConfig &cfg) {
  SweepReport report;
  const auto full = full_data_scores(data, cfg);
  for (const auto &s : full) report.full_data_trigger_f1 += s.trigger_f1;
  report.full_data_trigger_f1 /= static_cast<double>(full.size());
  report.target = cfg.sweep_target_fraction * report.full_data_trigger_f1;
  const double pool = static_cast<double>(data.split.pool.total());
  for (int m : cfg.sweep_m) {
    RunOptions opt;
    opt.strategy = "mblp";
    opt.m = m;
    opt.stop_at_trigger_f1 = report.target;
    LearningCurve curve = run_experiment(data, cfg, opt);
    SweepEntry e;
    e.m = m;
    bool all_reached = true;
    double sum = 0.0;
    for (const auto &r : curve.runs) {
      auto l = labels_to_target(r.points, report.target);
      e.per_seed_labels.push_back(l);
      if (l) {
        sum += *l;
      } else {
        all_reached = false;
      }
    }
    if (all_reached) e.fraction_of_pool = sum / static_cast<double>(curve.runs.size()) / pool;
    report.entries.push_back(std::move(e));
    report.curves.push_back(std::move(curve));
  }
  return report;
}

json to_json(const SweepReport &report) {
  json entries = json::array();
  for (const auto &e : report.entries) {
    json per_seed = json::array();
    for (const auto &l : e.per_seed_labels) per_seed.push_back(l ? json(*l) : json(nullptr));
    entries.push_back({{"m", m_to_json(e.m)},
                       {"percent_of_pool", e.fraction_of_pool ? json(100.0 * *e.fraction_of_pool)
                                                              : json(">100%")},
                       {"labels_per_seed", per_seed}});
  }
  return {{"full_data_trigger_f1", report.full_data_trigger_f1},
          {"target_trigger_f1", report.target},
          {"entries", entries}};
}

int worker_threads() {
  if (const char *env = std::getenv("ALEE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

}  // namespace alee
