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


// Experiment orchestration: F1 evaluation, full active-learning loops over
// several seeds, learning curves, the ablation table and the m sweep.

#ifndef ALEE_HARNESS_HPP_
#define ALEE_HARNESS_HPP_

#include "alee/config.hpp"
#include "alee/corpus.hpp"
#include "alee/encoder.hpp"
#include "alee/extractor.hpp"
#include "alee/mblp.hpp"
#include "alee/selection.hpp"

#include "json.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace alee {

struct F1Scores {
  double trigger_precision = 0.0;
  double trigger_recall = 0.0;
  double trigger_f1 = 0.0;
  double argument_precision = 0.0;
  double argument_recall = 0.0;
  double argument_f1 = 0.0;
};

// An argument as (trigger candidate, span, role).
struct ArgumentMention {
  int candidate = 0;
  Span span;
  int role = 0;
  auto operator<=>(const ArgumentMention &) const = default;
};

// Spans of a BIO row. A stray I-r opens a new span.
std::vector<std::pair<Span, int>> bio_spans(std::span<const int> row);

// Micro P/R/F1 over sentences. A trigger is correct when its candidate is
// predicted with the gold non-NA type; an argument when candidate, span and
// role all match. Throws std::invalid_argument on an empty set or mismatched
// shapes.
F1Scores score_labels(std::span<const LabelSet> gold, std::span<const LabelSet> predicted);
F1Scores f1_eval(const EventModel &model, const Corpus &test);

// A selection strategy plus the predictor variant it trains.
struct StrategyVariant {
  std::string name;
  StrategyKind kind = StrategyKind::kRandom;
  bool trains_predictor = false;
  bool use_memory = false;
  bool ranking_losses = false;
  // 0 = take m from the experiment config.
  int m = 0;
};

// mblp (= full), mblp_batch, lp_ie, loss_pred (= lp_mean), random,
// uncertainty, diversity, uncert_diver.
const std::vector<StrategyVariant> &strategy_variants();
StrategyVariant find_variant(const std::string &name);
// Names of the ablation variants, in report order.
const std::vector<std::string> &ablation_variants();

// Corpus, split and vocabulary shared by every run of an experiment.
struct ExperimentData {
  TaskSchema schema;
  Corpus corpus;
  PoolSplit split;
  Vocabulary vocab;
};

ExperimentData prepare_data(const ExperimentConfig &cfg);

struct CurvePoint {
  int round = 0;
  int labeled = 0;
  double trigger_f1 = 0.0;
  double argument_f1 = 0.0;
};

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<CurvePoint> points;
  std::string stop_reason;
  std::string log_jsonl;
  double seconds = 0.0;
};

struct AggregatePoint {
  int round = 0;
  double labeled = 0.0;
  int seeds = 0;
  double trigger_mean = 0.0;
  double trigger_std = 0.0;  // population
  double argument_mean = 0.0;
  double argument_std = 0.0;
};

struct LearningCurve {
  std::string strategy;
  int m = 0;
  int pool_size = 0;
  std::vector<SeedRun> runs;
  std::vector<AggregatePoint> aggregate;
};

// Mean and population std over rounds that every listed run reached.
std::vector<AggregatePoint> aggregate_runs(std::span<const SeedRun> runs);
double population_std(std::span<const double> values);

// Labeled count at which trigger F1 first reaches `target`, interpolating
// linearly between rounds; nullopt when never reached.
std::optional<double> labels_to_target(std::span<const CurvePoint> points, double target);
// Trigger F1 at `labeled` examples by linear interpolation (flat beyond the
// ends of the curve).
double trigger_f1_at(std::span<const CurvePoint> points, double labeled);

struct RunOptions {
  // Overrides for one run; unset fields come from the config.
  std::optional<std::string> strategy;
  std::optional<int> m;
  std::optional<double> stop_at_trigger_f1;
  std::optional<int> max_rounds;
};

// Seed of the loss predictor of a run with the given seed.
std::uint64_t predictor_seed(std::uint64_t seed);

// Query of one round for `variant`; `mblp` must be non-null for the
// predictor-based strategies.
SelectionPlan select_next(const StrategyVariant &variant, const EventModel &model,
                          const MblpModel *mblp, const PoolState &pool, int m, int query_size,
                          std::uint64_t seed);

// One seed of the loop: fresh initialization, random first query of size Q,
// then {train, evaluate, select, label} until the pool is empty, the round
// cap is hit or the stop F1 is reached.
SeedRun run_seed(const ExperimentData &data, const ExperimentConfig &cfg,
                 const StrategyVariant &variant, int m, std::uint64_t seed,
                 std::optional<double> stop_at, int max_rounds);

// All seeds of one strategy. Seeds run in parallel, up to ALEE_THREADS.
LearningCurve run_experiment(const ExperimentData &data, const ExperimentConfig &cfg,
                             const RunOptions &options = {});

// Writes curve.csv, summary.json and log.jsonl into `dir`.
void write_artifacts(const std::string &dir, const ExperimentConfig &cfg,
                     const LearningCurve &curve);
void write_curve_csv(std::ostream &out, const LearningCurve &curve);
nlohmann::json curve_summary(const LearningCurve &curve, const ExperimentConfig &cfg);

struct AblationReport {
  std::vector<double> fractions;
  std::vector<std::string> variants;
  // f1[v][f]: seed-mean trigger F1 of variant v at fraction f of the pool.
  std::vector<std::vector<double>> trigger_f1;
  std::vector<std::vector<double>> argument_f1;
  std::vector<LearningCurve> curves;
};

AblationReport ablation_suite(const ExperimentData &data, const ExperimentConfig &cfg);
nlohmann::json to_json(const AblationReport &report);

struct SweepEntry {
  int m = 0;
  // Seed-mean labels-to-target as a fraction of the pool; nullopt = ">100%".
  std::optional<double> fraction_of_pool;
  std::vector<std::optional<double>> per_seed_labels;
};

struct SweepReport {
  double full_data_trigger_f1 = 0.0;  // seed mean
  double target = 0.0;
  std::vector<SweepEntry> entries;
  std::vector<LearningCurve> curves;
};

// Target = sweep_target_fraction * mean trigger F1 after training on the
// whole pool. Each entry is the seed mean of per-seed labels-to-target;
// unset when any seed misses the target.
SweepReport sweep_m(const ExperimentData &data, const ExperimentConfig &cfg);
nlohmann::json to_json(const SweepReport &report);

// Mean trigger/argument F1 after training on the whole pool, per seed.
std::vector<F1Scores> full_data_scores(const ExperimentData &data, const ExperimentConfig &cfg);

// Worker count from ALEE_THREADS (default: hardware concurrency, at least 1).
int worker_threads();

}  // namespace alee

#endif  // ALEE_HARNESS_HPP_
