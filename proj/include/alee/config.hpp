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


// Run configuration: one JSON file, keys addressed as dotted paths
// ("encoder.d_h", "trainer.epochs", ...). Nested objects and flat dotted keys
// are equivalent; unknown keys are rejected.

#ifndef ALEE_CONFIG_HPP_
#define ALEE_CONFIG_HPP_

#include "alee/corpus.hpp"
#include "alee/extractor.hpp"
#include "alee/mblp.hpp"
#include "alee/selection.hpp"
#include "alee/trainer.hpp"

#include "json.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace alee {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Where the sentences come from: a JSONL corpus file, or the generator.
struct DataConfig {
  std::string corpus_path;  // empty = synthesize
  std::string schema_path;  // empty = default schema of event_types / roles
  int event_types = 8;      // including NA
  int roles = 6;
  int sentences = 2000;
  std::uint64_t synth_seed = 2026;
  double noise = 0.3;
  SynthOptions synth;
  double pool_fraction = 0.7;
  std::uint64_t split_seed = 17;
};

struct ExperimentConfig {
  DataConfig data;
  ModelConfig model;
  MblpConfig mblp;
  TrainerConfig trainer;
  std::string strategy = "mblp";
  int query_size = 50;
  int m = 10;           // kAllPredictions for "inf"
  int max_rounds = 0;   // 0 = until the pool is empty
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  // Stop a seed once trigger F1 reaches this value (0 = never).
  double stop_at_trigger_f1 = 0.0;
  // Optional warm start for the extraction model ("ee/" arrays only).
  std::string init_checkpoint;
  // Labels-to-target reporting.
  double target_trigger_f1 = 0.80;
  double sweep_target_fraction = 0.9;
  // Epoch budget of the whole-pool reference run used by the m sweep.
  int full_data_epochs = 30;
  std::vector<int> sweep_m = {2, 5, 10, kAllPredictions};
  std::vector<double> ablation_fractions = {0.1, 0.2, 0.3, 0.4, 0.5};
  // Annotation service.
  std::string state_dir = "alee_state";
  int snapshot_every = 10;  // labels between pool snapshots
};

// Flattens nested objects into dotted keys.
nlohmann::json flatten_config(const nlohmann::json &j);

ExperimentConfig parse_config(const nlohmann::json &j);
ExperimentConfig load_config(const std::string &path);
nlohmann::json to_json(const ExperimentConfig &cfg);

// Throws ConfigError on non-positive sizes, bad fractions or an empty seed list.
void validate_config(const ExperimentConfig &cfg);

// "inf" / null <-> kAllPredictions.
int parse_m(const nlohmann::json &v);
nlohmann::json m_to_json(int m);
std::string m_to_string(int m);

}  // namespace alee

#endif  // ALEE_CONFIG_HPP_
