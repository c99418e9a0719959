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


#include "alee/config.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace alee {

using json = nlohmann::json;

namespace {

void flatten_into(const json &j, const std::string &prefix, json &out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object()) {
      flatten_into(*it, key, out);
    } else {
      if (out.contains(key)) throw ConfigError("config: key given twice: " + key);
      out[key] = *it;
    }
  }
}

template <typename T>
T get_as(const json &v, const std::string &key) {
  try {
    return v.get<T>();
  } catch (const json::exception &) {
    throw ConfigError("config: wrong type for " + key + ": " + v.dump());
  }
}

// One setter per accepted key.
using Setter = std::function<void(ExperimentConfig &, const json &, const std::string &)>;

template <typename T, typename Field>
Setter field(Field f) {
  return [f](ExperimentConfig &c, const json &v, const std::string &key) {
    f(c) = get_as<T>(v, key);
  };
}

const std::map<std::string, Setter> &setters() {
  static const std::map<std::string, Setter> table = {
      {"data.corpus", field<std::string>([](ExperimentConfig &c) -> auto & { return c.data.corpus_path; })},
      {"data.schema", field<std::string>([](ExperimentConfig &c) -> auto & { return c.data.schema_path; })},
      {"data.event_types", field<int>([](ExperimentConfig &c) -> auto & { return c.data.event_types; })},
      {"data.roles", field<int>([](ExperimentConfig &c) -> auto & { return c.data.roles; })},
      {"data.sentences", field<int>([](ExperimentConfig &c) -> auto & { return c.data.sentences; })},
      {"data.synth_seed", field<std::uint64_t>([](ExperimentConfig &c) -> auto & { return c.data.synth_seed; })},
      {"data.noise", field<double>([](ExperimentConfig &c) -> auto & { return c.data.noise; })},
      {"data.pool_fraction", field<double>([](ExperimentConfig &c) -> auto & { return c.data.pool_fraction; })},
      {"data.split_seed", field<std::uint64_t>([](ExperimentConfig &c) -> auto & { return c.data.split_seed; })},
      {"data.synth.trigger_words_per_type", field<int>([](ExperimentConfig &c) -> auto & { return c.data.synth.trigger_words_per_type; })},
      {"data.synth.fillers_per_role", field<int>([](ExperimentConfig &c) -> auto & { return c.data.synth.fillers_per_role; })},
      {"data.synth.event_type_skew", field<double>([](ExperimentConfig &c) -> auto & { return c.data.synth.event_type_skew; })},
      {"data.synth.trigger_word_skew", field<double>([](ExperimentConfig &c) -> auto & { return c.data.synth.trigger_word_skew; })},
      {"data.synth.two_event_rate", field<double>([](ExperimentConfig &c) -> auto & { return c.data.synth.two_event_rate; })},
      {"data.synth.optional_role_drop", field<double>([](ExperimentConfig &c) -> auto & { return c.data.synth.optional_role_drop; })},
      {"data.synth.no_event_rate", field<double>([](ExperimentConfig &c) -> auto & { return c.data.synth.no_event_rate; })},
      {"encoder.d_h", field<int>([](ExperimentConfig &c) -> auto & { return c.model.encoder.d_h; })},
      {"encoder.layers", field<int>([](ExperimentConfig &c) -> auto & { return c.model.encoder.layers; })},
      {"encoder.heads", field<int>([](ExperimentConfig &c) -> auto & { return c.model.encoder.heads; })},
      {"encoder.max_len", field<int>([](ExperimentConfig &c) -> auto & { return c.model.encoder.max_len; })},
      {"encoder.provider", field<std::string>([](ExperimentConfig &c) -> auto & { return c.model.encoder.provider; })},
      {"extractor.hidden", field<int>([](ExperimentConfig &c) -> auto & { return c.model.extractor.hidden; })},
      {"extractor.heads", field<int>([](ExperimentConfig &c) -> auto & { return c.model.extractor.heads; })},
      {"mblp.d_m", field<int>([](ExperimentConfig &c) -> auto & { return c.mblp.d_m; })},
      {"mblp.hidden", field<int>([](ExperimentConfig &c) -> auto & { return c.mblp.hidden; })},
      {"mblp.gate_per_dim", field<bool>([](ExperimentConfig &c) -> auto & { return c.mblp.gate_per_dim; })},
      {"trainer.ee_batch_size", field<int>([](ExperimentConfig &c) -> auto & { return c.trainer.ee_batch_size; })},
      {"trainer.ee_learning_rate", field<double>([](ExperimentConfig &c) -> auto & { return c.trainer.ee_learning_rate; })},
      {"trainer.mblp_learning_rate", field<double>([](ExperimentConfig &c) -> auto & { return c.trainer.mblp_learning_rate; })},
      {"trainer.epochs", field<int>([](ExperimentConfig &c) -> auto & { return c.trainer.epochs; })},
      {"trainer.clip_norm", field<double>([](ExperimentConfig &c) -> auto & { return c.trainer.clip_norm; })},
      {"trainer.ranking_losses", field<bool>([](ExperimentConfig &c) -> auto & { return c.trainer.ranking_losses; })},
      {"trainer.early_stop", field<bool>([](ExperimentConfig &c) -> auto & { return c.trainer.early_stop; })},
      {"trainer.early_stop_tolerance", field<double>([](ExperimentConfig &c) -> auto & { return c.trainer.early_stop_tolerance; })},
      {"trainer.early_stop_window", field<int>([](ExperimentConfig &c) -> auto & { return c.trainer.early_stop_window; })},
      {"experiment.strategy", field<std::string>([](ExperimentConfig &c) -> auto & { return c.strategy; })},
      {"experiment.query_size", field<int>([](ExperimentConfig &c) -> auto & { return c.query_size; })},
      {"experiment.m", [](ExperimentConfig &c, const json &v, const std::string &) { c.m = parse_m(v); }},
      {"experiment.max_rounds", field<int>([](ExperimentConfig &c) -> auto & { return c.max_rounds; })},
      {"experiment.seeds", field<std::vector<std::uint64_t>>([](ExperimentConfig &c) -> auto & { return c.seeds; })},
      {"experiment.stop_at_trigger_f1", field<double>([](ExperimentConfig &c) -> auto & { return c.stop_at_trigger_f1; })},
      {"experiment.init_checkpoint", field<std::string>([](ExperimentConfig &c) -> auto & { return c.init_checkpoint; })},
      {"experiment.target_trigger_f1", field<double>([](ExperimentConfig &c) -> auto & { return c.target_trigger_f1; })},
      {"experiment.sweep_target_fraction", field<double>([](ExperimentConfig &c) -> auto & { return c.sweep_target_fraction; })},
      {"experiment.full_data_epochs", field<int>([](ExperimentConfig &c) -> auto & { return c.full_data_epochs; })},
      {"experiment.sweep_m", [](ExperimentConfig &c, const json &v, const std::string &key) {
         if (!v.is_array()) throw ConfigError("config: " + key + " must be an array");
         c.sweep_m.clear();
         for (const auto &e : v) c.sweep_m.push_back(parse_m(e));
       }},
      {"experiment.ablation_fractions", field<std::vector<double>>([](ExperimentConfig &c) -> auto & { return c.ablation_fractions; })},
      {"service.state_dir", field<std::string>([](ExperimentConfig &c) -> auto & { return c.state_dir; })},
      {"service.snapshot_every", field<int>([](ExperimentConfig &c) -> auto & { return c.snapshot_every; })},
  };
  return table;
}

}  // namespace

json flatten_config(const json &j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  json out = json::object();
  flatten_into(j, "", out);
  return out;
}

int parse_m(const json &v) {
  if (v.is_null()) return kAllPredictions;
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "all") return kAllPredictions;
    try {
      std::size_t used = 0;
      const int m = std::stoi(s, &used);
      if (used == s.size() && m >= 1) return m;
    } catch (const std::exception &) {
    }
    throw ConfigError("config: m must be a positive integer or \"inf\", got " + s);
  }
  if (v.is_number_integer() && v.get<long long>() >= 1) {
    const long long m = v.get<long long>();
    return m >= kAllPredictions ? kAllPredictions : static_cast<int>(m);
  }
  throw ConfigError("config: m must be a positive integer or \"inf\", got " + v.dump());
}

json m_to_json(int m) { return m == kAllPredictions ? json("inf") : json(m); }

std::string m_to_string(int m) { return m == kAllPredictions ? "inf" : std::to_string(m); }

ExperimentConfig parse_config(const json &j) {
  ExperimentConfig cfg;
  const json flat = flatten_config(j);
  const auto &table = setters();
  for (auto it = flat.begin(); it != flat.end(); ++it) {
    auto s = table.find(it.key());
    if (s == table.end()) throw ConfigError("config: unknown key " + it.key());
    s->second(cfg, *it, it.key());
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ConfigError("config: " + path + ": " + e.what());
  }
  return parse_config(j);
}

json to_json(const ExperimentConfig &c) {
  json j;
  j["data"] = {{"corpus", c.data.corpus_path},
               {"schema", c.data.schema_path},
               {"event_types", c.data.event_types},
               {"roles", c.data.roles},
               {"sentences", c.data.sentences},
               {"synth_seed", c.data.synth_seed},
               {"noise", c.data.noise},
               {"pool_fraction", c.data.pool_fraction},
               {"split_seed", c.data.split_seed},
               {"synth",
                {{"trigger_words_per_type", c.data.synth.trigger_words_per_type},
                 {"fillers_per_role", c.data.synth.fillers_per_role},
                 {"event_type_skew", c.data.synth.event_type_skew},
                 {"trigger_word_skew", c.data.synth.trigger_word_skew},
                 {"two_event_rate", c.data.synth.two_event_rate},
                 {"optional_role_drop", c.data.synth.optional_role_drop},
                 {"no_event_rate", c.data.synth.no_event_rate}}}};
  j["encoder"] = {{"d_h", c.model.encoder.d_h},
                  {"layers", c.model.encoder.layers},
                  {"heads", c.model.encoder.heads},
                  {"max_len", c.model.encoder.max_len},
                  {"provider", c.model.encoder.provider}};
  j["extractor"] = {{"hidden", c.model.extractor.hidden}, {"heads", c.model.extractor.heads}};
  j["mblp"] = {{"d_m", c.mblp.d_m}, {"hidden", c.mblp.hidden}, {"gate_per_dim", c.mblp.gate_per_dim}};
  j["trainer"] = {{"ee_batch_size", c.trainer.ee_batch_size},
                  {"ee_learning_rate", c.trainer.ee_learning_rate},
                  {"mblp_learning_rate", c.trainer.mblp_learning_rate},
                  {"epochs", c.trainer.epochs},
                  {"clip_norm", c.trainer.clip_norm},
                  {"ranking_losses", c.trainer.ranking_losses},
                  {"early_stop", c.trainer.early_stop},
                  {"early_stop_tolerance", c.trainer.early_stop_tolerance},
                  {"early_stop_window", c.trainer.early_stop_window}};
  json sweep = json::array();
  for (int m : c.sweep_m) sweep.push_back(m_to_json(m));
  j["experiment"] = {{"strategy", c.strategy},
                     {"query_size", c.query_size},
                     {"m", m_to_json(c.m)},
                     {"max_rounds", c.max_rounds},
                     {"seeds", c.seeds},
                     {"stop_at_trigger_f1", c.stop_at_trigger_f1},
                     {"init_checkpoint", c.init_checkpoint},
                     {"target_trigger_f1", c.target_trigger_f1},
                     {"sweep_target_fraction", c.sweep_target_fraction},
                     {"full_data_epochs", c.full_data_epochs},
                     {"sweep_m", sweep},
                     {"ablation_fractions", c.ablation_fractions}};
  j["service"] = {{"state_dir", c.state_dir}, {"snapshot_every", c.snapshot_every}};
  return j;
}

void validate_config(const ExperimentConfig &c) {
  auto require = [](bool ok, const std::string &what) {
    if (!ok) throw ConfigError("config: " + what);
  };
  require(c.data.event_types >= 2, "data.event_types must be >= 2");
  require(c.data.roles >= 1, "data.roles must be >= 1");
  require(c.data.sentences >= 2, "data.sentences must be >= 2");
  require(c.data.noise >= 0.0 && c.data.noise <= 1.0, "data.noise must lie in [0,1]");
  require(c.data.pool_fraction > 0.0 && c.data.pool_fraction < 1.0,
          "data.pool_fraction must lie in (0,1)");
  require(c.model.encoder.d_h >= 1 && c.model.encoder.layers >= 0 && c.model.encoder.heads >= 1,
          "encoder sizes must be positive");
  require(c.model.encoder.d_h % 4 == 0, "encoder.d_h must be a multiple of 4");
  require(c.model.encoder.d_h % c.model.encoder.heads == 0,
          "encoder.d_h must be divisible by encoder.heads");
  require(c.model.encoder.max_len >= 1, "encoder.max_len must be >= 1");
  require(c.mblp.d_m >= 1, "mblp.d_m must be >= 1");
  require(c.trainer.ee_batch_size >= 1, "trainer.ee_batch_size must be >= 1");
  require(c.trainer.ee_learning_rate > 0.0 && c.trainer.mblp_learning_rate > 0.0,
          "learning rates must be positive");
  require(c.trainer.epochs >= 1, "trainer.epochs must be >= 1");
  require(c.trainer.clip_norm > 0.0, "trainer.clip_norm must be positive");
  require(c.trainer.early_stop_window >= 1, "trainer.early_stop_window must be >= 1");
  require(c.query_size >= 1, "experiment.query_size must be >= 1");
  require(c.m >= 1, "experiment.m must be >= 1");
  require(c.max_rounds >= 0, "experiment.max_rounds must be >= 0");
  require(!c.seeds.empty(), "experiment.seeds must not be empty");
  require(c.sweep_target_fraction > 0.0 && c.sweep_target_fraction <= 1.0,
          "experiment.sweep_target_fraction must lie in (0,1]");
  for (double f : c.ablation_fractions) {
    require(f > 0.0 && f <= 1.0, "experiment.ablation_fractions must lie in (0,1]");
  }
  require(c.full_data_epochs >= 1, "experiment.full_data_epochs must be >= 1");
  require(c.snapshot_every >= 1, "service.snapshot_every must be >= 1");
}

}  // namespace alee
