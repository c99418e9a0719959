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


// Annotation service: the live active-learning loop behind an HTTP/JSON API.
//
//   GET  /api/status        round, |L|, |U|, pending, completed, latest F1
//   GET  /api/tasks?limit=k pending tasks, importance-descending (204 if none)
//   POST /api/labels        {id, trigger_labels, argument_labels}
//
// Accepted labels are appended to a journal (and flushed) before the ack.
// When the Q-th label of a round arrives, a background worker commits the
// round, retrains, evaluates and selects the next batch; status reports
// training = true meanwhile. On boot the latest snapshot is loaded and the
// journal entries after it are replayed.

#ifndef ALEE_SERVICE_HPP_
#define ALEE_SERVICE_HPP_

#include "alee/config.hpp"
#include "alee/corpus.hpp"
#include "alee/extractor.hpp"
#include "alee/harness.hpp"
#include "alee/mblp.hpp"

#include "json.hpp"

#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

namespace httplib {
class Server;
}

namespace alee {

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;  // null for 204
};

struct PendingTask {
  std::string id;
  double importance = 0.0;
};

class AnnotationService {
 public:
  // Does no work until initialize(); requests before that get 503.
  explicit AnnotationService(ExperimentConfig cfg);
  // Uses prepared data instead of reading the config's data section.
  AnnotationService(ExperimentConfig cfg, ExperimentData data);
  ~AnnotationService();
  AnnotationService(const AnnotationService &) = delete;
  AnnotationService &operator=(const AnnotationService &) = delete;

  // Loads data and model state, replays the journal and publishes the
  // pending batch.
  void initialize();
  bool initialized() const;

  ServiceResponse status() const;
  ServiceResponse tasks(std::optional<int> limit) const;
  ServiceResponse submit(const nlohmann::json &body);

  // Blocks until no round advance is running.
  void wait_idle();

  const TaskSchema &schema() const { return data_->schema; }
  const ExperimentConfig &config() const { return cfg_; }

 private:
  struct Staged {
    std::string id;
    LabelSet labels;
  };

  // Both require mu_ held. lookup() gives 200, 404 (not pending) or 409.
  ServiceResponse lookup(const std::string &id) const;
  void check_and_stage(const std::string &id, const LabelSet &labels, ServiceResponse &err);
  void append_journal(const Staged &s);
  void write_snapshot();
  void fresh_start();
  bool load_snapshot();
  void replay_journal(std::size_t from);
  void advance_round();  // runs without mu_; takes it to read and publish
  void start_advance();
  nlohmann::json task_json(const PendingTask &t) const;
  const Sentence *find_unlabeled(const std::string &id) const;

  ExperimentConfig cfg_;
  std::unique_ptr<ExperimentData> data_;
  StrategyVariant variant_;
  int m_ = 0;
  std::uint64_t seed_ = 1;
  bool has_test_labels_ = false;

  mutable std::mutex mu_;
  std::condition_variable idle_cv_;
  bool initialized_ = false;
  bool training_ = false;
  std::string last_error_;

  std::unique_ptr<EventModel> model_;
  std::unique_ptr<MblpModel> mblp_;
  PoolState pool_;
  std::vector<PendingTask> pending_;  // current round's batch
  std::vector<Staged> staged_;         // labels accepted this round
  std::unordered_map<std::string, std::size_t> unlabeled_index_;
  int model_version_ = 0;
  std::optional<F1Scores> latest_f1_;
  std::vector<CurvePoint> curve_;
  std::size_t journal_entries_ = 0;
  std::size_t labels_since_snapshot_ = 0;
  std::thread worker_;
};

// Registers the routes (with CORS headers and the optional bearer token).
void install_routes(httplib::Server &server, AnnotationService &service, std::string token);

// Serves until the process is stopped; initialization runs in the background
// so that early requests see 503. The bearer token comes from ALEE_TOKEN.
void serve_http(AnnotationService &service, const std::string &host, int port);

// Label payloads accept integers or names ("Attack", "O", "B-Agent").
LabelSet parse_label_payload(const TaskSchema &schema, const nlohmann::json &body);

}  // namespace alee

#endif  // ALEE_SERVICE_HPP_
