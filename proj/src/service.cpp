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


#include "alee/service.hpp"

#include "alee/checkpoint.hpp"
#include "alee/trainer.hpp"

#include "httplib.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <stdexcept>

namespace alee {

using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr const char *kJournal = "journal.jsonl";
constexpr const char *kSnapshot = "snapshot.json";
constexpr const char *kModel = "model.ckpt";

json labels_json(const LabelSet &ls) {
  return {{"trigger_labels", ls.triggers}, {"argument_labels", ls.arguments}};
}

LabelSet labels_from_json(const json &j) {
  LabelSet ls;
  ls.triggers = j.at("trigger_labels").get<std::vector<int>>();
  ls.arguments = j.at("argument_labels").get<std::vector<std::vector<int>>>();
  return ls;
}

int parse_argument_label(const TaskSchema &schema, const json &v) {
  if (v.is_number_integer()) return v.get<int>();
  if (!v.is_string()) throw CorpusError("argument label must be an integer or a string");
  const auto s = v.get<std::string>();
  if (s == "O") return kOutside;
  if (s.size() > 2 && (s[0] == 'B' || s[0] == 'I') && s[1] == '-') {
    const int role = schema.role_index(s.substr(2));
    return s[0] == 'B' ? TaskSchema::begin_label(role) : TaskSchema::inside_label(role);
  }
  throw CorpusError("bad argument label '" + s + "'");
}

void write_file_atomic(const fs::path &path, const std::string &text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::vector<json> read_journal(const fs::path &path) {
  std::vector<json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception &) {
      // A torn final line is an entry that was never acknowledged.
      break;
    }
  }
  return out;
}

}  // namespace

LabelSet parse_label_payload(const TaskSchema &schema, const json &body) {
  if (!body.is_object()) throw CorpusError("label payload must be an object");
  if (!body.contains("trigger_labels") || !body["trigger_labels"].is_array()) {
    throw CorpusError("trigger_labels must be an array");
  }
  if (!body.contains("argument_labels") || !body["argument_labels"].is_array()) {
    throw CorpusError("argument_labels must be an array of arrays");
  }
  LabelSet ls;
  for (const auto &v : body["trigger_labels"]) {
    if (v.is_number_integer()) {
      ls.triggers.push_back(v.get<int>());
    } else if (v.is_string()) {
      ls.triggers.push_back(schema.event_type_index(v.get<std::string>()));
    } else {
      throw CorpusError("trigger label must be an integer or an event type name");
    }
  }
  for (const auto &row : body["argument_labels"]) {
    if (!row.is_array()) throw CorpusError("argument_labels must be an array of arrays");
    std::vector<int> r;
    for (const auto &v : row) r.push_back(parse_argument_label(schema, v));
    ls.arguments.push_back(std::move(r));
  }
  return ls;
}

// ---- lifecycle --------------------------------------------------------------

AnnotationService::AnnotationService(ExperimentConfig cfg) : cfg_(std::move(cfg)) {}

AnnotationService::AnnotationService(ExperimentConfig cfg, ExperimentData data)
    : cfg_(std::move(cfg)), data_(std::make_unique<ExperimentData>(std::move(data))) {}

AnnotationService::~AnnotationService() {
  if (worker_.joinable()) worker_.join();
}

bool AnnotationService::initialized() const {
  std::lock_guard<std::mutex> lock(mu_);
  return initialized_;
}

void AnnotationService::initialize() {
  validate_config(cfg_);
  if (!data_) data_ = std::make_unique<ExperimentData>(prepare_data(cfg_));
  has_test_labels_ = !data_->split.test.empty() &&
                     std::all_of(data_->split.test.begin(), data_->split.test.end(),
                                 [](const Example &e) { return e.labels.has_value(); });
  variant_ = find_variant(cfg_.strategy);
  m_ = variant_.m != 0 ? variant_.m : cfg_.m;
  seed_ = cfg_.seeds.front();
  model_ = std::make_unique<EventModel>(data_->schema, data_->vocab, cfg_.model, seed_);
  if (variant_.trains_predictor) {
    MblpConfig mc = cfg_.mblp;
    mc.use_memory = variant_.use_memory;
    mblp_ = std::make_unique<MblpModel>(data_->schema, cfg_.model.encoder.d_h, mc,
                                        predictor_seed(seed_));
  }
  fs::create_directories(cfg_.state_dir);
  if (!load_snapshot()) fresh_start();
  replay_journal(journal_entries_);
  std::lock_guard<std::mutex> lock(mu_);
  initialized_ = true;
}

void AnnotationService::fresh_start() {
  std::lock_guard<std::mutex> lock(mu_);
  pool_ = data_->split.pool;
  staged_.clear();
  model_version_ = 0;
  curve_.clear();
  latest_f1_.reset();
  journal_entries_ = 0;
  const SelectionPlan first = select_random(pool_.unlabeled, cfg_.query_size, seed_);
  pending_.clear();
  for (const auto &id : first.selected) pending_.push_back({id, 0.0});
  unlabeled_index_.clear();
  for (std::size_t i = 0; i < pool_.unlabeled.size(); ++i) unlabeled_index_[pool_.unlabeled[i].id] = i;
}

void AnnotationService::replay_journal(std::size_t from) {
  const auto entries = read_journal(fs::path(cfg_.state_dir) / kJournal);
  for (std::size_t i = from; i < entries.size(); ++i) {
    bool full = false;
    {
      std::lock_guard<std::mutex> lock(mu_);
      const auto &e = entries[i];
      const std::string id = e.at("id").get<std::string>();
      const LabelSet labels = labels_from_json(e);
      ServiceResponse err;
      check_and_stage(id, labels, err);
      if (err.status != 200) {
        throw std::runtime_error("journal entry " + std::to_string(i) + " does not replay: " +
                                 err.body.dump());
      }
      journal_entries_ = i + 1;
      full = staged_.size() == pending_.size();
      if (full) training_ = true;
    }
    if (full) advance_round();
  }
  // A crash between the last label of a round and its advance.
  bool full = false;
  {
    std::lock_guard<std::mutex> lock(mu_);
    full = !pending_.empty() && staged_.size() == pending_.size();
    if (full) training_ = true;
  }
  if (full) advance_round();
  std::lock_guard<std::mutex> lock(mu_);
  write_snapshot();
}

// ---- persistence ------------------------------------------------------------

void AnnotationService::append_journal(const Staged &s) {
  json j = labels_json(s.labels);
  j["id"] = s.id;
  j["round"] = pool_.round;
  const std::string line = j.dump() + "\n";
  const std::string path = (fs::path(cfg_.state_dir) / kJournal).string();
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw std::runtime_error("cannot open journal " + path);
  const auto written = ::write(fd, line.data(), line.size());
  const int synced = ::fsync(fd);
  ::close(fd);
  if (written != static_cast<ssize_t>(line.size()) || synced != 0) {
    throw std::runtime_error("journal write failed");
  }
  ++journal_entries_;
}

void AnnotationService::write_snapshot() {
  json labeled = json::array();
  for (const auto &ex : pool_.labeled) {
    json e = labels_json(ex.labels);
    e["id"] = ex.sentence.id;
    labeled.push_back(e);
  }
  json unlabeled = json::array();
  for (const auto &s : pool_.unlabeled) unlabeled.push_back(s.id);
  json pending = json::array();
  for (const auto &t : pending_) pending.push_back({{"id", t.id}, {"importance", t.importance}});
  json staged = json::array();
  for (const auto &s : staged_) {
    json e = labels_json(s.labels);
    e["id"] = s.id;
    staged.push_back(e);
  }
  json curve = json::array();
  for (const auto &p : curve_) {
    curve.push_back({{"round", p.round},
                     {"labeled", p.labeled},
                     {"trigger_f1", p.trigger_f1},
                     {"argument_f1", p.argument_f1}});
  }
  json snap = {{"model_version", model_version_},
               {"round", pool_.round},
               {"history", pool_.history},
               {"labeled", labeled},
               {"unlabeled", unlabeled},
               {"pending", pending},
               {"staged", staged},
               {"curve", curve},
               {"journal_entries", journal_entries_}};
  if (latest_f1_) {
    snap["latest_f1"] = {{"trigger", latest_f1_->trigger_f1}, {"argument", latest_f1_->argument_f1}};
  }
  write_file_atomic(fs::path(cfg_.state_dir) / kSnapshot, snap.dump());
  labels_since_snapshot_ = 0;
}

bool AnnotationService::load_snapshot() {
  const fs::path snap_path = fs::path(cfg_.state_dir) / kSnapshot;
  const fs::path model_path = fs::path(cfg_.state_dir) / kModel;
  if (!fs::exists(snap_path)) return false;
  json snap;
  {
    std::ifstream in(snap_path);
    try {
      in >> snap;
    } catch (const json::exception &) {
      return false;
    }
  }
  const int version = snap.at("model_version").get<int>();
  std::optional<Checkpoint> ckpt;
  if (version > 0) {
    if (!fs::exists(model_path)) return false;
    ckpt = read_checkpoint(model_path.string());
    check_schema(*ckpt, data_->schema);
    // The checkpoint is written before the snapshot; a newer checkpoint
    // means the snapshot is stale and the journal is replayed from scratch.
    if (ckpt->config.value("model_version", -1) != version) return false;
  }

  std::lock_guard<std::mutex> lock(mu_);
  std::unordered_map<std::string, const Sentence *> by_id;
  for (const auto &s : data_->split.pool.unlabeled) by_id[s.id] = &s;
  auto sentence = [&](const json &id) -> const Sentence & {
    auto it = by_id.find(id.get<std::string>());
    if (it == by_id.end()) throw std::runtime_error("snapshot names unknown sentence " + id.dump());
    return *it->second;
  };
  PoolState pool;
  for (const auto &e : snap.at("labeled")) pool.labeled.push_back({sentence(e.at("id")), labels_from_json(e)});
  for (const auto &id : snap.at("unlabeled")) pool.unlabeled.push_back(sentence(id));
  pool.round = snap.at("round").get<int>();
  pool.history = snap.at("history").get<std::vector<std::vector<std::string>>>();
  pool.check_invariants();
  pool_ = std::move(pool);
  pending_.clear();
  for (const auto &t : snap.at("pending")) {
    pending_.push_back({t.at("id").get<std::string>(), t.at("importance").get<double>()});
  }
  staged_.clear();
  for (const auto &e : snap.at("staged")) staged_.push_back({e.at("id").get<std::string>(), labels_from_json(e)});
  curve_.clear();
  for (const auto &p : snap.at("curve")) {
    curve_.push_back({p.at("round").get<int>(), p.at("labeled").get<int>(),
                      p.at("trigger_f1").get<double>(), p.at("argument_f1").get<double>()});
  }
  latest_f1_.reset();
  if (snap.contains("latest_f1")) {
    F1Scores f;
    f.trigger_f1 = snap["latest_f1"].at("trigger").get<double>();
    f.argument_f1 = snap["latest_f1"].at("argument").get<double>();
    latest_f1_ = f;
  }
  model_version_ = version;
  journal_entries_ = snap.at("journal_entries").get<std::size_t>();
  unlabeled_index_.clear();
  for (std::size_t i = 0; i < pool_.unlabeled.size(); ++i) unlabeled_index_[pool_.unlabeled[i].id] = i;
  if (ckpt) {
    restore_namespace(*ckpt, model_->parameters());
    if (mblp_) restore_namespace(*ckpt, mblp_->parameters());
  }
  return true;
}

// ---- requests ---------------------------------------------------------------

const Sentence *AnnotationService::find_unlabeled(const std::string &id) const {
  auto it = unlabeled_index_.find(id);
  return it == unlabeled_index_.end() ? nullptr : &pool_.unlabeled[it->second];
}

json AnnotationService::task_json(const PendingTask &t) const {
  const Sentence *s = find_unlabeled(t.id);
  json candidates = json::array();
  for (const auto &c : s->candidates) {
    candidates.push_back({{"start", c.span.start}, {"end", c.span.end}, {"pos", pos_name(c.pos)}});
  }
  return {{"id", t.id},
          {"tokens", s->tokens},
          {"candidates", candidates},
          {"schema", {{"event_types", data_->schema.event_types()}, {"roles", data_->schema.roles()}}},
          {"importance", t.importance},
          {"round", pool_.round}};
}

ServiceResponse AnnotationService::status() const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!initialized_) return {503, {{"error", "service is initializing"}}};
  json curve = json::array();
  for (const auto &p : curve_) {
    curve.push_back({{"round", p.round},
                     {"labeled", p.labeled},
                     {"trigger_f1", p.trigger_f1},
                     {"argument_f1", p.argument_f1}});
  }
  json j = {{"round", pool_.round},
            {"labeled", pool_.labeled.size()},
            {"unlabeled", pool_.unlabeled.size()},
            {"pending", pending_.size() - staged_.size()},
            {"completed", staged_.size()},
            {"query_size", cfg_.query_size},
            {"training", training_},
            {"model_version", model_version_},
            {"strategy", variant_.name},
            {"history", curve},
            {"latest_f1", nullptr}};
  if (latest_f1_) {
    j["latest_f1"] = {{"trigger", latest_f1_->trigger_f1}, {"argument", latest_f1_->argument_f1}};
  }
  if (!last_error_.empty()) j["last_error"] = last_error_;
  return {200, j};
}

ServiceResponse AnnotationService::tasks(std::optional<int> limit) const {
  std::lock_guard<std::mutex> lock(mu_);
  if (!initialized_) return {503, {{"error", "service is initializing"}}};
  if (limit && *limit < 1) return {400, {{"error", "limit must be >= 1"}}};
  std::vector<PendingTask> open;
  for (const auto &t : pending_) {
    const bool done = std::any_of(staged_.begin(), staged_.end(),
                                  [&](const Staged &s) { return s.id == t.id; });
    if (!done) open.push_back(t);
  }
  if (open.empty()) return {204, nullptr};
  std::stable_sort(open.begin(), open.end(), [](const PendingTask &a, const PendingTask &b) {
    if (a.importance != b.importance) return a.importance > b.importance;
    return a.id < b.id;
  });
  if (limit && static_cast<std::size_t>(*limit) < open.size()) open.resize(static_cast<std::size_t>(*limit));
  json list = json::array();
  for (const auto &t : open) list.push_back(task_json(t));
  return {200, {{"tasks", list}}};
}

ServiceResponse AnnotationService::lookup(const std::string &id) const {
  const bool labeled = std::any_of(pool_.labeled.begin(), pool_.labeled.end(),
                                   [&](const LabeledExample &e) { return e.sentence.id == id; }) ||
                       std::any_of(staged_.begin(), staged_.end(),
                                   [&](const Staged &s) { return s.id == id; });
  if (labeled) return {409, {{"error", "sentence " + id + " is already labeled"}}};
  const bool is_pending = std::any_of(pending_.begin(), pending_.end(),
                                      [&](const PendingTask &t) { return t.id == id; });
  if (!is_pending || find_unlabeled(id) == nullptr) {
    return {404, {{"error", "no pending task with id " + id}}};
  }
  return {200, nullptr};
}

void AnnotationService::check_and_stage(const std::string &id, const LabelSet &labels,
                                        ServiceResponse &err) {
  err = lookup(id);
  if (err.status != 200) return;
  const Sentence *s = find_unlabeled(id);
  try {
    validate_labels(data_->schema, *s, labels);
  } catch (const CorpusError &e) {
    err = {422, {{"error", e.what()}}};
    return;
  }
  staged_.push_back({id, labels});
}

ServiceResponse AnnotationService::submit(const json &body) {
  std::unique_lock<std::mutex> lock(mu_);
  if (!initialized_) return {503, {{"error", "service is initializing"}}};
  if (!body.is_object() || !body.contains("id") || !body["id"].is_string()) {
    return {422, {{"error", "payload needs a string id"}}};
  }
  const std::string id = body["id"].get<std::string>();
  LabelSet labels;
  try {
    labels = parse_label_payload(data_->schema, body);
  } catch (const CorpusError &e) {
    // Report an unknown or already labeled id before a payload problem.
    const ServiceResponse probe = lookup(id);
    if (probe.status == 404 || probe.status == 409) return probe;
    return {422, {{"error", e.what()}}};
  }
  ServiceResponse err;
  check_and_stage(id, labels, err);
  if (err.status != 200) return err;
  try {
    append_journal(staged_.back());
  } catch (const std::exception &e) {
    staged_.pop_back();
    return {500, {{"error", e.what()}}};
  }
  ++labels_since_snapshot_;
  const bool advanced = staged_.size() == pending_.size();
  json ack = {{"accepted", true},
              {"id", id},
              {"round", pool_.round},
              {"completed", staged_.size()},
              {"pending", pending_.size() - staged_.size()},
              {"round_advanced", advanced}};
  if (advanced) {
    start_advance();
  } else if (labels_since_snapshot_ >= static_cast<std::size_t>(cfg_.snapshot_every)) {
    write_snapshot();
  }
  return {200, ack};
}

// ---- round advance ----------------------------------------------------------

void AnnotationService::start_advance() {
  training_ = true;
  if (worker_.joinable()) worker_.join();
  worker_ = std::thread([this] { advance_round(); });
}

void AnnotationService::wait_idle() {
  std::unique_lock<std::mutex> lock(mu_);
  idle_cv_.wait(lock, [this] { return !training_; });
}

void AnnotationService::advance_round() {
  try {
    PoolState pool;
    int train_index = 0;
    {
      std::lock_guard<std::mutex> lock(mu_);
      std::vector<std::string> ids;
      std::vector<LabelSet> labels;
      for (const auto &s : staged_) {
        ids.push_back(s.id);
        labels.push_back(s.labels);
      }
      std::mt19937_64 rng(seed_ * 7919ULL + static_cast<std::uint64_t>(pool_.round));
      pool_ = commit_round(pool_, data_->schema, ids, labels, rng);
      staged_.clear();
      pending_.clear();
      unlabeled_index_.clear();
      for (std::size_t i = 0; i < pool_.unlabeled.size(); ++i) {
        unlabeled_index_[pool_.unlabeled[i].id] = i;
      }
      pool = pool_;
      train_index = model_version_;
    }
    TrainerConfig tc = cfg_.trainer;
    tc.seed = seed_;
    tc.m = m_;
    tc.ranking_losses = variant_.ranking_losses;
    train_round(pool, *model_, mblp_.get(), tc, train_index);
    std::optional<F1Scores> f1;
    if (has_test_labels_) f1 = f1_eval(*model_, data_->split.test);
    SelectionPlan plan;
    if (!pool.unlabeled.empty()) {
      plan = select_next(variant_, *model_, mblp_.get(), pool, m_, cfg_.query_size,
                         seed_ * 1000ULL + static_cast<std::uint64_t>(train_index) + 1);
    }
    json ckpt_config = to_json(cfg_);
    ckpt_config["model_version"] = train_index + 1;
    write_checkpoint((fs::path(cfg_.state_dir) / kModel).string(),
                     make_checkpoint(*model_, mblp_.get(), ckpt_config));

    std::lock_guard<std::mutex> lock(mu_);
    model_version_ = train_index + 1;
    latest_f1_ = f1;
    curve_.push_back({train_index, static_cast<int>(pool.labeled.size()),
                      f1 ? f1->trigger_f1 : 0.0, f1 ? f1->argument_f1 : 0.0});
    for (std::size_t i = 0; i < plan.selected.size(); ++i) {
      pending_.push_back({plan.selected[i], i < plan.scores.size() ? plan.scores[i] : 0.0});
    }
    write_snapshot();
    training_ = false;
    last_error_.clear();
  } catch (const std::exception &e) {
    std::lock_guard<std::mutex> lock(mu_);
    last_error_ = e.what();
    training_ = false;
  }
  idle_cv_.notify_all();
}

// ---- HTTP -------------------------------------------------------------------

void install_routes(httplib::Server &server, AnnotationService &service, std::string token) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type, Authorization"},
                              {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  auto reply = [](httplib::Response &res, const ServiceResponse &r) {
    res.status = r.status;
    if (r.status != 204) res.set_content(r.body.dump(), "application/json");
  };
  auto authorized = [token](const httplib::Request &req, httplib::Response &res) {
    if (token.empty()) return true;
    if (req.get_header_value("Authorization") == "Bearer " + token) return true;
    res.status = 401;
    res.set_content(json{{"error", "missing or wrong bearer token"}}.dump(), "application/json");
    return false;
  };
  server.Options(R"(/api/.*)", [](const httplib::Request &, httplib::Response &res) {
    res.status = 204;
  });
  server.Get("/api/status", [&service, reply, authorized](const httplib::Request &req,
                                                          httplib::Response &res) {
    if (authorized(req, res)) reply(res, service.status());
  });
  server.Get("/api/tasks", [&service, reply, authorized](const httplib::Request &req,
                                                         httplib::Response &res) {
    if (!authorized(req, res)) return;
    std::optional<int> limit;
    if (req.has_param("limit")) {
      try {
        limit = std::stoi(req.get_param_value("limit"));
      } catch (const std::exception &) {
        reply(res, {400, {{"error", "limit must be an integer"}}});
        return;
      }
    }
    reply(res, service.tasks(limit));
  });
  server.Post("/api/labels", [&service, reply, authorized](const httplib::Request &req,
                                                           httplib::Response &res) {
    if (!authorized(req, res)) return;
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception &) {
      reply(res, {400, {{"error", "body is not JSON"}}});
      return;
    }
    reply(res, service.submit(body));
  });
}

void serve_http(AnnotationService &service, const std::string &host, int port) {
  httplib::Server server;
  const char *token = std::getenv("ALEE_TOKEN");
  install_routes(server, service, token != nullptr ? token : "");
  std::thread init([&service] {
    try {
      service.initialize();
    } catch (const std::exception &e) {
      std::cerr << "alee serve: initialization failed: " << e.what() << "\n";
      std::exit(1);
    }
  });
  const bool ok = server.listen(host, port);
  init.join();
  if (!ok) throw std::runtime_error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace alee
