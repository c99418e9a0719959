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

#include "alee/attention.hpp"

#include <stdexcept>

namespace alee {

MblpModel::MblpModel(const TaskSchema &schema, int d_h, const MblpConfig &config,
                     std::uint64_t seed)
    : config_(config),
      d_h_(d_h),
      categories_{schema.num_event_types(), schema.num_argument_labels()},
      store_("mblp") {
  if (config.d_m < 1) throw std::invalid_argument("mblp: d_m must be positive");
  std::mt19937_64 rng(seed);
  const int d_m = config.d_m;
  const int hidden = config.hidden > 0 ? config.hidden : d_m;
  for (Task t : kTasks) {
    TaskHead &h = heads_[static_cast<std::size_t>(task_index(t))];
    const std::string p = task_name(t);
    const int k = categories(t);
    const int in_dim = t == Task::kTrigger ? d_h : 3 * d_h;
    if (config.use_memory) {
      h.memory_init = &store_.add(p + "/memory_init", nn::normal(k, d_m, 0.5, rng));
      h.update_query = nn::Linear(store_, p + "/update_query", d_m, d_m, rng, false);
      h.update_key = nn::Linear(store_, p + "/update_key", d_h, d_m, rng, false);
      h.write = nn::Linear(store_, p + "/write", d_h, d_m, rng, false);
      h.gate = nn::Linear(store_, p + "/gate", d_h + d_m, config.gate_per_dim ? d_m : 1, rng);
      h.read_query = nn::Linear(store_, p + "/read_query", in_dim, d_m, rng, false);
      h.read_key = nn::Linear(store_, p + "/read_key", d_m, d_m, rng, false);
      h.regressor = nn::FeedForward(store_, p + "/regressor", in_dim + k + d_m, hidden, 1, rng);
    } else {
      h.regressor = nn::FeedForward(store_, p + "/regressor", in_dim + k, hidden, 1, rng);
    }
  }
}

MblpModel::GraphMemory MblpModel::initial(ad::Graph &g) const {
  if (!config_.use_memory) throw std::logic_error("mblp: model has no memory");
  GraphMemory m;
  for (Task t : kTasks) m.rows[static_cast<std::size_t>(task_index(t))] = g.parameter(*head(t).memory_init);
  return m;
}

ad::Expr MblpModel::gates(ad::Graph &g, Task t, const ad::Expr &memory,
                          const Matrix &encoding) const {
  const TaskHead &h = head(t);
  ad::Expr enc = g.constant(encoding);
  ad::Expr f = attention(h.update_query(g, memory), h.update_key(g, enc), enc);
  ad::Expr parts[] = {f, memory};
  return ad::sigmoid(h.gate(g, ad::concat_cols(parts)));
}

ad::Expr MblpModel::update_task(ad::Graph &g, Task t, const ad::Expr &memory,
                                const ad::Expr &enc) const {
  const TaskHead &h = head(t);
  if (memory.cols() != config_.d_m || enc.cols() != d_h_) {
    throw std::invalid_argument("mblp: memory or encoding dimension mismatch");
  }
  ad::Expr f = attention(h.update_query(g, memory), h.update_key(g, enc), enc);
  ad::Expr parts[] = {f, memory};
  ad::Expr gate = ad::sigmoid(h.gate(g, ad::concat_cols(parts)));
  ad::Expr written = h.write(g, f);
  ad::Expr keep = ad::affine(gate, -1.0, 1.0);
  if (config_.gate_per_dim) {
    return ad::add(ad::hadamard(written, gate), ad::hadamard(memory, keep));
  }
  return ad::add(ad::scale_rows(written, gate), ad::scale_rows(memory, keep));
}

MblpModel::GraphMemory MblpModel::update(ad::Graph &g, const GraphMemory &memory,
                                         const Matrix &encoding) const {
  if (!config_.use_memory) throw std::logic_error("mblp: model has no memory");
  if (encoding.rows() == 0) throw std::invalid_argument("mblp: empty encoding");
  ad::Expr enc = g.constant(encoding);
  GraphMemory out;
  for (Task t : kTasks) {
    auto i = static_cast<std::size_t>(task_index(t));
    out.rows[i] = update_task(g, t, memory.rows[i], enc);
  }
  return out;
}

ad::Expr MblpModel::predict(ad::Graph &g, const GraphMemory *memory, Task t, const Matrix &hidden,
                            const Matrix &probs) const {
  const TaskHead &h = head(t);
  if (probs.cols() != categories(t)) throw std::invalid_argument("mblp: category count mismatch");
  ad::Expr hid = g.constant(hidden);
  ad::Expr p = g.constant(probs);
  ad::Expr input;
  if (config_.use_memory) {
    if (memory == nullptr) throw std::invalid_argument("mblp: no memory for task");
    const ad::Expr &mem = memory->rows[static_cast<std::size_t>(task_index(t))];
    if (!mem.valid()) throw std::invalid_argument("mblp: task has no memory matrix");
    ad::Expr read = attention(h.read_query(g, hid), h.read_key(g, mem), mem);
    ad::Expr parts[] = {hid, p, read};
    input = ad::concat_cols(parts);
  } else {
    ad::Expr parts[] = {hid, p};
    input = ad::concat_cols(parts);
  }
  return ad::softplus(h.regressor(g, input));
}

ad::Expr MblpModel::predict(ad::Graph &g, const GraphMemory *memory,
                            const SamplePredictions &preds) const {
  if (preds.count() == 0) return {};
  ad::Expr parts[] = {
      predict(g, memory, Task::kTrigger, preds.trigger().hidden, preds.trigger().probs),
      predict(g, memory, Task::kArgument, preds.argument().hidden, preds.argument().probs)};
  return ad::concat_rows(parts);
}

MemoryState MblpModel::reset() const {
  if (!config_.use_memory) return {};
  MemoryState m;
  for (Task t : kTasks) m.rows[static_cast<std::size_t>(task_index(t))] = head(t).memory_init->value;
  return m;
}

MemoryState MblpModel::smm_update(const MemoryState &memory, const EncoderOutput &encoding) const {
  if (!config_.use_memory) throw std::logic_error("mblp: model has no memory");
  ad::Graph g(false);
  GraphMemory gm;
  for (std::size_t i = 0; i < 2; ++i) gm.rows[i] = g.constant(memory.rows[i]);
  GraphMemory next = update(g, gm, encoding.token_features);
  MemoryState out;
  for (std::size_t i = 0; i < 2; ++i) out.rows[i] = next.rows[i].value();
  return out;
}

std::vector<double> MblpModel::predict_losses(const MemoryState &memory,
                                              const SamplePredictions &preds) const {
  if (preds.count() == 0) return {};
  ad::Graph g(false);
  GraphMemory gm;
  if (config_.use_memory) {
    for (std::size_t i = 0; i < 2; ++i) gm.rows[i] = g.constant(memory.rows[i]);
  }
  ad::Expr col = predict(g, config_.use_memory ? &gm : nullptr, preds);
  const Matrix &v = col.value();
  return std::vector<double>(v.data(), v.data() + v.size());
}

std::vector<double> MblpModel::predict_losses(const SamplePredictions &preds) const {
  if (config_.use_memory) throw std::logic_error("mblp: memory model needs a MemoryState");
  return predict_losses(MemoryState{}, preds);
}

}  // namespace alee
