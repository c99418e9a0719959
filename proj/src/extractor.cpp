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

#include "alee/extractor.hpp"

#include <cmath>
#include <stdexcept>

namespace alee {

const char *task_name(Task t) { return t == Task::kTrigger ? "trigger" : "argument"; }

namespace {

Matrix softmax_values(const Matrix &x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    y.row(r) = (x.row(r).array() - x.row(r).maxCoeff()).exp();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

int argmax(const Eigen::Ref<const RowVector> &row) {
  Eigen::Index best = 0;
  row.maxCoeff(&best);
  return static_cast<int>(best);
}

}  // namespace

EeLoss ee_loss(const SamplePredictions &preds, const LabelSet &labels) {
  const int k = preds.num_candidates;
  const int n = preds.length;
  if (static_cast<int>(labels.triggers.size()) != k ||
      static_cast<int>(labels.arguments.size()) != k) {
    throw CorpusError("ee_loss: labels do not cover every candidate");
  }
  EeLoss out;
  out.per_prediction.reserve(static_cast<std::size_t>(preds.count()));
  auto add = [&](const Matrix &probs, Eigen::Index row, int label) {
    if (label < 0 || label >= probs.cols()) throw CorpusError("ee_loss: label index out of range");
    double l = -std::log(std::max(probs(row, label), 1e-300));
    out.per_prediction.push_back(l);
    out.total += l;
  };
  for (int i = 0; i < k; ++i) add(preds.trigger().probs, i, labels.triggers[static_cast<std::size_t>(i)]);
  for (int i = 0; i < k; ++i) {
    const auto &row = labels.arguments[static_cast<std::size_t>(i)];
    if (static_cast<int>(row.size()) != n) throw CorpusError("ee_loss: argument row length mismatch");
    for (int j = 0; j < n; ++j) add(preds.argument().probs, i * n + j, row[static_cast<std::size_t>(j)]);
  }
  return out;
}

LabelSet decode(const SamplePredictions &preds) {
  const int k = preds.num_candidates;
  const int n = preds.length;
  LabelSet out;
  for (int i = 0; i < k; ++i) {
    const int type = argmax(preds.trigger().probs.row(i));
    out.triggers.push_back(type);
    std::vector<int> row(static_cast<std::size_t>(n), kOutside);
    if (type != kNoEvent) {
      int prev = kOutside;
      for (int j = 0; j < n; ++j) {
        int label = argmax(preds.argument().probs.row(i * n + j));
        if (TaskSchema::is_inside(label) &&
            (prev == kOutside || TaskSchema::role_of(prev) != TaskSchema::role_of(label))) {
          label = TaskSchema::begin_label(TaskSchema::role_of(label));
        }
        row[static_cast<std::size_t>(j)] = label;
        prev = label;
      }
    }
    out.arguments.push_back(std::move(row));
  }
  return out;
}

std::vector<int> trigger_targets(const LabelSet &labels) { return labels.triggers; }

std::vector<int> argument_targets(const LabelSet &labels) {
  std::vector<int> out;
  for (const auto &row : labels.arguments) out.insert(out.end(), row.begin(), row.end());
  return out;
}

EventExtractor::EventExtractor(nn::ParameterStore &store, const TaskSchema &schema, int d_h,
                               const ExtractorConfig &config, int default_heads,
                               std::mt19937_64 &rng)
    : d_h_(d_h) {
  const int hidden = config.hidden > 0 ? config.hidden : d_h;
  const int heads = config.heads > 0 ? config.heads : default_heads;
  trigger_classifier_ =
      nn::FeedForward(store, "extractor/trigger", d_h, hidden, schema.num_event_types(), rng);
  context_attention_ = nn::MultiHeadAttention(store, "extractor/context", 2 * d_h, d_h, d_h, heads, rng);
  argument_classifier_ = nn::FeedForward(store, "extractor/argument", 3 * d_h, hidden,
                                         schema.num_argument_labels(), rng);
}

ExtractorForward EventExtractor::forward(ad::Graph &g, const Sentence &sentence,
                                         const ad::Expr &encoding) const {
  ExtractorForward fwd;
  fwd.encoding = encoding;
  const int k = static_cast<int>(sentence.candidates.size());
  const int n = sentence.length();
  if (encoding.rows() != n || encoding.cols() != d_h_) {
    throw std::invalid_argument("extractor: encoding does not match sentence");
  }
  if (k == 0) return fwd;

  std::vector<ad::Expr> spans;
  for (const auto &c : sentence.candidates) {
    spans.push_back(ad::mean_rows(encoding, c.span.start, c.span.end));
  }
  fwd.trigger_hidden = ad::concat_rows(spans);
  fwd.trigger_logits = trigger_classifier_(g, fwd.trigger_hidden);

  std::vector<ad::Expr> trig_rep, tok_rep;
  for (int i = 0; i < k; ++i) {
    trig_rep.push_back(ad::repeat_row(spans[static_cast<std::size_t>(i)], n));
    tok_rep.push_back(encoding);
  }
  ad::Expr trig = k == 1 ? trig_rep[0] : ad::concat_rows(trig_rep);
  ad::Expr toks = k == 1 ? encoding : ad::concat_rows(tok_rep);
  ad::Expr query_parts[] = {trig, toks};
  fwd.context = context_attention_(g, ad::concat_cols(query_parts), encoding);
  ad::Expr hidden_parts[] = {trig, toks, fwd.context};
  fwd.argument_hidden = ad::concat_cols(hidden_parts);
  fwd.argument_logits = argument_classifier_(g, fwd.argument_hidden);
  return fwd;
}

SamplePredictions to_predictions(const Sentence &sentence, const ExtractorForward &fwd) {
  SamplePredictions p;
  p.sentence_id = sentence.id;
  p.num_candidates = static_cast<int>(sentence.candidates.size());
  p.length = sentence.length();
  auto &tr = p.tasks[0];
  auto &ar = p.tasks[1];
  if (fwd.empty()) {
    const Eigen::Index d = fwd.encoding.valid() ? fwd.encoding.cols() : 0;
    tr.hidden.resize(0, d);
    ar.hidden.resize(0, 3 * d);
    return p;
  }
  tr.hidden = fwd.trigger_hidden.value();
  tr.probs = softmax_values(fwd.trigger_logits.value());
  ar.hidden = fwd.argument_hidden.value();
  ar.probs = softmax_values(fwd.argument_logits.value());
  for (int i = 0; i < p.num_candidates; ++i) {
    tr.candidate.push_back(i);
    tr.token.push_back(-1);
    for (int j = 0; j < p.length; ++j) {
      ar.candidate.push_back(i);
      ar.token.push_back(j);
    }
  }
  return p;
}

EventModel::EventModel(const TaskSchema &schema, Vocabulary vocab, const ModelConfig &config,
                       std::uint64_t seed)
    : schema_(schema), vocab_(std::move(vocab)), config_(config), store_("ee") {
  std::mt19937_64 rng(seed);
  encoder_ = make_encoder(store_, config.encoder, vocab_, rng);
  extractor_ = std::make_unique<EventExtractor>(store_, schema_, encoder_->dim(), config.extractor,
                                                config.encoder.heads, rng);
}

ExtractorForward EventModel::forward(ad::Graph &g, const Sentence &sentence) const {
  return extractor_->forward(g, sentence, encoder_->encode(g, sentence));
}

EventModel::Analysis EventModel::analyze(const Sentence &sentence) const {
  ad::Graph g(false);
  ExtractorForward fwd = forward(g, sentence);
  return Analysis{EncoderOutput{fwd.encoding.value()}, to_predictions(sentence, fwd)};
}

SamplePredictions EventModel::predict(const Sentence &sentence) const {
  return analyze(sentence).predictions;
}

ad::Expr EventModel::loss_column(const ExtractorForward &fwd, const LabelSet &labels) const {
  if (fwd.empty()) return {};
  std::vector<int> tt = trigger_targets(labels);
  std::vector<int> at = argument_targets(labels);
  ad::Expr parts[] = {ad::cross_entropy_rows(fwd.trigger_logits, tt),
                      ad::cross_entropy_rows(fwd.argument_logits, at)};
  return ad::concat_rows(parts);
}

}  // namespace alee
