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

// Joint trigger classification and per-trigger argument sequence labeling.
//
// For a sentence with k candidates and n tokens the model makes k trigger
// predictions followed by k * n argument predictions (candidate-major), so
// every sample carries k + k * n predictions.

#ifndef ALEE_EXTRACTOR_HPP_
#define ALEE_EXTRACTOR_HPP_

#include "alee/autodiff.hpp"
#include "alee/corpus.hpp"
#include "alee/encoder.hpp"
#include "alee/nn.hpp"

#include <array>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace alee {

enum class Task { kTrigger = 0, kArgument = 1 };
inline constexpr std::array<Task, 2> kTasks = {Task::kTrigger, Task::kArgument};

inline int task_index(Task t) { return static_cast<int>(t); }
const char *task_name(Task t);

// Predictions of one task for one sentence, one row per prediction.
struct TaskPredictions {
  Matrix hidden;  // classifier input feature
  Matrix probs;   // output distribution
  std::vector<int> candidate;
  std::vector<int> token;  // -1 for trigger predictions

  int size() const { return static_cast<int>(probs.rows()); }
};

struct SamplePredictions {
  std::string sentence_id;
  int num_candidates = 0;
  int length = 0;
  std::array<TaskPredictions, 2> tasks;

  const TaskPredictions &trigger() const { return tasks[0]; }
  const TaskPredictions &argument() const { return tasks[1]; }
  // k + k * n
  int count() const { return tasks[0].size() + tasks[1].size(); }
  // Task of the i-th prediction in trigger-then-argument order.
  Task task_of(int i) const { return i < tasks[0].size() ? Task::kTrigger : Task::kArgument; }
};

struct EeLoss {
  double total = 0.0;
  std::vector<double> per_prediction;  // natural-log cross-entropy
};

// Cross-entropy of `preds` against gold labels, computed from the stored
// probabilities. Throws CorpusError on out-of-range labels.
EeLoss ee_loss(const SamplePredictions &preds, const LabelSet &labels);

// Argmax decoding; stray I-r is repaired to B-r and NA triggers get all-O rows.
LabelSet decode(const SamplePredictions &preds);

// Gold labels flattened to per-prediction targets in prediction order.
std::vector<int> trigger_targets(const LabelSet &labels);
std::vector<int> argument_targets(const LabelSet &labels);

struct ExtractorConfig {
  int hidden = 0;  // 0 = same as the encoder dimension
  int heads = 0;   // 0 = same as the encoder
};

// Graph-level output of the extractor for one sentence.
struct ExtractorForward {
  ad::Expr encoding;          // n x d_h
  ad::Expr trigger_hidden;    // k x d_h
  ad::Expr trigger_logits;    // k x M
  ad::Expr context;           // k*n x d_h
  ad::Expr argument_hidden;   // k*n x 3 d_h
  ad::Expr argument_logits;   // k*n x (2N+1)
  bool empty() const { return !trigger_logits.valid(); }
};

class EventExtractor {
 public:
  EventExtractor(nn::ParameterStore &store, const TaskSchema &schema, int d_h,
                 const ExtractorConfig &config, int default_heads, std::mt19937_64 &rng);

  ExtractorForward forward(ad::Graph &g, const Sentence &sentence, const ad::Expr &encoding) const;

 private:
  int d_h_;
  nn::FeedForward trigger_classifier_;
  nn::MultiHeadAttention context_attention_;
  nn::FeedForward argument_classifier_;
};

struct ModelConfig {
  EncoderConfig encoder;
  ExtractorConfig extractor;
};

// Encoder plus extractor. All of their parameters live in one store (the
// parameters updated by the extraction loss).
class EventModel {
 public:
  EventModel(const TaskSchema &schema, Vocabulary vocab, const ModelConfig &config,
             std::uint64_t seed);
  EventModel(const EventModel &) = delete;
  EventModel &operator=(const EventModel &) = delete;

  const TaskSchema &schema() const { return schema_; }
  const Vocabulary &vocabulary() const { return vocab_; }
  const ModelConfig &config() const { return config_; }
  const EncoderProvider &encoder() const { return *encoder_; }
  nn::ParameterStore &parameters() { return store_; }
  const nn::ParameterStore &parameters() const { return store_; }

  ExtractorForward forward(ad::Graph &g, const Sentence &sentence) const;

  // Frozen-parameter inference.
  struct Analysis {
    EncoderOutput encoding;
    SamplePredictions predictions;
  };
  Analysis analyze(const Sentence &sentence) const;
  SamplePredictions predict(const Sentence &sentence) const;

  // Per-prediction cross-entropy on the graph, trigger rows then argument
  // rows; `losses` is (k + k*n) x 1. Empty when the sentence has no candidates.
  ad::Expr loss_column(const ExtractorForward &fwd, const LabelSet &labels) const;

 private:
  TaskSchema schema_;
  Vocabulary vocab_;
  ModelConfig config_;
  nn::ParameterStore store_;
  std::unique_ptr<EncoderProvider> encoder_;
  std::unique_ptr<EventExtractor> extractor_;
};

// Converts a graph forward pass into value predictions.
SamplePredictions to_predictions(const Sentence &sentence, const ExtractorForward &fwd);

}  // namespace alee

#endif  // ALEE_EXTRACTOR_HPP_
