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

// Sentences, gold labels, the labeled/unlabeled pool and corpus I/O.
//
// Argument labels use the BIO scheme with the index layout
//   0 = O, 1 + 2r = B-role_r, 2 + 2r = I-role_r
// so a schema with N roles has 2N + 1 argument labels. Event type 0 is
// always NA (no event).

#ifndef ALEE_CORPUS_HPP_
#define ALEE_CORPUS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace alee {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kNoEvent = 0;
inline constexpr int kOutside = 0;
inline constexpr int kMaxSentenceLength = 128;

enum class PosTag { kNoun, kVerb, kAdjective };

const char *pos_name(PosTag tag);
PosTag parse_pos(const std::string &name);

// Half-open token range [start, end).
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start; }
  bool operator==(const Span &) const = default;
  auto operator<=>(const Span &) const = default;
};

struct TriggerCandidate {
  Span span;
  PosTag pos = PosTag::kVerb;

  bool operator==(const TriggerCandidate &) const = default;
};

struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<TriggerCandidate> candidates;

  int length() const { return static_cast<int>(tokens.size()); }
  bool operator==(const Sentence &) const = default;
};

// Gold or predicted labels for one sentence: one event type per candidate and
// one BIO row (length n) per candidate.
struct LabelSet {
  std::vector<int> triggers;
  std::vector<std::vector<int>> arguments;

  bool operator==(const LabelSet &) const = default;
};

class TaskSchema {
 public:
  TaskSchema() = default;
  // `event_types[0]` must be "NA".
  TaskSchema(std::vector<std::string> event_types, std::vector<std::string> roles);

  // NA plus the given number of generated type names / roles.
  static TaskSchema make_default(int event_types_incl_na = 8, int roles = 6);

  const std::vector<std::string> &event_types() const { return event_types_; }
  const std::vector<std::string> &roles() const { return roles_; }
  int num_event_types() const { return static_cast<int>(event_types_.size()); }
  int num_roles() const { return static_cast<int>(roles_.size()); }
  int num_argument_labels() const { return 2 * num_roles() + 1; }

  static int begin_label(int role) { return 1 + 2 * role; }
  static int inside_label(int role) { return 2 + 2 * role; }
  static bool is_begin(int label) { return label > 0 && label % 2 == 1; }
  static bool is_inside(int label) { return label > 0 && label % 2 == 0; }
  static int role_of(int label) { return (label - 1) / 2; }

  std::string argument_label_name(int label) const;
  int event_type_index(const std::string &name) const;
  int role_index(const std::string &name) const;

  bool operator==(const TaskSchema &) const = default;

 private:
  std::vector<std::string> event_types_;
  std::vector<std::string> roles_;
};

TaskSchema load_schema(const std::string &path);
void save_schema(const TaskSchema &schema, const std::string &path);

// True when every I-r follows a B-r or I-r of the same role.
bool is_well_formed_bio(std::span<const int> row);

// Throws CorpusError describing the first violated invariant.
void validate_sentence(const Sentence &s);
void validate_labels(const TaskSchema &schema, const Sentence &s, const LabelSet &labels);

struct Example {
  Sentence sentence;
  std::optional<LabelSet> labels;
};

using Corpus = std::vector<Example>;

// JSONL corpus I/O. Errors carry the offending line number.
Corpus read_corpus(std::istream &in, const TaskSchema &schema);
Corpus load_corpus(const std::string &path, const TaskSchema &schema);
void write_corpus(std::ostream &out, const Corpus &corpus);
void save_corpus(const std::string &path, const Corpus &corpus);

// Knobs of the templated generator. Defaults produce the desk-scale corpus.
struct SynthOptions {
  int trigger_words_per_type = 25;
  int fillers_per_role = 14;
  double event_type_skew = 1.0;   // Zipf exponent over event types
  double trigger_word_skew = 0.7; // Zipf exponent over a type's trigger words
  double two_event_rate = 0.3;
  double optional_role_drop = 0.3;
  // Fraction of sentences whose candidates are all NA.
  double no_event_rate = 0.6;
};

// Deterministic templated corpus with gold labels. A `noise` fraction of the
// sentences carry distractor candidates labeled NA.
Corpus synth_corpus(const TaskSchema &schema, int n_sentences, std::uint64_t seed, double noise,
                    const SynthOptions &options = {});

struct LabeledExample {
  Sentence sentence;
  LabelSet labels;
};

struct PoolState {
  std::vector<LabeledExample> labeled;
  std::vector<Sentence> unlabeled;
  int round = 0;
  std::vector<std::vector<std::string>> history;

  std::size_t total() const { return labeled.size() + unlabeled.size(); }
  // Throws CorpusError when disjointness, id uniqueness or |history| == round
  // does not hold.
  void check_invariants() const;
};

struct PoolSplit {
  PoolState pool;
  Corpus test;
};

// Unlabeled pool of round(fraction * |corpus|) sentences; the remainder is the
// held-out test set. The labeled set starts empty.
PoolSplit split_pool(const Corpus &corpus, double unlabeled_fraction, std::uint64_t seed);

// Gold label provider standing in for the human annotator.
class Oracle {
 public:
  explicit Oracle(const Corpus &corpus);
  LabelSet label(const std::string &id) const;
  std::vector<LabelSet> label(std::span<const std::string> ids) const;

 private:
  std::unordered_map<std::string, LabelSet> gold_;
  std::unordered_map<std::string, bool> known_;
};

// Moves `ids` from the unlabeled pool to the labeled set, advances the round,
// records the history entry, then shuffles both sets with `rng`.
PoolState commit_round(const PoolState &pool, const TaskSchema &schema,
                       std::span<const std::string> ids, std::span<const LabelSet> labels,
                       std::mt19937_64 &rng);

}  // namespace alee

#endif  // ALEE_CORPUS_HPP_
