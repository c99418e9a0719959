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

#include "alee/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace alee {

using json = nlohmann::json;

const char *pos_name(PosTag tag) {
  switch (tag) {
    case PosTag::kNoun: return "noun";
    case PosTag::kVerb: return "verb";
    case PosTag::kAdjective: return "adj";
  }
  return "verb";
}

PosTag parse_pos(const std::string &name) {
  if (name == "noun") return PosTag::kNoun;
  if (name == "verb") return PosTag::kVerb;
  if (name == "adj" || name == "adjective") return PosTag::kAdjective;
  throw CorpusError("unknown pos tag '" + name + "'");
}

// ---- schema ---------------------------------------------------------------

TaskSchema::TaskSchema(std::vector<std::string> event_types, std::vector<std::string> roles)
    : event_types_(std::move(event_types)), roles_(std::move(roles)) {
  if (event_types_.empty() || event_types_[0] != "NA") {
    throw CorpusError("schema: event_types[0] must be \"NA\"");
  }
  std::set<std::string> seen(event_types_.begin(), event_types_.end());
  if (seen.size() != event_types_.size()) throw CorpusError("schema: duplicate event type");
  std::set<std::string> seen_roles(roles_.begin(), roles_.end());
  if (seen_roles.size() != roles_.size()) throw CorpusError("schema: duplicate role");
}

TaskSchema TaskSchema::make_default(int event_types_incl_na, int roles) {
  static const char *kTypes[] = {"Attack", "Die",     "Transport", "Meet",  "Elect",
                                 "Sue",    "Transfer", "Arrest",   "Marry", "Injure"};
  static const char *kRoles[] = {"Agent",  "Victim", "Place",  "Time",
                                 "Instrument", "Target", "Origin", "Destination"};
  std::vector<std::string> types{"NA"};
  for (int i = 1; i < event_types_incl_na; ++i) {
    types.push_back(i - 1 < 10 ? kTypes[i - 1] : "Event" + std::to_string(i));
  }
  std::vector<std::string> rs;
  for (int i = 0; i < roles; ++i) rs.push_back(i < 8 ? kRoles[i] : "Role" + std::to_string(i));
  return TaskSchema(std::move(types), std::move(rs));
}

std::string TaskSchema::argument_label_name(int label) const {
  if (label == kOutside) return "O";
  if (label < 0 || label >= num_argument_labels()) throw CorpusError("argument label out of range");
  return std::string(is_begin(label) ? "B-" : "I-") + roles_[role_of(label)];
}

int TaskSchema::event_type_index(const std::string &name) const {
  auto it = std::find(event_types_.begin(), event_types_.end(), name);
  if (it == event_types_.end()) throw CorpusError("unknown event type '" + name + "'");
  return static_cast<int>(it - event_types_.begin());
}

int TaskSchema::role_index(const std::string &name) const {
  auto it = std::find(roles_.begin(), roles_.end(), name);
  if (it == roles_.end()) throw CorpusError("unknown role '" + name + "'");
  return static_cast<int>(it - roles_.begin());
}

TaskSchema load_schema(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open schema file " + path);
  json j;
  try {
    in >> j;
    return TaskSchema(j.at("event_types").get<std::vector<std::string>>(),
                      j.at("roles").get<std::vector<std::string>>());
  } catch (const json::exception &e) {
    throw CorpusError("malformed schema file " + path + ": " + e.what());
  }
}

void save_schema(const TaskSchema &schema, const std::string &path) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write schema file " + path);
  out << json{{"event_types", schema.event_types()}, {"roles", schema.roles()}}.dump() << "\n";
}

// ---- validation -------------------------------------------------------------

bool is_well_formed_bio(std::span<const int> row) {
  int prev = kOutside;
  for (int label : row) {
    if (TaskSchema::is_inside(label)) {
      if (prev == kOutside || TaskSchema::role_of(prev) != TaskSchema::role_of(label)) {
        return false;
      }
    }
    prev = label;
  }
  return true;
}

void validate_sentence(const Sentence &s) {
  const int n = s.length();
  if (n < 1) throw CorpusError("sentence " + s.id + ": empty");
  if (n > kMaxSentenceLength) {
    throw CorpusError("sentence " + s.id + ": length " + std::to_string(n) + " exceeds " +
                      std::to_string(kMaxSentenceLength));
  }
  std::vector<Span> spans;
  for (const auto &c : s.candidates) {
    if (c.span.start < 0 || c.span.start >= c.span.end || c.span.end > n) {
      throw CorpusError("sentence " + s.id + ": candidate span [" +
                        std::to_string(c.span.start) + "," + std::to_string(c.span.end) +
                        ") out of range");
    }
    spans.push_back(c.span);
  }
  std::sort(spans.begin(), spans.end());
  for (std::size_t i = 1; i < spans.size(); ++i) {
    if (spans[i].start < spans[i - 1].end) {
      throw CorpusError("sentence " + s.id + ": overlapping candidate spans");
    }
  }
}

void validate_labels(const TaskSchema &schema, const Sentence &s, const LabelSet &labels) {
  const std::size_t k = s.candidates.size();
  if (labels.triggers.size() != k || labels.arguments.size() != k) {
    throw CorpusError("sentence " + s.id + ": labels do not cover every candidate");
  }
  for (std::size_t i = 0; i < k; ++i) {
    const int t = labels.triggers[i];
    if (t < 0 || t >= schema.num_event_types()) {
      throw CorpusError("sentence " + s.id + ": unknown event type index " + std::to_string(t));
    }
    const auto &row = labels.arguments[i];
    if (static_cast<int>(row.size()) != s.length()) {
      throw CorpusError("sentence " + s.id + ": argument row length mismatch");
    }
    for (int a : row) {
      if (a < 0 || a >= schema.num_argument_labels()) {
        throw CorpusError("sentence " + s.id + ": unknown role label index " + std::to_string(a));
      }
      if (t == kNoEvent && a != kOutside) {
        throw CorpusError("sentence " + s.id + ": NA trigger with non-O argument labels");
      }
    }
    if (!is_well_formed_bio(row)) {
      throw CorpusError("sentence " + s.id + ": ill-formed BIO sequence for candidate " +
                        std::to_string(i));
    }
  }
}

// ---- JSONL ------------------------------------------------------------------

namespace {

Example parse_record(const json &j, const TaskSchema &schema) {
  Example ex;
  ex.sentence.id = j.at("id").get<std::string>();
  ex.sentence.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto &c : j.at("candidates")) {
    TriggerCandidate tc;
    tc.span.start = c.at("start").get<int>();
    tc.span.end = c.at("end").get<int>();
    tc.pos = parse_pos(c.at("pos").get<std::string>());
    ex.sentence.candidates.push_back(tc);
  }
  validate_sentence(ex.sentence);
  if (j.contains("labels") && !j.at("labels").is_null()) {
    LabelSet ls;
    ls.triggers = j.at("labels").at("triggers").get<std::vector<int>>();
    ls.arguments = j.at("labels").at("arguments").get<std::vector<std::vector<int>>>();
    validate_labels(schema, ex.sentence, ls);
    ex.labels = std::move(ls);
  }
  return ex;
}

json record_json(const Example &ex) {
  json cands = json::array();
  for (const auto &c : ex.sentence.candidates) {
    cands.push_back({{"start", c.span.start}, {"end", c.span.end}, {"pos", pos_name(c.pos)}});
  }
  json j{{"id", ex.sentence.id}, {"tokens", ex.sentence.tokens}, {"candidates", cands}};
  if (ex.labels) {
    j["labels"] = {{"triggers", ex.labels->triggers}, {"arguments", ex.labels->arguments}};
  }
  return j;
}

}  // namespace

Corpus read_corpus(std::istream &in, const TaskSchema &schema) {
  Corpus corpus;
  std::unordered_set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Example ex = parse_record(json::parse(line), schema);
      if (!ids.insert(ex.sentence.id).second) {
        throw CorpusError("duplicate sentence id " + ex.sentence.id);
      }
      corpus.push_back(std::move(ex));
    } catch (const json::exception &e) {
      throw CorpusError("line " + std::to_string(lineno) + ": malformed record: " + e.what());
    } catch (const CorpusError &e) {
      throw CorpusError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return corpus;
}

Corpus load_corpus(const std::string &path, const TaskSchema &schema) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open corpus file " + path);
  return read_corpus(in, schema);
}

void write_corpus(std::ostream &out, const Corpus &corpus) {
  for (const auto &ex : corpus) out << record_json(ex).dump() << "\n";
}

void save_corpus(const std::string &path, const Corpus &corpus) {
  std::ofstream out(path);
  if (!out) throw CorpusError("cannot write corpus file " + path);
  write_corpus(out, corpus);
}

// ---- synthetic generator -------------------------------------------------------

namespace {

class WordFactory {
 public:
  explicit WordFactory(std::mt19937_64 &rng) : rng_(rng) {
    for (const char *w : {"the", "a", "and", "while", "that", "in", "at", "on", "with", "from",
                          "to", "by", "near", "for", "against", "after"}) {
      used_.insert(w);
    }
  }

  std::string make(int min_syllables, int max_syllables) {
    static const std::string kOnsets = "bdfgklmnprstvz";
    static const std::string kVowels = "aeiou";
    std::uniform_int_distribution<int> syl(min_syllables, max_syllables);
    std::uniform_int_distribution<std::size_t> on(0, kOnsets.size() - 1);
    std::uniform_int_distribution<std::size_t> vo(0, kVowels.size() - 1);
    for (;;) {
      std::string w;
      int n = syl(rng_);
      for (int i = 0; i < n; ++i) {
        w += kOnsets[on(rng_)];
        w += kVowels[vo(rng_)];
      }
      if (used_.insert(w).second) return w;
    }
  }

 private:
  std::mt19937_64 &rng_;
  std::unordered_set<std::string> used_;
};

std::discrete_distribution<int> zipf(int n, double s) {
  std::vector<double> w;
  for (int i = 1; i <= n; ++i) w.push_back(1.0 / std::pow(static_cast<double>(i), s));
  return std::discrete_distribution<int>(w.begin(), w.end());
}

struct EventLexicon {
  std::vector<std::vector<std::string>> triggers;  // each entry 1-2 tokens
  std::vector<PosTag> trigger_pos;
  std::vector<int> roles;  // first entry is the subject role
};

struct Lexicon {
  std::vector<EventLexicon> events;  // index 0 unused (NA)
  std::vector<std::vector<std::string>> fillers;  // per role
  std::vector<std::string> preps;                 // per role; empty = subject
  std::vector<std::string> adjectives;
  std::vector<std::string> distractor_verbs;
  std::vector<std::string> distractor_nouns;
  std::vector<std::string> adverbs;
  std::vector<std::string> particles;
};

Lexicon build_lexicon(const TaskSchema &schema, const SynthOptions &opt, std::mt19937_64 &rng) {
  static const char *kPreps[] = {"against", "in", "on", "with", "to", "from", "near", "by", "for",
                                 "after"};
  WordFactory words(rng);
  Lexicon lex;
  const int m = schema.num_event_types();
  const int n_roles = schema.num_roles();
  for (int r = 0; r < n_roles; ++r) {
    lex.preps.push_back(r == 0 ? "" : kPreps[(r - 1) % 10]);
    std::vector<std::string> f;
    for (int i = 0; i < opt.fillers_per_role; ++i) f.push_back(words.make(2, 3));
    lex.fillers.push_back(std::move(f));
  }
  for (int i = 0; i < 20; ++i) lex.adjectives.push_back(words.make(2, 2));
  for (int i = 0; i < 8; ++i) lex.distractor_verbs.push_back(words.make(2, 3));
  for (int i = 0; i < 12; ++i) lex.distractor_nouns.push_back(words.make(2, 3));
  for (int i = 0; i < 6; ++i) lex.adverbs.push_back(words.make(3, 4));
  for (int i = 0; i < 3; ++i) lex.particles.push_back(words.make(1, 1));

  lex.events.resize(static_cast<std::size_t>(m));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int e = 1; e < m; ++e) {
    EventLexicon &ev = lex.events[static_cast<std::size_t>(e)];
    for (int i = 0; i < opt.trigger_words_per_type; ++i) {
      std::vector<std::string> phrase{words.make(2, 3)};
      if (unit(rng) < 0.15) phrase.push_back(lex.particles[rng() % lex.particles.size()]);
      ev.triggers.push_back(std::move(phrase));
      ev.trigger_pos.push_back(unit(rng) < 0.7 ? PosTag::kVerb : PosTag::kNoun);
    }
    if (n_roles > 0) ev.roles.push_back((e - 1) % n_roles);
  }
  // Every role belongs to at least one event type, plus random extras.
  for (int r = 0; r < n_roles; ++r) {
    auto &roles = lex.events[static_cast<std::size_t>(r % (m - 1) + 1)].roles;
    if (std::find(roles.begin(), roles.end(), r) == roles.end()) roles.push_back(r);
  }
  for (int e = 1; e < m; ++e) {
    auto &roles = lex.events[static_cast<std::size_t>(e)].roles;
    int extra = 1 + static_cast<int>(rng() % 2);
    for (int t = 0; t < 8 && extra > 0 && static_cast<int>(roles.size()) < n_roles; ++t) {
      int r = static_cast<int>(rng() % static_cast<std::uint64_t>(n_roles));
      if (std::find(roles.begin(), roles.end(), r) == roles.end()) {
        roles.push_back(r);
        --extra;
      }
    }
  }
  return lex;
}

struct Builder {
  Sentence sentence;
  LabelSet labels;
  // Argument spans per event candidate, resolved once tokens are final.
  struct Arg {
    Span span;
    int role;
  };
  std::vector<std::vector<Arg>> args;

  int add_candidate(Span span, PosTag pos, int type) {
    sentence.candidates.push_back({span, pos});
    labels.triggers.push_back(type);
    args.emplace_back();
    return static_cast<int>(sentence.candidates.size()) - 1;
  }
  void push(const std::string &tok) { sentence.tokens.push_back(tok); }
  int size() const { return sentence.length(); }
};

// Appends "the [adj] head" and returns the span of [adj] head.
Span emit_filler(Builder &b, const Lexicon &lex, int role, std::discrete_distribution<int> &pick,
                 std::mt19937_64 &rng, std::vector<int> *adjective_positions) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  b.push(unit(rng) < 0.5 ? "the" : "a");
  int start = b.size();
  if (unit(rng) < 0.4) {
    if (adjective_positions != nullptr) adjective_positions->push_back(b.size());
    b.push(lex.adjectives[rng() % lex.adjectives.size()]);
  }
  b.push(lex.fillers[static_cast<std::size_t>(role)][static_cast<std::size_t>(pick(rng))]);
  return {start, b.size()};
}

void emit_event(Builder &b, const Lexicon &lex, const SynthOptions &opt, int type, int word,
                bool keep_all_roles, std::mt19937_64 &rng, std::vector<int> *adjective_positions) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const EventLexicon &ev = lex.events[static_cast<std::size_t>(type)];
  auto filler_pick = zipf(static_cast<int>(lex.fillers.empty() ? 1 : lex.fillers[0].size()), 1.0);
  std::vector<Builder::Arg> args;
  std::vector<int> rest;
  for (std::size_t i = 1; i < ev.roles.size(); ++i) {
    if (keep_all_roles || unit(rng) >= opt.optional_role_drop) rest.push_back(ev.roles[i]);
  }
  std::shuffle(rest.begin(), rest.end(), rng);
  const int subject = ev.roles.empty() ? -1 : ev.roles[0];
  if (subject >= 0) {
    args.push_back({emit_filler(b, lex, subject, filler_pick, rng, adjective_positions), subject});
  }
  const auto &phrase = ev.triggers[static_cast<std::size_t>(word)];
  int tstart = b.size();
  for (const auto &t : phrase) b.push(t);
  int cand = b.add_candidate({tstart, b.size()}, ev.trigger_pos[static_cast<std::size_t>(word)],
                             type);
  for (int r : rest) {
    const std::string &prep = lex.preps[static_cast<std::size_t>(r)];
    if (!prep.empty()) b.push(prep);
    args.push_back({emit_filler(b, lex, r, filler_pick, rng, adjective_positions), r});
  }
  b.args[static_cast<std::size_t>(cand)] = std::move(args);
}

}  // namespace

Corpus synth_corpus(const TaskSchema &schema, int n_sentences, std::uint64_t seed, double noise,
                    const SynthOptions &opt) {
  if (n_sentences < 1) throw CorpusError("synth_corpus: n_sentences must be >= 1");
  if (schema.num_roles() == 0) throw CorpusError("synth_corpus: schema needs at least one role");
  if (schema.num_event_types() < 2) {
    throw CorpusError("synth_corpus: schema needs at least one non-NA event type");
  }
  if (noise < 0.0 || noise > 1.0) throw CorpusError("synth_corpus: noise must lie in [0,1]");

  std::mt19937_64 rng(seed);
  const Lexicon lex = build_lexicon(schema, opt, rng);
  const int m = schema.num_event_types();
  auto type_pick = zipf(m - 1, opt.event_type_skew);
  auto word_pick = zipf(opt.trigger_words_per_type, opt.trigger_word_skew);
  auto noun_pick = zipf(static_cast<int>(lex.distractor_nouns.size()), 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Corpus corpus;
  corpus.reserve(static_cast<std::size_t>(n_sentences));
  for (int s = 0; s < n_sentences; ++s) {
    Builder b;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "s%06d", s);
    b.sentence.id = idbuf;
    const bool noisy = unit(rng) < noise;
    std::vector<int> adjective_positions;

    if (unit(rng) < 0.3) b.push(lex.adverbs[rng() % lex.adverbs.size()]);
    // The first M-1 sentences cover every event type with all of its roles.
    const bool forced = s < m - 1;
    if (!forced && unit(rng) < opt.no_event_rate) {
      // "the <noun> <verb> that the <noun> <verb> [the <noun>]": NA candidates only.
      for (int clause = 0; clause < 2; ++clause) {
        if (clause == 1) b.push("that");
        b.push("the");
        b.push(lex.distractor_nouns[static_cast<std::size_t>(noun_pick(rng))]);
        int v = b.size();
        b.push(lex.distractor_verbs[rng() % lex.distractor_verbs.size()]);
        b.add_candidate({v, v + 1}, PosTag::kVerb, kNoEvent);
      }
      if (unit(rng) < 0.5) {
        b.push("the");
        b.push(lex.distractor_nouns[static_cast<std::size_t>(noun_pick(rng))]);
      }
    } else {
      if (noisy && unit(rng) < 0.6) {
        // "<the noun> <verb> that ..." with the reporting verb as an NA candidate.
        b.push("the");
        b.push(lex.distractor_nouns[static_cast<std::size_t>(noun_pick(rng))]);
        int v = b.size();
        b.push(lex.distractor_verbs[rng() % lex.distractor_verbs.size()]);
        b.add_candidate({v, v + 1}, PosTag::kVerb, kNoEvent);
        b.push("that");
      }
      const int type = forced ? s + 1 : 1 + type_pick(rng);
      emit_event(b, lex, opt, type, word_pick(rng), forced, rng, &adjective_positions);
      if (!forced && unit(rng) < opt.two_event_rate) {
        b.push(unit(rng) < 0.5 ? "and" : "while");
        emit_event(b, lex, opt, 1 + type_pick(rng), word_pick(rng), false, rng,
                   &adjective_positions);
      }
      if (noisy && !adjective_positions.empty() && unit(rng) < 0.7) {
        int p = adjective_positions[rng() % adjective_positions.size()];
        b.add_candidate({p, p + 1}, PosTag::kAdjective, kNoEvent);
      }
    }
    if (unit(rng) < 0.2) b.push(lex.adverbs[rng() % lex.adverbs.size()]);

    // Order candidates by position and materialize BIO rows.
    const int n = b.size();
    std::vector<std::size_t> order(b.sentence.candidates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      return b.sentence.candidates[x].span < b.sentence.candidates[y].span;
    });
    Example ex;
    ex.sentence.id = b.sentence.id;
    ex.sentence.tokens = b.sentence.tokens;
    LabelSet ls;
    for (std::size_t i : order) {
      ex.sentence.candidates.push_back(b.sentence.candidates[i]);
      ls.triggers.push_back(b.labels.triggers[i]);
      std::vector<int> row(static_cast<std::size_t>(n), kOutside);
      for (const auto &a : b.args[i]) {
        row[static_cast<std::size_t>(a.span.start)] = TaskSchema::begin_label(a.role);
        for (int t = a.span.start + 1; t < a.span.end; ++t) {
          row[static_cast<std::size_t>(t)] = TaskSchema::inside_label(a.role);
        }
      }
      ls.arguments.push_back(std::move(row));
    }
    ex.labels = std::move(ls);
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

// ---- pool -------------------------------------------------------------------

void PoolState::check_invariants() const {
  std::unordered_set<std::string> ids;
  for (const auto &ex : labeled) {
    if (!ids.insert(ex.sentence.id).second) throw CorpusError("pool: duplicate id " + ex.sentence.id);
  }
  for (const auto &s : unlabeled) {
    if (!ids.insert(s.id).second) throw CorpusError("pool: id in both sets or duplicated: " + s.id);
  }
  if (static_cast<int>(history.size()) != round) throw CorpusError("pool: |history| != round");
}

PoolSplit split_pool(const Corpus &corpus, double unlabeled_fraction, std::uint64_t seed) {
  if (!(unlabeled_fraction > 0.0 && unlabeled_fraction < 1.0)) {
    throw CorpusError("split_pool: fraction must lie in (0,1)");
  }
  if (corpus.size() < 2) throw CorpusError("split_pool: corpus needs at least 2 sentences");
  std::vector<std::size_t> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  auto n_pool = static_cast<std::size_t>(
      std::llround(unlabeled_fraction * static_cast<double>(corpus.size())));
  n_pool = std::clamp<std::size_t>(n_pool, 1, corpus.size() - 1);
  PoolSplit out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Example &ex = corpus[order[i]];
    if (i < n_pool) {
      out.pool.unlabeled.push_back(ex.sentence);
    } else {
      out.test.push_back(ex);
    }
  }
  return out;
}

Oracle::Oracle(const Corpus &corpus) {
  for (const auto &ex : corpus) {
    known_[ex.sentence.id] = true;
    if (ex.labels) gold_[ex.sentence.id] = *ex.labels;
  }
}

LabelSet Oracle::label(const std::string &id) const {
  auto it = gold_.find(id);
  if (it != gold_.end()) return it->second;
  if (known_.count(id) != 0) {
    throw CorpusError("sentence " + id +
                      " has no gold labels; label it through the annotation service");
  }
  throw CorpusError("unknown sentence id " + id);
}

std::vector<LabelSet> Oracle::label(std::span<const std::string> ids) const {
  std::vector<LabelSet> out;
  out.reserve(ids.size());
  for (const auto &id : ids) out.push_back(label(id));
  return out;
}

PoolState commit_round(const PoolState &pool, const TaskSchema &schema,
                       std::span<const std::string> ids, std::span<const LabelSet> labels,
                       std::mt19937_64 &rng) {
  if (ids.empty()) throw CorpusError("commit_round: empty id list");
  if (ids.size() != labels.size()) throw CorpusError("commit_round: ids/labels size mismatch");
  std::unordered_map<std::string, std::size_t> wanted;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!wanted.emplace(ids[i], i).second) {
      throw CorpusError("commit_round: duplicate id " + ids[i]);
    }
  }
  std::unordered_set<std::string> labeled_ids;
  for (const auto &ex : pool.labeled) labeled_ids.insert(ex.sentence.id);

  PoolState next;
  next.labeled = pool.labeled;
  next.round = pool.round + 1;
  next.history = pool.history;
  std::vector<const Sentence *> moved(ids.size(), nullptr);
  for (const auto &s : pool.unlabeled) {
    auto it = wanted.find(s.id);
    if (it == wanted.end()) {
      next.unlabeled.push_back(s);
    } else {
      moved[it->second] = &s;
    }
  }
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (moved[i] == nullptr) {
      if (labeled_ids.count(ids[i]) != 0) {
        throw CorpusError("commit_round: sentence " + ids[i] + " is already labeled");
      }
      throw CorpusError("commit_round: sentence " + ids[i] + " is not in the unlabeled pool");
    }
    validate_labels(schema, *moved[i], labels[i]);
  }
  for (std::size_t i = 0; i < ids.size(); ++i) next.labeled.push_back({*moved[i], labels[i]});
  next.history.emplace_back(ids.begin(), ids.end());
  std::shuffle(next.labeled.begin(), next.labeled.end(), rng);
  std::shuffle(next.unlabeled.begin(), next.unlabeled.end(), rng);
  return next;
}

}  // namespace alee
