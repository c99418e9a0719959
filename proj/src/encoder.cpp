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

#include "alee/encoder.hpp"

#include <stdexcept>

namespace alee {

Vocabulary::Vocabulary() { add("<unk>"); }

Vocabulary Vocabulary::build(const Corpus &corpus) {
  Vocabulary v;
  for (const auto &ex : corpus) {
    for (const auto &t : ex.sentence.tokens) v.add(t);
  }
  return v;
}

int Vocabulary::id(const std::string &token) const {
  auto it = index_.find(token);
  return it == index_.end() ? 0 : it->second;
}

int Vocabulary::add(const std::string &token) {
  auto [it, inserted] = index_.emplace(token, size());
  if (inserted) tokens_.push_back(token);
  return it->second;
}

std::vector<int> Vocabulary::ids(const Sentence &s) const {
  std::vector<int> out;
  out.reserve(s.tokens.size());
  for (const auto &t : s.tokens) out.push_back(id(t));
  return out;
}

RowVector EncoderOutput::span_feature(Span span) const {
  if (span.start < 0 || span.start >= span.end || span.end > length()) {
    throw std::out_of_range("span_feature: span out of range");
  }
  return token_features.middleRows(span.start, span.length()).colwise().mean();
}

EncoderOutput EncoderProvider::encode(const Sentence &sentence) const {
  ad::Graph g(false);
  return EncoderOutput{encode(g, sentence).value()};
}

TransformerEncoder::TransformerEncoder(nn::ParameterStore &store, const EncoderConfig &config,
                                       const Vocabulary &vocab, std::mt19937_64 &rng)
    : config_(config), vocab_(vocab) {
  if (config.d_h < 4 || config.layers < 0 || config.heads < 1 || config.d_h % config.heads != 0) {
    throw std::invalid_argument("encoder: d_h must be >= 4 and divisible by heads");
  }
  const int pos_dim = config.d_h / 4;
  const int tok_dim = config.d_h - pos_dim;
  tokens_ = &store.add("encoder/tokens", nn::normal(vocab.size(), tok_dim, 0.5, rng));
  positions_ = &store.add("encoder/positions", nn::normal(config.max_len, pos_dim, 0.5, rng));
  for (int l = 0; l < config.layers; ++l) {
    const std::string p = "encoder/layer" + std::to_string(l);
    blocks_.push_back(Block{
        nn::MultiHeadAttention(store, p + "/attn", config.d_h, config.d_h, config.d_h,
                               config.heads, rng),
        nn::LayerNorm(store, p + "/norm1", config.d_h),
        nn::FeedForward(store, p + "/ffn", config.d_h, 2 * config.d_h, config.d_h, rng),
        nn::LayerNorm(store, p + "/norm2", config.d_h)});
  }
}

ad::Expr TransformerEncoder::encode(ad::Graph &g, const Sentence &sentence) const {
  const int n = sentence.length();
  if (n < 1) throw std::invalid_argument("encode: empty sentence");
  if (n > config_.max_len) throw std::invalid_argument("encode: sentence longer than max_len");
  std::vector<int> ids = vocab_.ids(sentence);
  std::vector<int> pos(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pos[static_cast<std::size_t>(i)] = i;
  ad::Expr parts[] = {g.lookup(*tokens_, ids), g.lookup(*positions_, pos)};
  ad::Expr x = ad::concat_cols(parts);
  for (const Block &b : blocks_) {
    x = b.norm1(g, ad::add(x, b.attention(g, x, x)));
    x = b.norm2(g, ad::add(x, b.ffn(g, x)));
  }
  return x;
}

std::unique_ptr<EncoderProvider> make_encoder(nn::ParameterStore &store,
                                              const EncoderConfig &config,
                                              const Vocabulary &vocab, std::mt19937_64 &rng) {
  if (config.provider == "transformer") {
    return std::make_unique<TransformerEncoder>(store, config, vocab, rng);
  }
  throw std::invalid_argument("unknown encoder provider '" + config.provider + "'");
}

}  // namespace alee
