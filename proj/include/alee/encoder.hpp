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

// Sentence encoders producing one feature row per token.

#ifndef ALEE_ENCODER_HPP_
#define ALEE_ENCODER_HPP_

#include "alee/autodiff.hpp"
#include "alee/corpus.hpp"
#include "alee/nn.hpp"

#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace alee {

struct EncoderConfig {
  int d_h = 128;
  int layers = 2;
  int heads = 4;
  int max_len = kMaxSentenceLength;
  std::string provider = "transformer";
};

// Token strings to embedding rows. Id 0 is reserved for unknown tokens.
class Vocabulary {
 public:
  Vocabulary();
  static Vocabulary build(const Corpus &corpus);

  int id(const std::string &token) const;
  int add(const std::string &token);
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string> &tokens() const { return tokens_; }
  std::vector<int> ids(const Sentence &s) const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

// Per-token features of one sentence.
struct EncoderOutput {
  Matrix token_features;  // n x d_h

  int length() const { return static_cast<int>(token_features.rows()); }
  // Mean of the token rows covered by `span`.
  RowVector span_feature(Span span) const;
};

// Anything that maps a sentence to an n x d_h feature matrix. Parameters of
// the provider (if any) live in the store passed at construction.
class EncoderProvider {
 public:
  virtual ~EncoderProvider() = default;
  virtual int dim() const = 0;
  virtual ad::Expr encode(ad::Graph &g, const Sentence &sentence) const = 0;

  // Inference without gradient bookkeeping.
  EncoderOutput encode(const Sentence &sentence) const;
};

// Token embedding concatenated with a learned position embedding, followed by
// post-norm bidirectional self-attention blocks.
class TransformerEncoder : public EncoderProvider {
 public:
  TransformerEncoder(nn::ParameterStore &store, const EncoderConfig &config,
                     const Vocabulary &vocab, std::mt19937_64 &rng);

  int dim() const override { return config_.d_h; }
  ad::Expr encode(ad::Graph &g, const Sentence &sentence) const override;
  using EncoderProvider::encode;

  ad::Parameter &token_embeddings() const { return *tokens_; }
  ad::Parameter &position_embeddings() const { return *positions_; }

 private:
  struct Block {
    nn::MultiHeadAttention attention;
    nn::LayerNorm norm1;
    nn::FeedForward ffn;
    nn::LayerNorm norm2;
  };

  EncoderConfig config_;
  const Vocabulary &vocab_;
  ad::Parameter *tokens_ = nullptr;
  ad::Parameter *positions_ = nullptr;
  std::vector<Block> blocks_;
};

std::unique_ptr<EncoderProvider> make_encoder(nn::ParameterStore &store,
                                              const EncoderConfig &config,
                                              const Vocabulary &vocab, std::mt19937_64 &rng);

}  // namespace alee

#endif  // ALEE_ENCODER_HPP_
