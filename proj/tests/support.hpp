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


// Shared test helpers: finite-difference gradient checks, naive reference
// implementations and small fixtures.

#ifndef ALEE_TESTS_SUPPORT_HPP_
#define ALEE_TESTS_SUPPORT_HPP_

#include "alee/autodiff.hpp"
#include "alee/corpus.hpp"
#include "alee/extractor.hpp"
#include "alee/mblp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace alee::testing {

// Max relative error between analytic and central-difference gradients over
// up to `per_param` random entries of every parameter. `build` must produce
// a 1x1 loss on the given graph. `floor` bounds the denominator from below so
// gradients that are exactly zero (e.g. an attention key bias, which softmax
// cancels) are compared against round-off, not against themselves.
inline double gradient_check(std::vector<ad::Parameter *> params,
                             const std::function<ad::Expr(ad::Graph &)> &build, int per_param,
                             std::mt19937_64 &rng, double h = 1e-6, double floor = 1e-6) {
  for (auto *p : params) p->zero_grad();
  {
    ad::Graph g(true);
    ad::Expr loss = build(g);
    g.backward(loss);
  }
  auto eval = [&] {
    ad::Graph g(false);
    return build(g).scalar();
  };
  double worst = 0.0;
  for (auto *p : params) {
    const Eigen::Index n = p->value.size();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(per_param)));
    for (Eigen::Index i : idx) {
      double &x = p->value.data()[i];
      const double saved = x;
      x = saved + h;
      const double up = eval();
      x = saved - h;
      const double down = eval();
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double analytic = p->grad.data()[i];
      const double scale = std::max({std::abs(numeric), std::abs(analytic), floor});
      worst = std::max(worst, std::abs(numeric - analytic) / scale);
    }
  }
  return worst;
}

inline std::vector<ad::Parameter *> all_parameters(nn::ParameterStore &store) {
  std::vector<ad::Parameter *> out;
  for (auto &p : store.all()) out.push_back(&p);
  return out;
}

inline Matrix random_matrix(Eigen::Index r, Eigen::Index c, std::mt19937_64 &rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

// Softmax attention written as loops, one head per column block.
inline Matrix naive_attention(const Matrix &q, const Matrix &k, const Matrix &v, int heads) {
  const Eigen::Index dk = q.cols() / heads;
  const Eigen::Index dv = v.cols() / heads;
  Matrix out = Matrix::Zero(q.rows(), v.cols());
  for (int h = 0; h < heads; ++h) {
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      std::vector<double> s(static_cast<std::size_t>(k.rows()));
      double mx = -1e300;
      for (Eigen::Index j = 0; j < k.rows(); ++j) {
        double dot = 0.0;
        for (Eigen::Index c = 0; c < dk; ++c) dot += q(i, h * dk + c) * k(j, h * dk + c);
        s[static_cast<std::size_t>(j)] = dot / std::sqrt(static_cast<double>(dk));
        mx = std::max(mx, s[static_cast<std::size_t>(j)]);
      }
      double z = 0.0;
      for (auto &x : s) {
        x = std::exp(x - mx);
        z += x;
      }
      for (Eigen::Index j = 0; j < k.rows(); ++j) {
        for (Eigen::Index c = 0; c < dv; ++c) {
          out(i, h * dv + c) += s[static_cast<std::size_t>(j)] / z * v(j, h * dv + c);
        }
      }
    }
  }
  return out;
}

inline double naive_sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Gated memory update computed one category row at a time from the stored
// parameter values.
inline Matrix naive_memory_update(const nn::ParameterStore &store, const std::string &task,
                                  const Matrix &memory, const Matrix &encoding) {
  auto value = [&](const std::string &name) -> const Matrix & {
    return store.find("mblp/" + task + "/" + name)->value;
  };
  const Matrix &wq = value("update_query/w");
  const Matrix &wk = value("update_key/w");
  const Matrix &wm = value("write/w");
  const Matrix &wg = value("gate/w");
  const Matrix &bg = value("gate/b");
  const Matrix keys = encoding * wk;
  Matrix out(memory.rows(), memory.cols());
  for (Eigen::Index p = 0; p < memory.rows(); ++p) {
    const Matrix q = memory.row(p) * wq;
    const Matrix f = naive_attention(q, keys, encoding, 1);
    Matrix fm(1, f.cols() + memory.cols());
    fm << f, memory.row(p);
    const Matrix pre = fm * wg + bg;
    const Matrix written = f * wm;
    for (Eigen::Index c = 0; c < memory.cols(); ++c) {
      const double g = naive_sigmoid(pre(0, pre.cols() == 1 ? 0 : c));
      out(p, c) = g * written(0, c) + (1.0 - g) * memory(p, c);
    }
  }
  return out;
}

// Enumerate, sort, slice, mean.
inline double brute_force_top_m(std::vector<double> values, int m) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end(), std::greater<double>());
  const std::size_t used = std::min<std::size_t>(values.size(), static_cast<std::size_t>(m));
  double total = 0.0;
  for (std::size_t i = 0; i < used; ++i) total += values[i];
  return total / static_cast<double>(used);
}

// Hinge over every adjacent pair after sorting by the true values.
inline double naive_rank_loss(const std::vector<double> &truth, const std::vector<double> &pred) {
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t i = 0; i < truth.size(); ++i) order.push_back({truth[i], i});
  std::stable_sort(order.begin(), order.end(),
                   [](const auto &a, const auto &b) { return a.first > b.first; });
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < order.size(); ++j) {
    const double d = pred[order[j + 1].second] - pred[order[j].second];
    if (d > 0.0) total += d;
  }
  return total;
}

inline Sentence make_sentence(const std::string &id, std::vector<std::string> tokens,
                              std::vector<TriggerCandidate> candidates) {
  Sentence s;
  s.id = id;
  s.tokens = std::move(tokens);
  s.candidates = std::move(candidates);
  return s;
}

inline ModelConfig tiny_model_config(int d_h = 8, int layers = 1, int heads = 2) {
  ModelConfig c;
  c.encoder.d_h = d_h;
  c.encoder.layers = layers;
  c.encoder.heads = heads;
  return c;
}

inline MblpConfig tiny_mblp_config(int d_m = 8) {
  MblpConfig c;
  c.d_m = d_m;
  return c;
}

}  // namespace alee::testing

#endif  // ALEE_TESTS_SUPPORT_HPP_
