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

#include "alee/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace alee::ad {

namespace {

void check_same_graph(const Expr &a, const Expr &b) {
  if (a.graph() != b.graph()) {
    throw std::invalid_argument("expressions belong to different graphs");
  }
}

void check_shape(bool ok, const char *op) {
  if (!ok) throw std::invalid_argument(std::string("shape mismatch in ") + op);
}

bool any_grad(std::initializer_list<const Expr *> xs) {
  for (const Expr *x : xs) {
    if (x->requires_grad()) return true;
  }
  return false;
}

}  // namespace

Parameter::Parameter(std::string name, Matrix v)
    : value(std::move(v)), name_(std::move(name)) {
  zero_grad();
}

const Matrix &Expr::value() const { return graph_->value(index_); }

double Expr::scalar() const {
  const Matrix &v = value();
  if (v.size() != 1) throw std::logic_error("scalar() on non-1x1 expression");
  return v(0, 0);
}

bool Expr::requires_grad() const { return graph_->requires_grad(index_); }

Matrix &Graph::grad(int id) {
  Node &n = nodes_[id];
  if (n.grad.size() == 0) n.grad.setZero(n.value.rows(), n.value.cols());
  return n.grad;
}

Expr Graph::push(Matrix value, bool requires_grad, Backward backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = grad_enabled_ && requires_grad;
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Expr(this, static_cast<int>(nodes_.size()) - 1);
}

Expr Graph::constant(Matrix value) {
  return push(std::move(value), false, nullptr);
}

Expr Graph::scalar(double value) {
  Matrix m(1, 1);
  m(0, 0) = value;
  return constant(std::move(m));
}

Expr Graph::parameter(Parameter &p) {
  Parameter *ptr = &p;
  return push(p.value, true,
              [ptr](Graph &g, int self) { ptr->grad += g.grad(self); });
}

Expr Graph::lookup(Parameter &table, std::span<const int> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), table.value.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= table.value.rows()) {
      throw std::out_of_range("lookup row out of range in " + table.name());
    }
    out.row(static_cast<Eigen::Index>(i)) = table.value.row(rows[i]);
  }
  Parameter *ptr = &table;
  std::vector<int> idx(rows.begin(), rows.end());
  return push(std::move(out), true,
              [ptr, idx = std::move(idx)](Graph &g, int self) {
                const Matrix &gr = g.grad(self);
                for (std::size_t i = 0; i < idx.size(); ++i) {
                  ptr->grad.row(idx[i]) += gr.row(static_cast<Eigen::Index>(i));
                }
              });
}

void Graph::backward(const Expr &loss) {
  if (loss.graph() != this) throw std::invalid_argument("loss from other graph");
  if (loss.value().size() != 1) {
    throw std::invalid_argument("backward() requires a 1x1 loss");
  }
  if (!nodes_[loss.index()].requires_grad) return;
  grad(loss.index())(0, 0) += 1.0;
  for (int i = loss.index(); i >= 0; --i) {
    Node &n = nodes_[i];
    if (!n.requires_grad || n.grad.size() == 0 || !n.backward) continue;
    n.backward(*this, i);
  }
}

// ---- operations -----------------------------------------------------------

Expr matmul(const Expr &a, const Expr &b) {
  check_same_graph(a, b);
  check_shape(a.cols() == b.rows(), "matmul");
  Graph &g = *a.graph();
  int ia = a.index(), ib = b.index();
  return g.push(a.value() * b.value(), any_grad({&a, &b}),
                [ia, ib](Graph &g, int self) {
                  const Matrix &gr = g.grad(self);
                  if (g.requires_grad(ia)) g.grad(ia).noalias() += gr * g.value(ib).transpose();
                  if (g.requires_grad(ib)) g.grad(ib).noalias() += g.value(ia).transpose() * gr;
                });
}

Expr matmul_nt(const Expr &a, const Expr &b) {
  check_same_graph(a, b);
  check_shape(a.cols() == b.cols(), "matmul_nt");
  Graph &g = *a.graph();
  int ia = a.index(), ib = b.index();
  return g.push(a.value() * b.value().transpose(), any_grad({&a, &b}),
                [ia, ib](Graph &g, int self) {
                  const Matrix &gr = g.grad(self);
                  if (g.requires_grad(ia)) g.grad(ia).noalias() += gr * g.value(ib);
                  if (g.requires_grad(ib)) g.grad(ib).noalias() += gr.transpose() * g.value(ia);
                });
}

Expr add(const Expr &a, const Expr &b) {
  check_same_graph(a, b);
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  Graph &g = *a.graph();
  int ia = a.index(), ib = b.index();
  return g.push(a.value() + b.value(), any_grad({&a, &b}),
                [ia, ib](Graph &g, int self) {
                  const Matrix &gr = g.grad(self);
                  if (g.requires_grad(ia)) g.grad(ia) += gr;
                  if (g.requires_grad(ib)) g.grad(ib) += gr;
                });
}

Expr sub(const Expr &a, const Expr &b) {
  check_same_graph(a, b);
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "sub");
  Graph &g = *a.graph();
  int ia = a.index(), ib = b.index();
  return g.push(a.value() - b.value(), any_grad({&a, &b}),
                [ia, ib](Graph &g, int self) {
                  const Matrix &gr = g.grad(self);
                  if (g.requires_grad(ia)) g.grad(ia) += gr;
                  if (g.requires_grad(ib)) g.grad(ib) -= gr;
                });
}

Expr hadamard(const Expr &a, const Expr &b) {
  check_same_graph(a, b);
  check_shape(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard");
  Graph &g = *a.graph();
  int ia = a.index(), ib = b.index();
  return g.push(a.value().cwiseProduct(b.value()), any_grad({&a, &b}),
                [ia, ib](Graph &g, int self) {
                  const Matrix &gr = g.grad(self);
                  if (g.requires_grad(ia)) g.grad(ia) += gr.cwiseProduct(g.value(ib));
                  if (g.requires_grad(ib)) g.grad(ib) += gr.cwiseProduct(g.value(ia));
                });
}

Expr add_row(const Expr &a, const Expr &row) {
  check_same_graph(a, row);
  check_shape(row.rows() == 1 && row.cols() == a.cols(), "add_row");
  Graph &g = *a.graph();
  int ia = a.index(), ir = row.index();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return g.push(std::move(out), any_grad({&a, &row}),
                [ia, ir](Graph &g, int self) {
                  const Matrix &gr = g.grad(self);
                  if (g.requires_grad(ia)) g.grad(ia) += gr;
                  if (g.requires_grad(ir)) g.grad(ir) += gr.colwise().sum();
                });
}

Expr scale_rows(const Expr &a, const Expr &s) {
  check_same_graph(a, s);
  check_shape(s.cols() == 1 && s.rows() == a.rows(), "scale_rows");
  Graph &g = *a.graph();
  int ia = a.index(), is = s.index();
  Matrix out = s.value().col(0).asDiagonal() * a.value();
  return g.push(std::move(out), any_grad({&a, &s}),
                [ia, is](Graph &g, int self) {
                  const Matrix &gr = g.grad(self);
                  if (g.requires_grad(ia)) {
                    g.grad(ia) += g.value(is).col(0).asDiagonal() * gr;
                  }
                  if (g.requires_grad(is)) {
                    g.grad(is) += gr.cwiseProduct(g.value(ia)).rowwise().sum();
                  }
                });
}

Expr affine(const Expr &a, double alpha, double beta) {
  Graph &g = *a.graph();
  int ia = a.index();
  Matrix out = (alpha * a.value()).array() + beta;
  return g.push(std::move(out), a.requires_grad(),
                [ia, alpha](Graph &g, int self) { g.grad(ia) += alpha * g.grad(self); });
}

Expr scale(const Expr &a, double alpha) { return affine(a, alpha, 0.0); }

Expr relu(const Expr &a) {
  Graph &g = *a.graph();
  int ia = a.index();
  return g.push(a.value().cwiseMax(0.0), a.requires_grad(), [ia](Graph &g, int self) {
    g.grad(ia) += (g.value(ia).array() > 0.0).cast<double>().matrix().cwiseProduct(g.grad(self));
  });
}

Expr tanh(const Expr &a) {
  Graph &g = *a.graph();
  int ia = a.index();
  return g.push(a.value().array().tanh().matrix(), a.requires_grad(), [ia](Graph &g, int self) {
    const Matrix &y = g.value(self);
    g.grad(ia) += ((1.0 - y.array().square()) * g.grad(self).array()).matrix();
  });
}

Expr sigmoid(const Expr &a) {
  Graph &g = *a.graph();
  int ia = a.index();
  Matrix y = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  return g.push(std::move(y), a.requires_grad(), [ia](Graph &g, int self) {
    const Matrix &y = g.value(self);
    g.grad(ia) += (y.array() * (1.0 - y.array()) * g.grad(self).array()).matrix();
  });
}

Expr softplus(const Expr &a) {
  Graph &g = *a.graph();
  int ia = a.index();
  // log(1 + e^x) computed as max(x, 0) + log1p(e^-|x|)
  Matrix y = a.value().unaryExpr(
      [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); });
  return g.push(std::move(y), a.requires_grad(), [ia](Graph &g, int self) {
    Matrix d = g.value(ia).unaryExpr([](double x) { return 1.0 / (1.0 + std::exp(-x)); });
    g.grad(ia) += d.cwiseProduct(g.grad(self));
  });
}

Expr square(const Expr &a) {
  Graph &g = *a.graph();
  int ia = a.index();
  return g.push(a.value().array().square().matrix(), a.requires_grad(),
                [ia](Graph &g, int self) {
                  g.grad(ia) += 2.0 * g.value(ia).cwiseProduct(g.grad(self));
                });
}

namespace {

Matrix softmax_rows_value(const Matrix &x) {
  Matrix y(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mx = x.row(r).maxCoeff();
    y.row(r) = (x.row(r).array() - mx).exp();
    y.row(r) /= y.row(r).sum();
  }
  return y;
}

}  // namespace

Expr softmax_rows(const Expr &a) {
  Graph &g = *a.graph();
  int ia = a.index();
  return g.push(softmax_rows_value(a.value()), a.requires_grad(), [ia](Graph &g, int self) {
    const Matrix &y = g.value(self);
    const Matrix &gr = g.grad(self);
    Vector dots = y.cwiseProduct(gr).rowwise().sum();
    g.grad(ia) += y.cwiseProduct(gr - dots.replicate(1, y.cols()));
  });
}

Expr cross_entropy_rows(const Expr &logits, std::span<const int> targets) {
  check_shape(static_cast<Eigen::Index>(targets.size()) == logits.rows(), "cross_entropy_rows");
  Graph &g = *logits.graph();
  const Matrix &x = logits.value();
  Matrix probs = softmax_rows_value(x);
  Matrix out(x.rows(), 1);
  std::vector<int> tg(targets.begin(), targets.end());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    int t = tg[static_cast<std::size_t>(r)];
    if (t < 0 || t >= x.cols()) throw std::out_of_range("cross-entropy target out of range");
    double mx = x.row(r).maxCoeff();
    double lse = mx + std::log((x.row(r).array() - mx).exp().sum());
    out(r, 0) = lse - x(r, t);
  }
  int il = logits.index();
  return g.push(std::move(out), logits.requires_grad(),
                [il, probs = std::move(probs), tg = std::move(tg)](Graph &g, int self) {
                  const Matrix &gr = g.grad(self);
                  Matrix d = probs;
                  for (Eigen::Index r = 0; r < d.rows(); ++r) {
                    d(r, tg[static_cast<std::size_t>(r)]) -= 1.0;
                    d.row(r) *= gr(r, 0);
                  }
                  g.grad(il) += d;
                });
}

Expr layer_norm_rows(const Expr &a, const Expr &gamma, const Expr &beta, double eps) {
  check_same_graph(a, gamma);
  check_same_graph(a, beta);
  check_shape(gamma.rows() == 1 && gamma.cols() == a.cols() && beta.rows() == 1 &&
                  beta.cols() == a.cols(),
              "layer_norm_rows");
  Graph &g = *a.graph();
  const Matrix &x = a.value();
  const Eigen::Index d = x.cols();
  Matrix xhat(x.rows(), d);
  Vector inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    double mu = x.row(r).mean();
    double var = (x.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = (x.row(r).array() - mu) * inv_std(r);
  }
  Matrix y = (xhat.array().rowwise() * gamma.value().row(0).array()).matrix();
  y.rowwise() += beta.value().row(0);
  int ia = a.index(), ig = gamma.index(), ib = beta.index();
  return g.push(std::move(y), any_grad({&a, &gamma, &beta}),
                [ia, ig, ib, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph &g,
                                                                                  int self) {
                  const Matrix &gr = g.grad(self);
                  if (g.requires_grad(ig)) g.grad(ig) += gr.cwiseProduct(xhat).colwise().sum();
                  if (g.requires_grad(ib)) g.grad(ib) += gr.colwise().sum();
                  if (g.requires_grad(ia)) {
                    const double n = static_cast<double>(xhat.cols());
                    Matrix gx = (gr.array().rowwise() * g.value(ig).row(0).array()).matrix();
                    for (Eigen::Index r = 0; r < gx.rows(); ++r) {
                      double m1 = gx.row(r).mean();
                      double m2 = gx.row(r).cwiseProduct(xhat.row(r)).sum() / n;
                      g.grad(ia).row(r) +=
                          inv_std(r) * (gx.row(r).array() - m1 - xhat.row(r).array() * m2).matrix();
                    }
                  }
                });
}

Expr concat_cols(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols of nothing");
  Graph &g = *parts[0].graph();
  Eigen::Index rows = parts[0].rows(), cols = 0;
  bool rg = false;
  std::vector<int> ids;
  std::vector<Eigen::Index> widths;
  for (const Expr &p : parts) {
    check_same_graph(parts[0], p);
    check_shape(p.rows() == rows, "concat_cols");
    cols += p.cols();
    rg = rg || p.requires_grad();
    ids.push_back(p.index());
    widths.push_back(p.cols());
  }
  Matrix out(rows, cols);
  Eigen::Index off = 0;
  for (const Expr &p : parts) {
    out.middleCols(off, p.cols()) = p.value();
    off += p.cols();
  }
  return g.push(std::move(out), rg, [ids, widths](Graph &g, int self) {
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (g.requires_grad(ids[i])) g.grad(ids[i]) += g.grad(self).middleCols(off, widths[i]);
      off += widths[i];
    }
  });
}

Expr concat_rows(std::span<const Expr> parts) {
  if (parts.empty()) throw std::invalid_argument("concat_rows of nothing");
  Graph &g = *parts[0].graph();
  Eigen::Index cols = parts[0].cols(), rows = 0;
  bool rg = false;
  std::vector<int> ids;
  std::vector<Eigen::Index> heights;
  for (const Expr &p : parts) {
    check_same_graph(parts[0], p);
    check_shape(p.cols() == cols, "concat_rows");
    rows += p.rows();
    rg = rg || p.requires_grad();
    ids.push_back(p.index());
    heights.push_back(p.rows());
  }
  Matrix out(rows, cols);
  Eigen::Index off = 0;
  for (const Expr &p : parts) {
    out.middleRows(off, p.rows()) = p.value();
    off += p.rows();
  }
  return g.push(std::move(out), rg, [ids, heights](Graph &g, int self) {
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (g.requires_grad(ids[i])) g.grad(ids[i]) += g.grad(self).middleRows(off, heights[i]);
      off += heights[i];
    }
  });
}

Expr slice_cols(const Expr &a, Eigen::Index start, Eigen::Index count) {
  check_shape(start >= 0 && count >= 0 && start + count <= a.cols(), "slice_cols");
  Graph &g = *a.graph();
  int ia = a.index();
  return g.push(a.value().middleCols(start, count), a.requires_grad(),
                [ia, start, count](Graph &g, int self) {
                  g.grad(ia).middleCols(start, count) += g.grad(self);
                });
}

Expr slice_rows(const Expr &a, Eigen::Index start, Eigen::Index count) {
  check_shape(start >= 0 && count >= 0 && start + count <= a.rows(), "slice_rows");
  Graph &g = *a.graph();
  int ia = a.index();
  return g.push(a.value().middleRows(start, count), a.requires_grad(),
                [ia, start, count](Graph &g, int self) {
                  g.grad(ia).middleRows(start, count) += g.grad(self);
                });
}

Expr repeat_row(const Expr &row, Eigen::Index n) {
  check_shape(row.rows() == 1, "repeat_row");
  Graph &g = *row.graph();
  int ir = row.index();
  return g.push(row.value().replicate(n, 1), row.requires_grad(), [ir](Graph &g, int self) {
    g.grad(ir) += g.grad(self).colwise().sum();
  });
}

Expr mean_rows(const Expr &a, Eigen::Index begin, Eigen::Index end) {
  check_shape(begin >= 0 && begin < end && end <= a.rows(), "mean_rows");
  Graph &g = *a.graph();
  int ia = a.index();
  const double inv = 1.0 / static_cast<double>(end - begin);
  Matrix out = a.value().middleRows(begin, end - begin).colwise().sum() * inv;
  return g.push(std::move(out), a.requires_grad(), [ia, begin, end, inv](Graph &g, int self) {
    Matrix &ga = g.grad(ia);
    RowVector gr = g.grad(self).row(0) * inv;
    for (Eigen::Index r = begin; r < end; ++r) ga.row(r) += gr;
  });
}

Expr element(const Expr &a, Eigen::Index r, Eigen::Index c) {
  check_shape(r >= 0 && r < a.rows() && c >= 0 && c < a.cols(), "element");
  Graph &g = *a.graph();
  int ia = a.index();
  Matrix out(1, 1);
  out(0, 0) = a.value()(r, c);
  return g.push(std::move(out), a.requires_grad(), [ia, r, c](Graph &g, int self) {
    g.grad(ia)(r, c) += g.grad(self)(0, 0);
  });
}

Expr sum(const Expr &a) {
  Graph &g = *a.graph();
  int ia = a.index();
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return g.push(std::move(out), a.requires_grad(), [ia](Graph &g, int self) {
    g.grad(ia).array() += g.grad(self)(0, 0);
  });
}

Expr sum_scalars(Graph &g, std::span<const Expr> parts) {
  if (parts.empty()) return g.scalar(0.0);
  double total = 0.0;
  bool rg = false;
  std::vector<int> ids;
  ids.reserve(parts.size());
  for (const Expr &p : parts) {
    if (p.graph() != &g) throw std::invalid_argument("sum_scalars across graphs");
    total += p.scalar();
    rg = rg || p.requires_grad();
    ids.push_back(p.index());
  }
  Matrix out(1, 1);
  out(0, 0) = total;
  return g.push(std::move(out), rg, [ids = std::move(ids)](Graph &g, int self) {
    double gr = g.grad(self)(0, 0);
    for (int id : ids) {
      if (g.requires_grad(id)) g.grad(id)(0, 0) += gr;
    }
  });
}

}  // namespace alee::ad
