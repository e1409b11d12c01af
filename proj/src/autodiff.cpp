// Copyright 2026 The Shaping Lab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "shaping/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace shaping::ad {

namespace {

void RequireSameTape(Var a, Var b, const char* op) {
  if (!a.valid() || !b.valid() || a.tape() != b.tape()) {
    throw std::invalid_argument(std::string(op) + ": operands on different tapes");
  }
}

void RequireSameShape(Var a, Var b, const char* op) {
  RequireSameTape(a, b, op);
  if (!a.value().SameShape(b.value())) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                a.value().ShapeString() + " vs " +
                                b.value().ShapeString());
  }
}

void RequireScalar(Var s, const char* op) {
  if (s.value().size() != 1) {
    throw std::invalid_argument(std::string(op) + ": expected scalar, got " +
                                s.value().ShapeString());
  }
}

Tensor ShapedZeros(int rank, std::size_t rows, std::size_t cols) {
  return Tensor::Zeros(rank, rows, rank == 2 ? cols : 1);
}

template <typename F>
Var Unary(Op op, Var a, F f, double scale = 0.0, double shift = 0.0) {
  Tensor out = a.value();
  for (double& v : out.data()) v = f(v);
  return a.tape()->Record(op, std::move(out), a, Var(), scale, shift);
}

}  // namespace

const Tensor& Var::value() const { return tape_->value(*this); }
bool Var::requires_grad() const { return tape_->requires_grad(*this); }

Var Tape::Leaf(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = true;
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::Constant(Tensor value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

Var Tape::Record(Op op, Tensor value, Var a, Var b, double scale, double shift,
                 std::size_t offset, int aux_rank, std::size_t aux_rows,
                 std::size_t aux_cols) {
  Node n;
  n.value = std::move(value);
  n.op = op;
  n.scale = scale;
  n.shift = shift;
  n.offset = offset;
  n.aux_rank = aux_rank;
  n.aux_rows = aux_rows;
  n.aux_cols = aux_cols;
  const bool ga = a.valid() && nodes_[a.id()].requires_grad;
  const bool gb = b.valid() && nodes_[b.id()].requires_grad;
  if (recording_ && (ga || gb)) {
    n.requires_grad = true;
    n.parents[0] = a.id();
    n.num_parents = 1;
    if (b.valid()) {
      n.parents[1] = b.id();
      n.num_parents = 2;
    }
  }
  nodes_.push_back(std::move(n));
  return Var(this, static_cast<std::uint32_t>(nodes_.size() - 1));
}

void Tape::Backprop(std::uint32_t id, Var g, Var* out) {
  // Copy everything needed: recording new nodes may reallocate nodes_.
  const Op op = nodes_[id].op;
  const double scale = nodes_[id].scale;
  const std::size_t offset = nodes_[id].offset;
  const Var self(this, id);
  const Var a(this, nodes_[id].parents[0]);
  const Var b(this, nodes_[id].parents[1]);
  const bool has_b = nodes_[id].num_parents > 1;
  const bool need_a = nodes_[a.id()].requires_grad;
  const bool need_b = has_b && nodes_[b.id()].requires_grad;

  switch (op) {
    case Op::kLeaf:
      break;
    case Op::kAdd:
      out[0] = g;
      out[1] = g;
      break;
    case Op::kSub:
      out[0] = g;
      if (need_b) out[1] = Neg(g);
      break;
    case Op::kMul:
      if (need_a) out[0] = Mul(g, b);
      if (need_b) out[1] = Mul(g, a);
      break;
    case Op::kAffine:
      out[0] = Scale(g, scale);
      break;
    case Op::kSigmoid:
      out[0] = Mul(g, Mul(self, Affine(self, -1.0, 1.0)));
      break;
    case Op::kTanh:
      out[0] = Mul(g, Affine(Mul(self, self), -1.0, 1.0));
      break;
    case Op::kExp:
      out[0] = Mul(g, self);
      break;
    case Op::kLog:
      out[0] = Mul(g, Reciprocal(a));
      break;
    case Op::kReciprocal:
      out[0] = Neg(Mul(g, Mul(self, self)));
      break;
    case Op::kMatVec:
      if (need_a) out[0] = Outer(g, b);
      if (need_b) out[1] = MatTVec(a, g);
      break;
    case Op::kMatTVec:
      if (need_a) out[0] = Outer(b, g);
      if (need_b) out[1] = MatVec(a, g);
      break;
    case Op::kOuter:
      if (need_a) out[0] = MatVec(g, b);
      if (need_b) out[1] = MatTVec(g, a);
      break;
    case Op::kConcat: {
      const Tensor& av = a.value();
      const Tensor& bv = b.value();
      if (need_a) out[0] = Slice(g, 0, av.rank(), av.rows(), av.cols());
      if (need_b) out[1] = Slice(g, av.size(), bv.rank(), bv.rows(), bv.cols());
      break;
    }
    case Op::kSlice: {
      const Tensor& av = a.value();
      out[0] = Embed(g, offset, av.rank(), av.rows(), av.cols());
      break;
    }
    case Op::kEmbed: {
      const Tensor& av = a.value();
      out[0] = Slice(g, offset, av.rank(), av.rows(), av.cols());
      break;
    }
    case Op::kSum: {
      const Tensor& av = a.value();
      out[0] = Broadcast(g, av.rank(), av.rows(), av.cols());
      break;
    }
    case Op::kBroadcast:
      out[0] = Sum(g);
      break;
    case Op::kMulScalar:
      if (need_a) out[0] = MulScalar(g, b);
      if (need_b) out[1] = Sum(Mul(g, a));
      break;
    case Op::kLogSumExp: {
      const Tensor& av = a.value();
      Var softmax = Exp(Sub(a, Broadcast(self, av.rank(), av.rows(), av.cols())));
      out[0] = MulScalar(softmax, g);
      break;
    }
  }
}

std::vector<Var> Tape::Gradient(Var output, std::span<const Var> wrt,
                                bool create_graph) {
  if (output.tape() != this) {
    throw std::invalid_argument("backward: output belongs to another tape");
  }
  if (output.value().size() != 1) {
    throw std::invalid_argument("backward: output must be scalar, got " +
                                output.value().ShapeString());
  }
  const bool saved = recording_;
  recording_ = create_graph;

  const std::uint32_t n = output.id() + 1;
  std::vector<Var> grads(n);
  grads[output.id()] = Constant(Tensor::Full(output.value(), 1.0));
  for (std::uint32_t id = n; id-- > 0;) {
    if (!grads[id].valid()) continue;
    if (!nodes_[id].requires_grad || nodes_[id].num_parents == 0) continue;
    Var pg[2];
    Backprop(id, grads[id], pg);
    for (int k = 0; k < nodes_[id].num_parents; ++k) {
      const std::uint32_t p = nodes_[id].parents[k];
      if (!pg[k].valid() || !nodes_[p].requires_grad) continue;
      grads[p] = grads[p].valid() ? Add(grads[p], pg[k]) : pg[k];
    }
  }

  std::vector<Var> result;
  result.reserve(wrt.size());
  for (Var w : wrt) {
    if (w.tape() != this) {
      recording_ = saved;
      throw std::invalid_argument("backward: wrt variable on another tape");
    }
    if (w.id() < n && grads[w.id()].valid()) {
      result.push_back(grads[w.id()]);
    } else {
      result.push_back(Constant(Tensor::ZerosLike(w.value())));
    }
  }
  recording_ = saved;
  return result;
}

std::vector<Tensor> Tape::GradientValues(Var output, std::span<const Var> wrt) {
  const std::size_t mark = nodes_.size();
  std::vector<Var> g = Gradient(output, wrt, /*create_graph=*/false);
  std::vector<Tensor> out;
  out.reserve(g.size());
  for (Var v : g) out.push_back(v.value());
  nodes_.resize(mark);
  return out;
}

Var Add(Var a, Var b) {
  RequireSameShape(a, b, "add");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return a.tape()->Record(Op::kAdd, std::move(out), a, b);
}

Var Sub(Var a, Var b) {
  RequireSameShape(a, b, "sub");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return a.tape()->Record(Op::kSub, std::move(out), a, b);
}

Var Mul(Var a, Var b) {
  RequireSameShape(a, b, "mul");
  Tensor out = a.value();
  const Tensor& bv = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return a.tape()->Record(Op::kMul, std::move(out), a, b);
}

Var Affine(Var a, double scale, double shift) {
  return Unary(Op::kAffine, a, [=](double v) { return scale * v + shift; },
               scale, shift);
}

Var Neg(Var a) { return Affine(a, -1.0, 0.0); }
Var Scale(Var a, double scale) { return Affine(a, scale, 0.0); }

Var Sigmoid(Var a) {
  return Unary(Op::kSigmoid, a, [](double v) {
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                    : std::exp(v) / (1.0 + std::exp(v));
  });
}

Var Tanh(Var a) {
  return Unary(Op::kTanh, a, [](double v) { return std::tanh(v); });
}

Var Exp(Var a) {
  return Unary(Op::kExp, a, [](double v) { return std::exp(v); });
}

Var Log(Var a) {
  return Unary(Op::kLog, a, [](double v) { return std::log(v); });
}

Var Reciprocal(Var a) {
  return Unary(Op::kReciprocal, a, [](double v) { return 1.0 / v; });
}

Var MatVec(Var w, Var x) {
  RequireSameTape(w, x, "matvec");
  const Tensor& wv = w.value();
  const Tensor& xv = x.value();
  if (wv.rank() != 2 || xv.rank() != 1 || wv.cols() != xv.size()) {
    throw std::invalid_argument("matvec: shape mismatch " + wv.ShapeString() +
                                " x " + xv.ShapeString());
  }
  Tensor out = Tensor::Zeros(1, wv.rows());
  const std::size_t k = wv.cols();
  for (std::size_t r = 0; r < wv.rows(); ++r) {
    double acc = 0.0;
    const double* row = wv.data().data() + r * k;
    for (std::size_t c = 0; c < k; ++c) acc += row[c] * xv[c];
    out[r] = acc;
  }
  return w.tape()->Record(Op::kMatVec, std::move(out), w, x);
}

Var MatTVec(Var w, Var x) {
  RequireSameTape(w, x, "mattvec");
  const Tensor& wv = w.value();
  const Tensor& xv = x.value();
  if (wv.rank() != 2 || xv.rank() != 1 || wv.rows() != xv.size()) {
    throw std::invalid_argument("mattvec: shape mismatch " + wv.ShapeString() +
                                "^T x " + xv.ShapeString());
  }
  Tensor out = Tensor::Zeros(1, wv.cols());
  const std::size_t k = wv.cols();
  for (std::size_t r = 0; r < wv.rows(); ++r) {
    const double* row = wv.data().data() + r * k;
    const double s = xv[r];
    for (std::size_t c = 0; c < k; ++c) out[c] += row[c] * s;
  }
  return w.tape()->Record(Op::kMatTVec, std::move(out), w, x);
}

Var Outer(Var a, Var b) {
  RequireSameTape(a, b, "outer");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() != 1 || bv.rank() != 1) {
    throw std::invalid_argument("outer: expected vectors");
  }
  std::vector<double> out(av.size() * bv.size());
  for (std::size_t r = 0; r < av.size(); ++r) {
    for (std::size_t c = 0; c < bv.size(); ++c) {
      out[r * bv.size() + c] = av[r] * bv[c];
    }
  }
  return a.tape()->Record(Op::kOuter,
                          Tensor::Matrix(av.size(), bv.size(), std::move(out)),
                          a, b);
}

Var Concat(Var a, Var b) {
  RequireSameTape(a, b, "concat");
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rank() > 1 || bv.rank() > 1) {
    throw std::invalid_argument("concat: expected vectors or scalars");
  }
  std::vector<double> out(av.data().begin(), av.data().end());
  out.insert(out.end(), bv.data().begin(), bv.data().end());
  return a.tape()->Record(Op::kConcat, Tensor::Vector(std::move(out)), a, b);
}

Var Slice(Var a, std::size_t offset, int rank, std::size_t rows,
          std::size_t cols) {
  Tensor out = ShapedZeros(rank, rows, cols);
  if (offset + out.size() > a.value().size()) {
    throw std::invalid_argument("slice: range exceeds source " +
                                a.value().ShapeString());
  }
  const auto src = a.value().data();
  std::copy(src.begin() + offset, src.begin() + offset + out.size(),
            out.data().begin());
  return a.tape()->Record(Op::kSlice, std::move(out), a, Var(), 0.0, 0.0,
                          offset, rank, rows, cols);
}

Var Element(Var a, std::size_t index) { return Slice(a, index, 0, 1, 1); }

Var Embed(Var a, std::size_t offset, int rank, std::size_t rows,
          std::size_t cols) {
  Tensor out = ShapedZeros(rank, rows, cols);
  const auto src = a.value().data();
  if (offset + src.size() > out.size()) {
    throw std::invalid_argument("embed: source does not fit target");
  }
  std::copy(src.begin(), src.end(), out.data().begin() + offset);
  return a.tape()->Record(Op::kEmbed, std::move(out), a, Var(), 0.0, 0.0,
                          offset, rank, rows, cols);
}

Var Sum(Var a) {
  double acc = 0.0;
  for (double v : a.value().data()) acc += v;
  return a.tape()->Record(Op::kSum, Tensor::Scalar(acc), a);
}

Var Broadcast(Var s, int rank, std::size_t rows, std::size_t cols) {
  RequireScalar(s, "broadcast");
  Tensor out = ShapedZeros(rank, rows, cols);
  const double v = s.value().item();
  for (double& x : out.data()) x = v;
  return s.tape()->Record(Op::kBroadcast, std::move(out), s);
}

Var MulScalar(Var a, Var s) {
  RequireSameTape(a, s, "mul_scalar");
  RequireScalar(s, "mul_scalar");
  Tensor out = a.value();
  const double v = s.value().item();
  for (double& x : out.data()) x *= v;
  return a.tape()->Record(Op::kMulScalar, std::move(out), a, s);
}

Var LogSumExp(Var a) {
  const auto d = a.value().data();
  if (d.empty()) throw std::invalid_argument("logsumexp: empty input");
  const double hi = *std::max_element(d.begin(), d.end());
  double acc = 0.0;
  for (double v : d) acc += std::exp(v - hi);
  return a.tape()->Record(Op::kLogSumExp, Tensor::Scalar(hi + std::log(acc)),
                          a);
}

Var StopGradient(Var a) { return a.tape()->Constant(a.value()); }

Var LogSoftmaxAt(Var logits, std::size_t index) {
  return Sub(Element(logits, index), LogSumExp(logits));
}

}  // namespace shaping::ad
