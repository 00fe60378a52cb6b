#pragma once

// Minimal reverse-mode differentiation over column vectors.
//
// A Tape records operations in evaluation order; backward() walks it in
// reverse and accumulates parameter gradients into a Gradients buffer owned by
// the caller, so several tapes can run against the same parameters at once.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace editnts::ad {

using Index = Eigen::Index;

template <typename Real>
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <typename Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

/// Index of a parameter inside its ParameterSet.
struct ParamId {
  std::uint32_t index = 0;
};

template <typename Real>
struct Parameter {
  std::string name;
  Mat<Real> value;
};

template <typename Real>
class ParameterSet {
 public:
  ParamId add(std::string name, Index rows, Index cols) {
    params_.push_back({std::move(name), Mat<Real>::Zero(rows, cols)});
    return ParamId{static_cast<std::uint32_t>(params_.size() - 1)};
  }

  Parameter<Real>& operator[](ParamId id) { return params_[id.index]; }
  const Parameter<Real>& operator[](ParamId id) const { return params_[id.index]; }
  Parameter<Real>& at(std::size_t i) { return params_.at(i); }
  const Parameter<Real>& at(std::size_t i) const { return params_.at(i); }

  std::size_t size() const noexcept { return params_.size(); }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  std::size_t num_scalars() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

 private:
  std::vector<Parameter<Real>> params_;
};

/// One gradient matrix per parameter, same shapes.
template <typename Real>
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterSet<Real>& params) {
    grads_.reserve(params.size());
    for (const auto& p : params) grads_.push_back(Mat<Real>::Zero(p.value.rows(), p.value.cols()));
  }

  Mat<Real>& operator[](ParamId id) { return grads_[id.index]; }
  const Mat<Real>& operator[](ParamId id) const { return grads_[id.index]; }
  Mat<Real>& at(std::size_t i) { return grads_.at(i); }
  const Mat<Real>& at(std::size_t i) const { return grads_.at(i); }
  std::size_t size() const noexcept { return grads_.size(); }

  void zero() {
    for (auto& g : grads_) g.setZero();
  }

  Gradients& operator+=(const Gradients& o) {
    for (std::size_t i = 0; i < grads_.size(); ++i) grads_[i] += o.grads_[i];
    return *this;
  }

  Gradients& operator*=(Real f) {
    for (auto& g : grads_) g *= f;
    return *this;
  }

  Real squared_norm() const {
    Real s = 0;
    for (const auto& g : grads_) s += g.squaredNorm();
    return s;
  }

  bool all_finite() const {
    for (const auto& g : grads_) {
      if (!g.allFinite()) return false;
    }
    return true;
  }

 private:
  std::vector<Mat<Real>> grads_;
};

struct Var {
  std::uint32_t id = 0;
};

template <typename Real>
class Tape {
 public:
  using V = Vec<Real>;

  explicit Tape(const ParameterSet<Real>& params) : params_(&params) { nodes_.reserve(1024); }

  const V& value(Var v) const { return nodes_[v.id].value; }
  Real scalar(Var v) const { return nodes_[v.id].value(0); }
  std::size_t size() const noexcept { return nodes_.size(); }

  Var input(V value) { return push(Op::kInput, std::move(value)); }
  Var zeros(Index n) { return input(V::Zero(n)); }

  /// Row `row` of an embedding table, as a column vector.
  Var embed(ParamId table, Index row) {
    const auto& t = param(table).value;
    if (row < 0 || row >= t.rows()) {
      throw std::out_of_range("embedding row " + std::to_string(row) + " out of range for " +
                              param(table).name);
    }
    Var out = push(Op::kEmbed, t.row(row).transpose());
    node(out).p1 = table;
    node(out).aux = row;
    return out;
  }

  /// W x (+ b).
  Var affine(ParamId w, const ParamId* b, Var x) {
    const auto& W = param(w).value;
    V y = W * value(x);
    if (b) y += param(*b).value.col(0);
    Var out = push(Op::kAffine, std::move(y), x);
    node(out).p1 = w;
    node(out).has_p2 = b != nullptr;
    if (b) node(out).p2 = *b;
    return out;
  }
  Var affine(ParamId w, ParamId b, Var x) { return affine(w, &b, x); }
  Var linear(ParamId w, Var x) { return affine(w, nullptr, x); }

  /// W^T x.
  Var linear_transposed(ParamId w, Var x) {
    V y = param(w).value.transpose() * value(x);
    Var out = push(Op::kAffineT, std::move(y), x);
    node(out).p1 = w;
    return out;
  }

  Var concat(std::span<const Var> parts) {
    Index n = 0;
    for (auto p : parts) n += value(p).size();
    V y(n);
    Index off = 0;
    for (auto p : parts) {
      y.segment(off, value(p).size()) = value(p);
      off += value(p).size();
    }
    Var out = push(Op::kConcat, std::move(y));
    node(out).many.assign(parts.begin(), parts.end());
    return out;
  }
  Var concat(std::initializer_list<Var> parts) {
    return concat(std::span<const Var>(parts.begin(), parts.size()));
  }

  Var slice(Var x, Index start, Index len) {
    Var out = push(Op::kSlice, value(x).segment(start, len), x);
    node(out).aux = start;
    return out;
  }

  Var add(Var a, Var b) { return push(Op::kAdd, value(a) + value(b), a, b); }
  Var mul(Var a, Var b) { return push(Op::kMul, value(a).cwiseProduct(value(b)), a, b); }

  Var sigmoid(Var x) {
    V y = value(x).unaryExpr([](Real v) { return Real(1) / (Real(1) + std::exp(-v)); });
    return push(Op::kSigmoid, std::move(y), x);
  }

  Var tanh(Var x) { return push(Op::kTanh, value(x).array().tanh().matrix(), x); }

  /// Elementwise product with a constant vector (dropout masks).
  Var mask(Var x, const V& m) {
    Var out = push(Op::kMask, value(x).cwiseProduct(m), x);
    node(out).extra = m;
    return out;
  }

  Var dot(Var a, Var b) {
    V y(1);
    y(0) = value(a).dot(value(b));
    return push(Op::kDot, std::move(y), a, b);
  }

  Var softmax(Var x) { return push(Op::kSoftmax, softmax_of(value(x)), x); }

  /// sum_j weights[j] * parts[j].
  Var weighted_sum(Var weights, std::span<const Var> parts) {
    const auto& w = value(weights);
    if (static_cast<std::size_t>(w.size()) != parts.size()) {
      throw std::invalid_argument("weighted_sum: weight/part count mismatch");
    }
    V y = V::Zero(value(parts.front()).size());
    for (std::size_t j = 0; j < parts.size(); ++j) y += w(static_cast<Index>(j)) * value(parts[j]);
    Var out = push(Op::kWeightedSum, std::move(y), weights);
    node(out).many.assign(parts.begin(), parts.end());
    return out;
  }

  /// -log softmax(logits)[target], as a 1-vector.
  Var nll(Var logits, Index target) {
    V p = softmax_of(value(logits));
    V y(1);
    y(0) = -log_softmax_at(value(logits), target);
    Var out = push(Op::kNll, std::move(y), logits);
    node(out).extra = std::move(p);
    node(out).aux = target;
    return out;
  }

  /// sum_i coeffs[i] * scalars[i].
  Var linear_combination(std::span<const Var> scalars, std::span<const Real> coeffs) {
    V y = V::Zero(1);
    for (std::size_t i = 0; i < scalars.size(); ++i) y(0) += coeffs[i] * scalar(scalars[i]);
    Var out = push(Op::kCombine, std::move(y));
    node(out).many.assign(scalars.begin(), scalars.end());
    node(out).extra = Eigen::Map<const V>(coeffs.data(), static_cast<Index>(coeffs.size()));
    return out;
  }

  /// Accumulates d(seed * root)/d(param) into `grads`.
  void backward(Var root, Gradients<Real>& grads, Real seed = 1) {
    for (auto& n : nodes_) n.grad.setZero(n.value.size());
    nodes_[root.id].grad.setConstant(seed);
    for (std::size_t i = root.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (n.grad.isZero(0)) continue;
      const V& g = n.grad;
      switch (n.op) {
        case Op::kInput:
          break;
        case Op::kEmbed:
          grads[n.p1].row(n.aux) += g.transpose();
          break;
        case Op::kAffine: {
          const auto& W = param(n.p1).value;
          grads[n.p1].noalias() += g * value(Var{n.a}).transpose();
          if (n.has_p2) grads[n.p2].col(0) += g;
          nodes_[n.a].grad.noalias() += W.transpose() * g;
          break;
        }
        case Op::kAffineT: {
          const auto& W = param(n.p1).value;
          grads[n.p1].noalias() += value(Var{n.a}) * g.transpose();
          nodes_[n.a].grad.noalias() += W * g;
          break;
        }
        case Op::kConcat: {
          Index off = 0;
          for (auto p : n.many) {
            const Index len = nodes_[p.id].value.size();
            nodes_[p.id].grad += g.segment(off, len);
            off += len;
          }
          break;
        }
        case Op::kSlice:
          nodes_[n.a].grad.segment(n.aux, g.size()) += g;
          break;
        case Op::kAdd:
          nodes_[n.a].grad += g;
          nodes_[n.b].grad += g;
          break;
        case Op::kMul:
          nodes_[n.a].grad += g.cwiseProduct(nodes_[n.b].value);
          nodes_[n.b].grad += g.cwiseProduct(nodes_[n.a].value);
          break;
        case Op::kSigmoid:
          nodes_[n.a].grad.array() += g.array() * n.value.array() * (Real(1) - n.value.array());
          break;
        case Op::kTanh:
          nodes_[n.a].grad.array() += g.array() * (Real(1) - n.value.array().square());
          break;
        case Op::kMask:
          nodes_[n.a].grad += g.cwiseProduct(n.extra);
          break;
        case Op::kDot:
          nodes_[n.a].grad += g(0) * nodes_[n.b].value;
          nodes_[n.b].grad += g(0) * nodes_[n.a].value;
          break;
        case Op::kSoftmax: {
          const Real gy = g.dot(n.value);
          nodes_[n.a].grad.array() += n.value.array() * (g.array() - gy);
          break;
        }
        case Op::kWeightedSum: {
          const auto& w = nodes_[n.a].value;
          for (std::size_t j = 0; j < n.many.size(); ++j) {
            Node& part = nodes_[n.many[j].id];
            nodes_[n.a].grad(static_cast<Index>(j)) += g.dot(part.value);
            part.grad += w(static_cast<Index>(j)) * g;
          }
          break;
        }
        case Op::kNll: {
          V d = n.extra;
          d(n.aux) -= Real(1);
          nodes_[n.a].grad += g(0) * d;
          break;
        }
        case Op::kCombine:
          for (std::size_t j = 0; j < n.many.size(); ++j) {
            nodes_[n.many[j].id].grad(0) += g(0) * n.extra(static_cast<Index>(j));
          }
          break;
      }
    }
  }

  static V softmax_of(const V& x) {
    V e = (x.array() - x.maxCoeff()).exp().matrix();
    return e / e.sum();
  }

  static Real log_softmax_at(const V& x, Index target) {
    const Real m = x.maxCoeff();
    const Real lse = m + std::log((x.array() - m).exp().sum());
    return x(target) - lse;
  }

 private:
  enum class Op : std::uint8_t {
    kInput, kEmbed, kAffine, kAffineT, kConcat, kSlice, kAdd, kMul, kSigmoid, kTanh,
    kMask, kDot, kSoftmax, kWeightedSum, kNll, kCombine,
  };

  struct Node {
    Op op;
    V value;
    V grad;
    std::uint32_t a = 0, b = 0;
    Index aux = 0;
    ParamId p1{}, p2{};
    bool has_p2 = false;
    std::vector<Var> many;
    V extra;
  };

  const Parameter<Real>& param(ParamId id) const { return (*params_)[id]; }
  Node& node(Var v) { return nodes_[v.id]; }

  Var push(Op op, V value, Var a = {}, Var b = {}) {
    Node n;
    n.op = op;
    n.value = std::move(value);
    n.a = a.id;
    n.b = b.id;
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
  }

  const ParameterSet<Real>* params_;
  std::vector<Node> nodes_;
};

}  // namespace editnts::ad
