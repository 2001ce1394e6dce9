#include "moltx/tape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "moltx/kernels.hpp"
#include "moltx/params.hpp"

namespace moltx {

namespace {

double sigmoid_stable(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double clamp01(double x, double eps) {
  return std::min(std::max(x, eps), 1.0 - eps);
}

}  // namespace

int Value::rows() const { return tape_->rows_of(*this); }
int Value::cols() const { return tape_->cols_of(*this); }
int Value::size() const { return rows() * cols(); }
const std::vector<double>& Value::data() const { return tape_->data_of(*this); }

double Value::scalar() const {
  const auto& d = data();
  if (d.size() != 1) throw ShapeMismatch("scalar() on non-scalar value");
  return d[0];
}

const Tape::Node& Tape::node(Value v) const {
  if (v.tape() != this) throw Error("value belongs to a different tape");
  return nodes_[static_cast<std::size_t>(v.id())];
}

const std::vector<double>& Tape::data_of(Value v) const { return node(v).x; }
const std::vector<double>& Tape::grad_of(Value v) const { return node(v).g; }
int Tape::rows_of(Value v) const { return node(v).rows; }
int Tape::cols_of(Value v) const { return node(v).cols; }

int Tape::push(Op op, int rows, int cols, std::vector<int> in) {
  Node n;
  n.op = op;
  n.rows = rows;
  n.cols = cols;
  n.x.resize(static_cast<std::size_t>(rows) * cols);
  n.in = std::move(in);
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check_same_shape(Value a, Value b, const char* what) const {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeMismatch(std::string(what) + ": " + std::to_string(a.rows()) +
                        "x" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.rows()) + "x" +
                        std::to_string(b.cols()));
}

Value Tape::constant(Tensor t) {
  const int id = push(Op::kConst, t.rows, t.cols, {});
  nodes_[id].x = std::move(t.v);
  return make(id);
}

Value Tape::constant(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  const int id = push(Op::kConst, n, 1, {});
  nodes_[id].x = std::move(v);
  return make(id);
}

Value Tape::scalar(double x) {
  const int id = push(Op::kConst, 1, 1, {});
  nodes_[id].x[0] = x;
  return make(id);
}

Value Tape::leaf(Param& p) {
  const int id = push(Op::kLeaf, p.value.rows, p.value.cols, {});
  nodes_[id].x = p.value.v;
  nodes_[id].param = &p;
  return make(id);
}

Value Tape::dense(Value x, Value W, Value b) {
  if (x.cols() != 1) throw ShapeMismatch("dense: x must be a column vector");
  if (W.cols() != x.rows())
    throw ShapeMismatch("dense: W cols " + std::to_string(W.cols()) +
                        " vs x rows " + std::to_string(x.rows()));
  const int m = W.rows();
  std::vector<int> in = {x.id(), W.id()};
  if (b.valid()) {
    if (b.rows() != m || b.cols() != 1)
      throw ShapeMismatch("dense: bias shape");
    in.push_back(b.id());
  }
  const int id = push(Op::kDense, m, 1, std::move(in));
  Node& n = nodes_[id];
  const auto& k = kernels::ops();
  k.matvec(nodes_[W.id()].x.data(), nodes_[x.id()].x.data(), n.x.data(),
           static_cast<std::size_t>(m), static_cast<std::size_t>(x.rows()));
  if (b.valid())
    k.axpy(1.0, nodes_[b.id()].x.data(), n.x.data(),
           static_cast<std::size_t>(m));
  return make(id);
}

Value Tape::dense(Value x, Value W) { return dense(x, W, Value()); }

Value Tape::relu(Value x) {
  const int id = push(Op::kRelu, x.rows(), x.cols(), {x.id()});
  Node& n = nodes_[id];
  kernels::ops().relu(nodes_[x.id()].x.data(), n.x.data(), n.x.size());
  return make(id);
}

Value Tape::sigmoid(Value x) {
  const int id = push(Op::kSigmoid, x.rows(), x.cols(), {x.id()});
  Node& n = nodes_[id];
  const auto& xs = nodes_[x.id()].x;
  for (std::size_t i = 0; i < xs.size(); ++i) n.x[i] = sigmoid_stable(xs[i]);
  return make(id);
}

Value Tape::softmax(Value x) {
  const int id = push(Op::kSoftmax, x.rows(), x.cols(), {x.id()});
  Node& n = nodes_[id];
  const auto& xs = nodes_[x.id()].x;
  const double mx = *std::max_element(xs.begin(), xs.end());
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    n.x[i] = std::exp(xs[i] - mx);
    total += n.x[i];
  }
  for (auto& v : n.x) v /= total;
  return make(id);
}

Value Tape::concat(Value a, Value b) {
  const Value pair[] = {a, b};
  return concat(pair);
}

Value Tape::concat(std::span<const Value> xs) {
  if (xs.empty()) throw ShapeMismatch("concat: empty list");
  int total = 0;
  std::vector<int> in;
  in.reserve(xs.size());
  for (const Value& v : xs) {
    if (v.cols() != 1) throw ShapeMismatch("concat: vector inputs only");
    total += v.rows();
    in.push_back(v.id());
  }
  const int id = push(Op::kConcat, total, 1, std::move(in));
  Node& n = nodes_[id];
  std::size_t off = 0;
  for (const Value& v : xs) {
    const auto& src = nodes_[v.id()].x;
    std::copy(src.begin(), src.end(), n.x.begin() + off);
    off += src.size();
  }
  return make(id);
}

Value Tape::sum(std::span<const Value> xs) {
  if (xs.empty()) throw ShapeMismatch("sum: empty list");
  std::vector<int> in;
  in.reserve(xs.size());
  for (const Value& v : xs) {
    check_same_shape(xs[0], v, "sum");
    in.push_back(v.id());
  }
  const int id = push(Op::kSumList, xs[0].rows(), xs[0].cols(), std::move(in));
  Node& n = nodes_[id];
  for (const Value& v : xs)
    kernels::ops().axpy(1.0, nodes_[v.id()].x.data(), n.x.data(), n.x.size());
  return make(id);
}

Value Tape::mean(std::span<const Value> xs) {
  if (xs.empty()) throw ShapeMismatch("mean: empty list");
  std::vector<int> in;
  in.reserve(xs.size());
  for (const Value& v : xs) {
    check_same_shape(xs[0], v, "mean");
    in.push_back(v.id());
  }
  const int id = push(Op::kMeanList, xs[0].rows(), xs[0].cols(), std::move(in));
  Node& n = nodes_[id];
  const double inv = 1.0 / static_cast<double>(xs.size());
  for (const Value& v : xs)
    kernels::ops().axpy(inv, nodes_[v.id()].x.data(), n.x.data(), n.x.size());
  return make(id);
}

Value Tape::add(Value a, Value b) {
  check_same_shape(a, b, "add");
  const int id = push(Op::kAdd, a.rows(), a.cols(), {a.id(), b.id()});
  Node& n = nodes_[id];
  kernels::ops().add(nodes_[a.id()].x.data(), nodes_[b.id()].x.data(),
                     n.x.data(), n.x.size());
  return make(id);
}

Value Tape::sub(Value a, Value b) {
  check_same_shape(a, b, "sub");
  const int id = push(Op::kSub, a.rows(), a.cols(), {a.id(), b.id()});
  Node& n = nodes_[id];
  const auto& av = nodes_[a.id()].x;
  const auto& bv = nodes_[b.id()].x;
  for (std::size_t i = 0; i < n.x.size(); ++i) n.x[i] = av[i] - bv[i];
  return make(id);
}

Value Tape::mul(Value a, Value b) {
  check_same_shape(a, b, "mul");
  const int id = push(Op::kMul, a.rows(), a.cols(), {a.id(), b.id()});
  Node& n = nodes_[id];
  kernels::ops().mul(nodes_[a.id()].x.data(), nodes_[b.id()].x.data(),
                     n.x.data(), n.x.size());
  return make(id);
}

Value Tape::scalar_mul(Value x, Value s) {
  if (s.size() != 1) throw ShapeMismatch("scalar_mul: s must be scalar");
  const int id = push(Op::kScalarMul, x.rows(), x.cols(), {x.id(), s.id()});
  Node& n = nodes_[id];
  kernels::ops().scale(nodes_[x.id()].x.data(), nodes_[s.id()].x[0],
                       n.x.data(), n.x.size());
  return make(id);
}

Value Tape::add_const(Value x, double c) {
  const int id = push(Op::kAddConst, x.rows(), x.cols(), {x.id()});
  Node& n = nodes_[id];
  n.aux = c;
  const auto& xs = nodes_[x.id()].x;
  for (std::size_t i = 0; i < xs.size(); ++i) n.x[i] = xs[i] + c;
  return make(id);
}

Value Tape::scale(Value x, double c) {
  const int id = push(Op::kScaleConst, x.rows(), x.cols(), {x.id()});
  Node& n = nodes_[id];
  n.aux = c;
  kernels::ops().scale(nodes_[x.id()].x.data(), c, n.x.data(), n.x.size());
  return make(id);
}

Value Tape::log_clamped(Value x, double eps) {
  const int id = push(Op::kLogClamped, x.rows(), x.cols(), {x.id()});
  Node& n = nodes_[id];
  n.aux = eps;
  const auto& xs = nodes_[x.id()].x;
  for (std::size_t i = 0; i < xs.size(); ++i)
    n.x[i] = std::log(clamp01(xs[i], eps));
  return make(id);
}

Value Tape::log1m_clamped(Value x, double eps) {
  const int id = push(Op::kLog1mClamped, x.rows(), x.cols(), {x.id()});
  Node& n = nodes_[id];
  n.aux = eps;
  const auto& xs = nodes_[x.id()].x;
  for (std::size_t i = 0; i < xs.size(); ++i)
    n.x[i] = std::log(1.0 - clamp01(xs[i], eps));
  return make(id);
}

Value Tape::binary_entropy(Value p, double eps) {
  const int id = push(Op::kBinaryEntropy, p.rows(), p.cols(), {p.id()});
  Node& n = nodes_[id];
  n.aux = eps;
  const auto& ps = nodes_[p.id()].x;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const double q = clamp01(ps[i], eps);
    n.x[i] = -q * std::log(q) - (1.0 - q) * std::log(1.0 - q);
  }
  return make(id);
}

Value Tape::softplus_of_neg(Value m) {
  const int id = push(Op::kSoftplusNeg, m.rows(), m.cols(), {m.id()});
  Node& n = nodes_[id];
  const auto& ms = nodes_[m.id()].x;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    // log(1 + exp(-m)) without overflow for large |m|.
    const double x = -ms[i];
    n.x[i] = x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
  }
  return make(id);
}

Value Tape::index(Value v, int i) {
  if (i < 0 || i >= v.size()) throw ShapeMismatch("index: out of range");
  const int id = push(Op::kIndex, 1, 1, {v.id()});
  Node& n = nodes_[id];
  n.aux_i = i;
  n.x[0] = nodes_[v.id()].x[static_cast<std::size_t>(i)];
  return make(id);
}

Value Tape::reduce_sum(Value x) {
  const int id = push(Op::kReduceSum, 1, 1, {x.id()});
  Node& n = nodes_[id];
  const auto& xs = nodes_[x.id()].x;
  n.x[0] = kernels::ops().sum(xs.data(), xs.size());
  return make(id);
}

Value Tape::reduce_mean(Value x) {
  const int id = push(Op::kReduceMean, 1, 1, {x.id()});
  Node& n = nodes_[id];
  const auto& xs = nodes_[x.id()].x;
  n.x[0] = kernels::ops().sum(xs.data(), xs.size()) /
           static_cast<double>(xs.size());
  return make(id);
}

Value Tape::squared_norm(Value x) {
  const int id = push(Op::kSquaredNorm, 1, 1, {x.id()});
  Node& n = nodes_[id];
  const auto& xs = nodes_[x.id()].x;
  n.x[0] = kernels::ops().dot(xs.data(), xs.data(), xs.size());
  return make(id);
}

Value Tape::grad_reverse(Value x) {
  const int id = push(Op::kGradReverse, x.rows(), x.cols(), {x.id()});
  nodes_[id].x = nodes_[x.id()].x;
  return make(id);
}

Value Tape::detach(Value x) {
  const int id = push(Op::kDetach, x.rows(), x.cols(), {x.id()});
  nodes_[id].x = nodes_[x.id()].x;
  return make(id);
}

void Tape::backward(Value loss) {
  const Node& ln = node(loss);
  if (ln.x.size() != 1) throw NonScalarLoss("backward: loss must be scalar");

  for (Node& n : nodes_) n.g.assign(n.x.size(), 0.0);
  nodes_[loss.id()].g[0] = 1.0;

  const auto& k = kernels::ops();
  for (int i = static_cast<int>(nodes_.size()) - 1; i >= 0; --i) {
    Node& n = nodes_[i];
    const std::size_t sz = n.x.size();
    switch (n.op) {
      case Op::kLeaf:
      case Op::kConst:
        break;
      case Op::kDense: {
        Node& x = nodes_[n.in[0]];
        Node& W = nodes_[n.in[1]];
        const std::size_t m = static_cast<std::size_t>(n.rows);
        const std::size_t cols = x.x.size();
        k.matvec_t_acc(W.x.data(), n.g.data(), x.g.data(), m, cols);
        k.ger_acc(n.g.data(), x.x.data(), W.g.data(), m, cols);
        if (n.in.size() == 3)
          k.axpy(1.0, n.g.data(), nodes_[n.in[2]].g.data(), m);
        break;
      }
      case Op::kRelu:
        k.relu_grad_acc(n.x.data(), n.g.data(), nodes_[n.in[0]].g.data(), sz);
        break;
      case Op::kSigmoid: {
        Node& x = nodes_[n.in[0]];
        for (std::size_t j = 0; j < sz; ++j)
          x.g[j] += n.g[j] * n.x[j] * (1.0 - n.x[j]);
        break;
      }
      case Op::kSoftmax: {
        Node& x = nodes_[n.in[0]];
        const double gy_dot_y = k.dot(n.g.data(), n.x.data(), sz);
        for (std::size_t j = 0; j < sz; ++j)
          x.g[j] += n.x[j] * (n.g[j] - gy_dot_y);
        break;
      }
      case Op::kConcat: {
        std::size_t off = 0;
        for (int src : n.in) {
          Node& s = nodes_[src];
          k.axpy(1.0, n.g.data() + off, s.g.data(), s.x.size());
          off += s.x.size();
        }
        break;
      }
      case Op::kSumList:
        for (int src : n.in)
          k.axpy(1.0, n.g.data(), nodes_[src].g.data(), sz);
        break;
      case Op::kMeanList: {
        const double inv = 1.0 / static_cast<double>(n.in.size());
        for (int src : n.in)
          k.axpy(inv, n.g.data(), nodes_[src].g.data(), sz);
        break;
      }
      case Op::kAdd:
        k.axpy(1.0, n.g.data(), nodes_[n.in[0]].g.data(), sz);
        k.axpy(1.0, n.g.data(), nodes_[n.in[1]].g.data(), sz);
        break;
      case Op::kSub:
        k.axpy(1.0, n.g.data(), nodes_[n.in[0]].g.data(), sz);
        k.axpy(-1.0, n.g.data(), nodes_[n.in[1]].g.data(), sz);
        break;
      case Op::kMul:
        k.mul_acc(n.g.data(), nodes_[n.in[1]].x.data(),
                  nodes_[n.in[0]].g.data(), sz);
        k.mul_acc(n.g.data(), nodes_[n.in[0]].x.data(),
                  nodes_[n.in[1]].g.data(), sz);
        break;
      case Op::kScalarMul: {
        Node& x = nodes_[n.in[0]];
        Node& s = nodes_[n.in[1]];
        k.axpy(s.x[0], n.g.data(), x.g.data(), sz);
        s.g[0] += k.dot(x.x.data(), n.g.data(), sz);
        break;
      }
      case Op::kAddConst:
        k.axpy(1.0, n.g.data(), nodes_[n.in[0]].g.data(), sz);
        break;
      case Op::kScaleConst:
        k.axpy(n.aux, n.g.data(), nodes_[n.in[0]].g.data(), sz);
        break;
      case Op::kLogClamped: {
        Node& x = nodes_[n.in[0]];
        for (std::size_t j = 0; j < sz; ++j) {
          const double v = x.x[j];
          if (v > n.aux && v < 1.0 - n.aux) x.g[j] += n.g[j] / v;
        }
        break;
      }
      case Op::kLog1mClamped: {
        Node& x = nodes_[n.in[0]];
        for (std::size_t j = 0; j < sz; ++j) {
          const double v = x.x[j];
          if (v > n.aux && v < 1.0 - n.aux) x.g[j] -= n.g[j] / (1.0 - v);
        }
        break;
      }
      case Op::kBinaryEntropy: {
        Node& x = nodes_[n.in[0]];
        for (std::size_t j = 0; j < sz; ++j) {
          const double v = x.x[j];
          if (v > n.aux && v < 1.0 - n.aux)
            x.g[j] += n.g[j] * std::log((1.0 - v) / v);
        }
        break;
      }
      case Op::kSoftplusNeg: {
        Node& x = nodes_[n.in[0]];
        for (std::size_t j = 0; j < sz; ++j)
          x.g[j] -= n.g[j] * sigmoid_stable(-x.x[j]);
        break;
      }
      case Op::kIndex:
        nodes_[n.in[0]].g[static_cast<std::size_t>(n.aux_i)] += n.g[0];
        break;
      case Op::kReduceSum: {
        Node& x = nodes_[n.in[0]];
        const double g = n.g[0];
        for (std::size_t j = 0; j < x.g.size(); ++j) x.g[j] += g;
        break;
      }
      case Op::kReduceMean: {
        Node& x = nodes_[n.in[0]];
        const double g = n.g[0] / static_cast<double>(x.g.size());
        for (std::size_t j = 0; j < x.g.size(); ++j) x.g[j] += g;
        break;
      }
      case Op::kSquaredNorm: {
        Node& x = nodes_[n.in[0]];
        k.axpy(2.0 * n.g[0], x.x.data(), x.g.data(), x.g.size());
        break;
      }
      case Op::kGradReverse:
        k.axpy(-1.0, n.g.data(), nodes_[n.in[0]].g.data(), sz);
        break;
      case Op::kDetach:
        break;
    }
  }

  for (Node& n : nodes_) {
    if (n.op == Op::kLeaf && n.param != nullptr)
      kernels::ops().axpy(1.0, n.g.data(), n.param->grad.v.data(),
                          n.g.size());
  }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace moltx
