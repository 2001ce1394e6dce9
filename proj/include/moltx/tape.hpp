#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "moltx/error.hpp"
#include "moltx/tensor.hpp"

namespace moltx {

struct Param;
class Tape;

// Handle to a node on a Tape. Cheap to copy; valid until the tape is cleared.
class Value {
 public:
  Value() = default;
  Value(Tape* t, int id) : tape_(t), id_(id) {}

  bool valid() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

  int rows() const;
  int cols() const;
  int size() const;
  const std::vector<double>& data() const;
  double scalar() const;  // requires size() == 1

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode differentiation over dense f64 arrays (rank <= 2).
// Nodes are appended in topological order by construction; backward()
// sweeps them once in reverse and deposits leaf gradients into the
// ParamSet entries they were created from.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Value constant(Tensor t);
  Value constant(std::vector<double> v);
  Value constant(std::initializer_list<double> v) {
    return constant(std::vector<double>(v));
  }
  Value scalar(double x);
  Value leaf(Param& p);

  // y = W x + b; pass bias() == false Value to omit the bias term.
  Value dense(Value x, Value W, Value b);
  Value dense(Value x, Value W);

  Value relu(Value x);
  Value sigmoid(Value x);
  Value softmax(Value x);
  Value concat(Value a, Value b);
  Value concat(std::span<const Value> xs);
  Value sum(std::span<const Value> xs);   // elementwise over same-shape list
  Value mean(std::span<const Value> xs);
  Value add(Value a, Value b);
  Value sub(Value a, Value b);
  Value mul(Value a, Value b);            // elementwise
  Value scalar_mul(Value x, Value s);     // s is a scalar node, broadcast
  Value add_const(Value x, double c);
  Value scale(Value x, double c);
  Value log_clamped(Value x, double eps = 1e-7);
  Value log1m_clamped(Value x, double eps = 1e-7);
  Value binary_entropy(Value p, double eps = 1e-7);
  Value softplus_of_neg(Value margin);    // log(1 + exp(-m)), stable
  Value index(Value v, int i);            // -> scalar
  Value reduce_sum(Value x);
  Value reduce_mean(Value x);
  Value squared_norm(Value x);            // -> scalar sum of squares

  // Identity forward; backward multiplies the incoming gradient by -1.
  Value grad_reverse(Value x);
  // Identity forward; backward stops here.
  Value detach(Value x);

  // Accumulates d(loss)/d(leaf) into each originating Param's grad.
  void backward(Value loss);

  void clear();
  std::size_t size() const { return nodes_.size(); }

  const std::vector<double>& data_of(Value v) const;
  const std::vector<double>& grad_of(Value v) const;
  int rows_of(Value v) const;
  int cols_of(Value v) const;

 private:
  enum class Op : std::uint8_t {
    kLeaf, kConst, kDense, kRelu, kSigmoid, kSoftmax, kConcat,
    kSumList, kMeanList, kAdd, kSub, kMul, kScalarMul, kAddConst,
    kScaleConst, kLogClamped, kLog1mClamped, kBinaryEntropy,
    kSoftplusNeg, kIndex, kReduceSum, kReduceMean, kSquaredNorm,
    kGradReverse, kDetach,
  };

  struct Node {
    Op op;
    int rows, cols;
    std::vector<double> x;    // forward data
    std::vector<double> g;    // adjoint, same shape
    std::vector<int> in;
    double aux = 0.0;
    int aux_i = 0;
    Param* param = nullptr;   // leaf gradient sink
  };

  int push(Op op, int rows, int cols, std::vector<int> in);
  Value make(int id) { return Value(this, id); }
  const Node& node(Value v) const;
  void check_same_shape(Value a, Value b, const char* what) const;

  std::vector<Node> nodes_;

  friend class Value;
};

}  // namespace moltx
