#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <deque>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace lggan::ad {

// Reverse-mode differentiation over dense double matrices. Scalars are 1x1.
// Every primitive's vector-Jacobian product is itself expressible in the
// primitive set, so gradients can be recorded on the tape and differentiated
// again (the gradient penalty needs d/dtheta of ||d critic / d input||).

using Matrix = Eigen::MatrixXd;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  Sub,
  Mul,         // elementwise
  Scale,       // by constant attrs.scalar
  Relu,
  Sigmoid,
  Tanh,
  RowSoftmax,
  LogSoftmax,  // row-wise, numerically stable
  Sum,
  Mean,
  Norm,        // sqrt(sum x^2 + kNormEpsilon)
  ConcatCols,
  ConcatRows,
  MaxPool,     // elementwise max over equally shaped inputs
  Transpose,
  AddRow,      // matrix + broadcast row vector
  Pow,         // elementwise x^attrs.scalar
  Log,
  Clamp,       // to [attrs.lo, attrs.hi]
};

const char* op_name(Op op);

inline constexpr double kNormEpsilon = 1e-12;

struct Attrs {
  double scalar = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, int id) : tape_(tape), id_(id) {}

  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }
  const Matrix& value() const;
  double scalar() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Dense gradients of one backward pass, indexed by node id.
class Gradients {
 public:
  explicit Gradients(const Tape& tape);
  // Zero matrix when the node does not influence the output.
  Matrix operator[](Var v) const;
  bool contains(Var v) const;

 private:
  friend class Tape;
  const Tape* tape_;
  std::vector<Matrix> grads_;
  std::vector<bool> present_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value, bool requires_grad = true);
  Var constant(Matrix value) { return leaf(std::move(value), false); }
  Var constant(double value) { return leaf(Matrix::Constant(1, 1, value), false); }

  Var apply(Op op, std::span<const Var> inputs, Attrs attrs = {});
  Var apply(Op op, std::initializer_list<Var> inputs, Attrs attrs = {}) {
    return apply(op, std::span<const Var>(inputs.begin(), inputs.size()), attrs);
  }

  const Matrix& value(int id) const { return nodes_[id].value; }
  bool requires_grad(int id) const { return nodes_[id].requires_grad; }
  bool is_leaf(int id) const { return nodes_[id].op == Op::Leaf; }
  Op op(int id) const { return nodes_[id].op; }
  const std::vector<int>& inputs(int id) const { return nodes_[id].inputs; }
  std::size_t size() const { return nodes_.size(); }

  // Numeric reverse pass from a 1x1 output. Nothing is recorded.
  Gradients backward(Var output) const;

  // Recorded reverse pass: returns gradient nodes d output / d wrt[k] that
  // live on this tape and can be differentiated further.
  std::vector<Var> grad(Var output, std::span<const Var> wrt);

  // sqrt(sum_k ||d output / d wrt[k]||^2 + kNormEpsilon) as a tape node.
  Var grad_norm(Var output, std::span<const Var> wrt);
  Var grad_norm(Var output, Var wrt) { return grad_norm(output, std::span<const Var>(&wrt, 1)); }

 private:
  struct Node {
    Op op;
    std::vector<int> inputs;
    Attrs attrs;
    Matrix value;
    bool requires_grad;
  };

  void check_owned(Var v) const;
  Matrix forward(Op op, const std::vector<int>& in, const Attrs& a) const;
  Matrix vjp_value(int id, const Matrix& g, std::size_t k) const;
  Var vjp_node(int id, Var g, std::size_t k);

  std::deque<Node> nodes_;
};

std::string shape_string(const Matrix& m);

// Primitive wrappers.
Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double s);
Var relu(Var a);
Var sigmoid(Var a);
Var tanh(Var a);
Var row_softmax(Var a);
Var log_softmax(Var a);
Var sum(Var a);
Var mean(Var a);
Var norm(Var a);
Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var max_pool(std::span<const Var> parts);
Var transpose(Var a);
Var add_row(Var a, Var row);
Var pow(Var a, double exponent);
Var log(Var a);
Var clamp(Var a, double lo, double hi);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator-(Var a) { return scale(a, -1.0); }

// a + c elementwise, for a constant c.
Var add_constant(Var a, double c);
// Scalar (1x1) broadcast to rows x cols through matmuls with ones.
Var broadcast(Var scalar, Eigen::Index rows, Eigen::Index cols);

}  // namespace lggan::ad
