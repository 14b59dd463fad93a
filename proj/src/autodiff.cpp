#include "lggan/autodiff.hpp"

#include <algorithm>
#include <cmath>

namespace lggan::ad {

const char* op_name(Op op) {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "subtract";
    case Op::Mul: return "multiply";
    case Op::Scale: return "scale";
    case Op::Relu: return "relu";
    case Op::Sigmoid: return "sigmoid";
    case Op::Tanh: return "tanh";
    case Op::RowSoftmax: return "row_softmax";
    case Op::LogSoftmax: return "log_softmax";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::Norm: return "norm";
    case Op::ConcatCols: return "concat_cols";
    case Op::ConcatRows: return "concat_rows";
    case Op::MaxPool: return "max_pool";
    case Op::Transpose: return "transpose";
    case Op::AddRow: return "add_row";
    case Op::Pow: return "pow";
    case Op::Log: return "log";
    case Op::Clamp: return "clamp";
  }
  return "?";
}

std::string shape_string(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

const Matrix& Var::value() const { return tape_->value(id_); }

double Var::scalar() const {
  const Matrix& v = value();
  if (v.size() != 1) throw ShapeError("expected scalar, got " + shape_string(v));
  return v(0, 0);
}

Gradients::Gradients(const Tape& tape)
    : tape_(&tape), grads_(tape.size()), present_(tape.size(), false) {}

Matrix Gradients::operator[](Var v) const {
  if (v.id() >= 0 && v.id() < static_cast<int>(present_.size()) && present_[v.id()])
    return grads_[v.id()];
  const Matrix& val = tape_->value(v.id());
  return Matrix::Zero(val.rows(), val.cols());
}

bool Gradients::contains(Var v) const {
  return v.id() >= 0 && v.id() < static_cast<int>(present_.size()) && present_[v.id()];
}

namespace {

void require_same_shape(Op op, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError(std::string(op_name(op)) + ": shape mismatch " + shape_string(a) + " vs " +
                     shape_string(b));
}

void require_arity(Op op, std::size_t got, std::size_t want) {
  if (got != want)
    throw ShapeError(std::string(op_name(op)) + ": expected " + std::to_string(want) +
                     " inputs, got " + std::to_string(got));
}

Matrix first_max_mask(const std::vector<const Matrix*>& parts, std::size_t k) {
  const Matrix& target = *parts[k];
  Matrix mask = Matrix::Zero(target.rows(), target.cols());
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    std::size_t best = 0;
    for (std::size_t p = 1; p < parts.size(); ++p)
      if (parts[p]->data()[i] > parts[best]->data()[i]) best = p;
    if (best == k) mask.data()[i] = 1.0;
  }
  return mask;
}

}  // namespace

void Tape::check_owned(Var v) const {
  if (v.tape() != this || v.id() < 0 || v.id() >= static_cast<int>(nodes_.size()))
    throw std::invalid_argument("variable does not belong to this tape");
}

Var Tape::leaf(Matrix value, bool requires_grad) {
  if (!value.allFinite()) throw NumericError("leaf value is not finite");
  nodes_.push_back(Node{Op::Leaf, {}, {}, std::move(value), requires_grad});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Var Tape::apply(Op op, std::span<const Var> inputs, Attrs attrs) {
  if (op == Op::Leaf) throw std::invalid_argument("use Tape::leaf for leaves");
  std::vector<int> ids;
  ids.reserve(inputs.size());
  bool grad = false;
  for (Var v : inputs) {
    check_owned(v);
    ids.push_back(v.id());
    grad = grad || nodes_[v.id()].requires_grad;
  }
  Matrix out = forward(op, ids, attrs);
  if (!out.allFinite())
    throw NumericError(std::string("non-finite output from ") + op_name(op));
  nodes_.push_back(Node{op, std::move(ids), attrs, std::move(out), grad});
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Matrix Tape::forward(Op op, const std::vector<int>& in, const Attrs& a) const {
  auto v = [&](std::size_t k) -> const Matrix& { return nodes_[in[k]].value; };
  switch (op) {
    case Op::Leaf:
      break;
    case Op::MatMul: {
      require_arity(op, in.size(), 2);
      if (v(0).cols() != v(1).rows())
        throw ShapeError("matmul: shape mismatch " + shape_string(v(0)) + " x " +
                         shape_string(v(1)));
      Matrix out(v(0).rows(), v(1).cols());
      out.noalias() = v(0) * v(1);
      return out;
    }
    case Op::Add:
    case Op::Sub:
    case Op::Mul: {
      require_arity(op, in.size(), 2);
      require_same_shape(op, v(0), v(1));
      if (op == Op::Add) return v(0) + v(1);
      if (op == Op::Sub) return v(0) - v(1);
      return v(0).cwiseProduct(v(1));
    }
    case Op::Scale:
      require_arity(op, in.size(), 1);
      return a.scalar * v(0);
    case Op::Relu:
      require_arity(op, in.size(), 1);
      return v(0).cwiseMax(0.0);
    case Op::Sigmoid:
      require_arity(op, in.size(), 1);
      return v(0).unaryExpr([](double x) {
        return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
      });
    case Op::Tanh:
      require_arity(op, in.size(), 1);
      return v(0).array().tanh().matrix();
    case Op::RowSoftmax: {
      require_arity(op, in.size(), 1);
      Matrix out = v(0);
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        double m = out.row(r).maxCoeff();
        out.row(r) = (out.row(r).array() - m).exp().matrix();
        out.row(r) /= out.row(r).sum();
      }
      return out;
    }
    case Op::LogSoftmax: {
      require_arity(op, in.size(), 1);
      Matrix out = v(0);
      for (Eigen::Index r = 0; r < out.rows(); ++r) {
        double m = out.row(r).maxCoeff();
        double lse = m + std::log((out.row(r).array() - m).exp().sum());
        out.row(r).array() -= lse;
      }
      return out;
    }
    case Op::Sum:
      require_arity(op, in.size(), 1);
      return Matrix::Constant(1, 1, v(0).sum());
    case Op::Mean:
      require_arity(op, in.size(), 1);
      if (v(0).size() == 0) throw ShapeError("mean of empty tensor");
      return Matrix::Constant(1, 1, v(0).mean());
    case Op::Norm:
      require_arity(op, in.size(), 1);
      return Matrix::Constant(1, 1, std::sqrt(v(0).squaredNorm() + kNormEpsilon));
    case Op::ConcatCols:
    case Op::ConcatRows: {
      if (in.empty()) throw ShapeError(std::string(op_name(op)) + ": no inputs");
      const bool cols = op == Op::ConcatCols;
      Eigen::Index total = 0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        if (cols && v(k).rows() != v(0).rows())
          throw ShapeError("concat_cols: shape mismatch " + shape_string(v(0)) + " vs " +
                           shape_string(v(k)));
        if (!cols && v(k).cols() != v(0).cols())
          throw ShapeError("concat_rows: shape mismatch " + shape_string(v(0)) + " vs " +
                           shape_string(v(k)));
        total += cols ? v(k).cols() : v(k).rows();
      }
      Matrix out = cols ? Matrix(v(0).rows(), total) : Matrix(total, v(0).cols());
      Eigen::Index offset = 0;
      for (std::size_t k = 0; k < in.size(); ++k) {
        if (cols) {
          out.middleCols(offset, v(k).cols()) = v(k);
          offset += v(k).cols();
        } else {
          out.middleRows(offset, v(k).rows()) = v(k);
          offset += v(k).rows();
        }
      }
      return out;
    }
    case Op::MaxPool: {
      if (in.empty()) throw ShapeError("max_pool: no inputs");
      Matrix out = v(0);
      for (std::size_t k = 1; k < in.size(); ++k) {
        require_same_shape(op, v(0), v(k));
        out = out.cwiseMax(v(k));
      }
      return out;
    }
    case Op::Transpose:
      require_arity(op, in.size(), 1);
      return v(0).transpose();
    case Op::AddRow: {
      require_arity(op, in.size(), 2);
      if (v(1).rows() != 1 || v(1).cols() != v(0).cols())
        throw ShapeError("add_row: shape mismatch " + shape_string(v(0)) + " + row " +
                         shape_string(v(1)));
      Matrix out = v(0);
      out.rowwise() += v(1).row(0);
      return out;
    }
    case Op::Pow:
      require_arity(op, in.size(), 1);
      return v(0).array().pow(a.scalar).matrix();
    case Op::Log:
      require_arity(op, in.size(), 1);
      return v(0).array().log().matrix();
    case Op::Clamp:
      require_arity(op, in.size(), 1);
      return v(0).cwiseMax(a.lo).cwiseMin(a.hi);
  }
  throw std::logic_error("unhandled op");
}

Matrix Tape::vjp_value(int id, const Matrix& g, std::size_t k) const {
  const Node& n = nodes_[id];
  auto in = [&](std::size_t j) -> const Matrix& { return nodes_[n.inputs[j]].value; };
  const Matrix& y = n.value;
  switch (n.op) {
    case Op::Leaf:
      break;
    case Op::MatMul:
      return k == 0 ? Matrix(g * in(1).transpose()) : Matrix(in(0).transpose() * g);
    case Op::Add:
      return g;
    case Op::Sub:
      return k == 0 ? g : Matrix(-g);
    case Op::Mul:
      return g.cwiseProduct(in(1 - k));
    case Op::Scale:
      return n.attrs.scalar * g;
    case Op::Relu:
      return g.cwiseProduct(in(0).unaryExpr([](double x) { return x > 0 ? 1.0 : 0.0; }));
    case Op::Sigmoid:
      return g.cwiseProduct(y - y.cwiseProduct(y));
    case Op::Tanh:
      return g.cwiseProduct(Matrix((1.0 - y.array().square()).matrix()));
    case Op::RowSoftmax: {
      Eigen::VectorXd dots = g.cwiseProduct(y).rowwise().sum();
      Matrix centered = g;
      centered.colwise() -= dots;
      return y.cwiseProduct(centered);
    }
    case Op::LogSoftmax: {
      Eigen::VectorXd totals = g.rowwise().sum();
      Matrix probs = y.array().exp().matrix();
      return g - Matrix(probs.array().colwise() * totals.array());
    }
    case Op::Sum:
      return Matrix::Constant(in(0).rows(), in(0).cols(), g(0, 0));
    case Op::Mean:
      return Matrix::Constant(in(0).rows(), in(0).cols(),
                              g(0, 0) / static_cast<double>(in(0).size()));
    case Op::Norm:
      return (g(0, 0) / y(0, 0)) * in(0);
    case Op::ConcatCols:
    case Op::ConcatRows: {
      Eigen::Index offset = 0;
      const bool cols = n.op == Op::ConcatCols;
      for (std::size_t j = 0; j < k; ++j) offset += cols ? in(j).cols() : in(j).rows();
      return cols ? Matrix(g.middleCols(offset, in(k).cols()))
                  : Matrix(g.middleRows(offset, in(k).rows()));
    }
    case Op::MaxPool: {
      std::vector<const Matrix*> parts;
      for (std::size_t j = 0; j < n.inputs.size(); ++j) parts.push_back(&in(j));
      return g.cwiseProduct(first_max_mask(parts, k));
    }
    case Op::Transpose:
      return g.transpose();
    case Op::AddRow:
      return k == 0 ? g : Matrix(g.colwise().sum());
    case Op::Pow: {
      const double p = n.attrs.scalar;
      return g.cwiseProduct(Matrix((p * in(0).array().pow(p - 1.0)).matrix()));
    }
    case Op::Log:
      return g.cwiseQuotient(in(0));
    case Op::Clamp: {
      const double lo = n.attrs.lo, hi = n.attrs.hi;
      return g.cwiseProduct(
          in(0).unaryExpr([lo, hi](double x) { return x >= lo && x <= hi ? 1.0 : 0.0; }));
    }
  }
  throw std::logic_error("unhandled op");
}

Var Tape::vjp_node(int id, Var g, std::size_t k) {
  // Copies: the deque may grow while new nodes are recorded below.
  const Op op = nodes_[id].op;
  const std::vector<int> ids = nodes_[id].inputs;
  const Attrs attrs = nodes_[id].attrs;
  Var y(this, id);
  auto in = [&](std::size_t j) { return Var(this, ids[j]); };
  auto ones = [&](Eigen::Index r, Eigen::Index c) { return constant(Matrix::Ones(r, c)); };
  switch (op) {
    case Op::Leaf:
      break;
    case Op::MatMul:
      return k == 0 ? matmul(g, transpose(in(1))) : matmul(transpose(in(0)), g);
    case Op::Add:
      return g;
    case Op::Sub:
      return k == 0 ? g : scale(g, -1.0);
    case Op::Mul:
      return mul(g, in(1 - k));
    case Op::Scale:
      return scale(g, attrs.scalar);
    case Op::Relu:
      return mul(g, constant(value(ids[0]).unaryExpr([](double x) { return x > 0 ? 1.0 : 0.0; })));
    case Op::Sigmoid:
      return mul(g, sub(y, mul(y, y)));
    case Op::Tanh:
      return mul(g, sub(ones(y.rows(), y.cols()), mul(y, y)));
    case Op::RowSoftmax: {
      Var dots = matmul(mul(g, y), ones(y.cols(), 1));
      Var spread = matmul(dots, ones(1, y.cols()));
      return mul(y, sub(g, spread));
    }
    case Op::LogSoftmax: {
      Var probs = row_softmax(in(0));
      Var totals = matmul(matmul(g, ones(g.cols(), 1)), ones(1, g.cols()));
      return sub(g, mul(probs, totals));
    }
    case Op::Sum:
      return broadcast(g, in(0).rows(), in(0).cols());
    case Op::Mean:
      return scale(broadcast(g, in(0).rows(), in(0).cols()),
                   1.0 / static_cast<double>(value(ids[0]).size()));
    case Op::Norm: {
      Var ratio = mul(g, pow(y, -1.0));
      return mul(in(0), broadcast(ratio, in(0).rows(), in(0).cols()));
    }
    case Op::ConcatCols:
    case Op::ConcatRows: {
      const bool cols = op == Op::ConcatCols;
      Eigen::Index offset = 0;
      for (std::size_t j = 0; j < k; ++j)
        offset += cols ? value(ids[j]).cols() : value(ids[j]).rows();
      const Eigen::Index width = cols ? value(ids[k]).cols() : value(ids[k]).rows();
      const Eigen::Index total = cols ? g.cols() : g.rows();
      Matrix select = Matrix::Zero(total, width);
      for (Eigen::Index i = 0; i < width; ++i) select(offset + i, i) = 1.0;
      return cols ? matmul(g, constant(select)) : matmul(transpose(constant(select)), g);
    }
    case Op::MaxPool: {
      std::vector<const Matrix*> parts;
      for (int pid : ids) parts.push_back(&value(pid));
      return mul(g, constant(first_max_mask(parts, k)));
    }
    case Op::Transpose:
      return transpose(g);
    case Op::AddRow:
      return k == 0 ? g : matmul(ones(1, g.rows()), g);
    case Op::Pow: {
      const double p = attrs.scalar;
      return mul(g, scale(pow(in(0), p - 1.0), p));
    }
    case Op::Log:
      return mul(g, pow(in(0), -1.0));
    case Op::Clamp: {
      const double lo = attrs.lo, hi = attrs.hi;
      return mul(g, constant(value(ids[0]).unaryExpr(
                        [lo, hi](double x) { return x >= lo && x <= hi ? 1.0 : 0.0; })));
    }
  }
  throw std::logic_error("unhandled op");
}

Gradients Tape::backward(Var output) const {
  check_owned(output);
  if (value(output.id()).size() != 1)
    throw ShapeError("backward requires a scalar output, got " +
                     shape_string(value(output.id())));
  Gradients grads(*this);
  const int out = output.id();
  grads.grads_[out] = Matrix::Ones(1, 1);
  grads.present_[out] = true;
  for (int id = out; id >= 0; --id) {
    if (!grads.present_[id] || !nodes_[id].requires_grad) continue;
    const Node& n = nodes_[id];
    for (std::size_t k = 0; k < n.inputs.size(); ++k) {
      const int src = n.inputs[k];
      if (!nodes_[src].requires_grad) continue;
      Matrix contrib = vjp_value(id, grads.grads_[id], k);
      if (grads.present_[src]) {
        grads.grads_[src] += contrib;
      } else {
        grads.grads_[src] = std::move(contrib);
        grads.present_[src] = true;
      }
    }
  }
  return grads;
}

std::vector<Var> Tape::grad(Var output, std::span<const Var> wrt) {
  check_owned(output);
  if (value(output.id()).size() != 1)
    throw ShapeError("grad requires a scalar output, got " + shape_string(value(output.id())));
  const int out = output.id();

  // Nodes between wrt and output; only these carry recorded gradients.
  std::vector<bool> depends(out + 1, false);
  for (Var w : wrt) {
    check_owned(w);
    if (w.id() <= out) depends[w.id()] = true;
  }
  for (int id = 0; id <= out; ++id) {
    if (depends[id]) continue;
    for (int src : nodes_[id].inputs)
      if (depends[src]) {
        depends[id] = true;
        break;
      }
  }

  std::vector<Var> acc(out + 1);
  if (depends[out]) acc[out] = constant(1.0);
  for (int id = out; id >= 0; --id) {
    if (!acc[id].valid() || nodes_[id].op == Op::Leaf) continue;
    const std::vector<int> ids = nodes_[id].inputs;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (!depends[ids[k]]) continue;
      Var contrib = vjp_node(id, acc[id], k);
      acc[ids[k]] = acc[ids[k]].valid() ? add(acc[ids[k]], contrib) : contrib;
    }
  }

  std::vector<Var> result;
  result.reserve(wrt.size());
  for (Var w : wrt) {
    if (w.id() <= out && acc[w.id()].valid())
      result.push_back(acc[w.id()]);
    else
      result.push_back(constant(Matrix::Zero(w.rows(), w.cols())));
  }
  return result;
}

Var Tape::grad_norm(Var output, std::span<const Var> wrt) {
  if (wrt.empty()) throw std::invalid_argument("grad_norm needs at least one variable");
  std::vector<Var> grads = grad(output, wrt);
  if (grads.size() == 1) return norm(grads[0]);
  Var total = sum(mul(grads[0], grads[0]));
  for (std::size_t k = 1; k < grads.size(); ++k) total = add(total, sum(mul(grads[k], grads[k])));
  return pow(add_constant(total, kNormEpsilon), 0.5);
}

namespace {
Tape& tape_of(Var v) {
  if (!v.valid()) throw std::invalid_argument("operation on an unbound variable");
  return *v.tape();
}
Tape& tape_of(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("empty input list");
  return tape_of(parts.front());
}
}  // namespace

Var matmul(Var a, Var b) { return tape_of(a).apply(Op::MatMul, {a, b}); }
Var add(Var a, Var b) { return tape_of(a).apply(Op::Add, {a, b}); }
Var sub(Var a, Var b) { return tape_of(a).apply(Op::Sub, {a, b}); }
Var mul(Var a, Var b) { return tape_of(a).apply(Op::Mul, {a, b}); }
Var scale(Var a, double s) { return tape_of(a).apply(Op::Scale, {a}, Attrs{s}); }
Var relu(Var a) { return tape_of(a).apply(Op::Relu, {a}); }
Var sigmoid(Var a) { return tape_of(a).apply(Op::Sigmoid, {a}); }
Var tanh(Var a) { return tape_of(a).apply(Op::Tanh, {a}); }
Var row_softmax(Var a) { return tape_of(a).apply(Op::RowSoftmax, {a}); }
Var log_softmax(Var a) { return tape_of(a).apply(Op::LogSoftmax, {a}); }
Var sum(Var a) { return tape_of(a).apply(Op::Sum, {a}); }
Var mean(Var a) { return tape_of(a).apply(Op::Mean, {a}); }
Var norm(Var a) { return tape_of(a).apply(Op::Norm, {a}); }
Var concat_cols(std::span<const Var> parts) { return tape_of(parts).apply(Op::ConcatCols, parts); }
Var concat_rows(std::span<const Var> parts) { return tape_of(parts).apply(Op::ConcatRows, parts); }
Var max_pool(std::span<const Var> parts) { return tape_of(parts).apply(Op::MaxPool, parts); }
Var transpose(Var a) { return tape_of(a).apply(Op::Transpose, {a}); }
Var add_row(Var a, Var row) { return tape_of(a).apply(Op::AddRow, {a, row}); }
Var pow(Var a, double exponent) { return tape_of(a).apply(Op::Pow, {a}, Attrs{exponent}); }
Var log(Var a) { return tape_of(a).apply(Op::Log, {a}); }
Var clamp(Var a, double lo, double hi) {
  return tape_of(a).apply(Op::Clamp, {a}, Attrs{0.0, lo, hi});
}

Var add_constant(Var a, double c) {
  return add(a, tape_of(a).constant(Matrix::Constant(a.rows(), a.cols(), c)));
}

Var broadcast(Var scalar, Eigen::Index rows, Eigen::Index cols) {
  Tape& t = tape_of(scalar);
  if (scalar.value().size() != 1)
    throw ShapeError("broadcast expects a scalar, got " + shape_string(scalar.value()));
  Var column = matmul(t.constant(Matrix::Ones(rows, 1)), scalar);
  return matmul(column, t.constant(Matrix::Ones(1, cols)));
}

}  // namespace lggan::ad
