#include "monocon/tape.hpp"

#include <cmath>
#include <utility>

namespace monocon::ad {

namespace {

void require_same_tape(const Var& a, const Var& b, const char* op) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw Error(std::string(op) + ": operands must live on the same tape");
  }
}

// Left-to-right sum over one row of row-major storage.
double row_accumulate(const Matrix& m, Index r) {
  double s = 0.0;
  for (Index c = 0; c < m.cols(); ++c) {
    s += m(r, c);
  }
  return s;
}

}  // namespace

const Matrix& Var::value() const { return tape_->node(index_).value; }
const Matrix& Var::grad() const { return tape_->node(index_).grad; }

Var Tape::emplace(Op op, Matrix value, std::size_t p0, std::size_t p1,
                  int arity, double scalar, Matrix aux) {
  Node n;
  n.value = std::move(value);
  n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  n.op = op;
  n.parents = {p0, p1};
  n.arity = arity;
  n.scalar = scalar;
  n.aux = std::move(aux);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

Var Tape::leaf(Matrix value) { return emplace(Op::Leaf, std::move(value)); }

Var Tape::constant(Matrix value) { return emplace(Op::Constant, std::move(value)); }

void Tape::backward(const Var& root) {
  if (root.tape() != this) {
    throw Error("backward: root is not on this tape");
  }
  if (backward_done_) {
    throw Error("backward: tape already differentiated; call reset_grads() or rebuild");
  }
  const Node& r = node(root.index());
  if (r.value.rows() != 1 || r.value.cols() != 1) {
    throw DimensionError("backward: root must be 1x1, got " + shape_str(r.value));
  }
  backward_done_ = true;
  nodes_[root.index()].grad(0, 0) = 1.0;
  for (std::size_t i = root.index() + 1; i-- > 0;) {
    backprop_node(i);
  }
}

void Tape::reset_grads() {
  for (Node& n : nodes_) {
    n.grad.setZero();
  }
  backward_done_ = false;
}

void Tape::backprop_node(std::size_t i) {
  Node& n = nodes_[i];
  const Matrix& g = n.grad;
  switch (n.op) {
    case Op::Leaf:
    case Op::Constant:
      break;
    case Op::MatMul: {
      Node& a = nodes_[n.parents[0]];
      Node& b = nodes_[n.parents[1]];
      a.grad.noalias() += g * b.value.transpose();
      b.grad.noalias() += a.value.transpose() * g;
      break;
    }
    case Op::Add: {
      nodes_[n.parents[0]].grad += g;
      nodes_[n.parents[1]].grad += g;
      break;
    }
    case Op::AddRow: {
      nodes_[n.parents[0]].grad += g;
      Node& b = nodes_[n.parents[1]];
      for (Index c = 0; c < g.cols(); ++c) {
        double s = 0.0;
        for (Index r = 0; r < g.rows(); ++r) s += g(r, c);
        b.grad(0, c) += s;
      }
      break;
    }
    case Op::AddCol: {
      nodes_[n.parents[0]].grad += g;
      Node& b = nodes_[n.parents[1]];
      for (Index r = 0; r < g.rows(); ++r) {
        b.grad(r, 0) += row_accumulate(g, r);
      }
      break;
    }
    case Op::Sub: {
      nodes_[n.parents[0]].grad += g;
      nodes_[n.parents[1]].grad -= g;
      break;
    }
    case Op::SubRow: {
      nodes_[n.parents[0]].grad += g;
      Node& b = nodes_[n.parents[1]];
      for (Index c = 0; c < g.cols(); ++c) {
        double s = 0.0;
        for (Index r = 0; r < g.rows(); ++r) s += g(r, c);
        b.grad(0, c) -= s;
      }
      break;
    }
    case Op::SubCol: {
      nodes_[n.parents[0]].grad += g;
      Node& b = nodes_[n.parents[1]];
      for (Index r = 0; r < g.rows(); ++r) {
        b.grad(r, 0) -= row_accumulate(g, r);
      }
      break;
    }
    case Op::Mul: {
      Node& a = nodes_[n.parents[0]];
      Node& b = nodes_[n.parents[1]];
      a.grad.array() += g.array() * b.value.array();
      b.grad.array() += g.array() * a.value.array();
      break;
    }
    case Op::Square: {
      Node& a = nodes_[n.parents[0]];
      a.grad.array() += 2.0 * a.value.array() * g.array();
      break;
    }
    case Op::LeakyRelu: {
      Node& a = nodes_[n.parents[0]];
      const double alpha = n.scalar;
      a.grad.array() +=
          (a.value.array() > 0.0).select(g, alpha * g).array();
      break;
    }
    case Op::Scale: {
      nodes_[n.parents[0]].grad += n.scalar * g;
      break;
    }
    case Op::Exp: {
      nodes_[n.parents[0]].grad.array() += g.array() * n.value.array();
      break;
    }
    case Op::Log: {
      Node& a = nodes_[n.parents[0]];
      a.grad.array() += g.array() / a.value.array();
      break;
    }
    case Op::Transpose: {
      nodes_[n.parents[0]].grad += g.transpose();
      break;
    }
    case Op::RowL2Normalize: {
      // y = x / ||x||; dx = (g - y * (g . y)) / ||x|| per row.
      Node& a = nodes_[n.parents[0]];
      const Matrix& y = n.value;
      for (Index r = 0; r < y.rows(); ++r) {
        double dot = 0.0;
        for (Index c = 0; c < y.cols(); ++c) dot += g(r, c) * y(r, c);
        const double inv_norm = 1.0 / n.aux(r, 0);
        for (Index c = 0; c < y.cols(); ++c) {
          a.grad(r, c) += (g(r, c) - y(r, c) * dot) * inv_norm;
        }
      }
      break;
    }
    case Op::RowSum: {
      Node& a = nodes_[n.parents[0]];
      for (Index r = 0; r < a.value.rows(); ++r) {
        a.grad.row(r).array() += g(r, 0);
      }
      break;
    }
    case Op::Sum: {
      nodes_[n.parents[0]].grad.array() += g(0, 0);
      break;
    }
  }
}

Var matmul(const Var& a, const Var& b) {
  require_same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions disagree: " +
                         shape_str(a.value()) + " * " + shape_str(b.value()));
  }
  Matrix out = a.value() * b.value();
  return a.tape()->emplace(Op::MatMul, std::move(out), a.index(), b.index(), 2);
}

namespace {

Op broadcast_kind(const Var& a, const Var& b, Op same, Op row, Op col, const char* name) {
  if (a.rows() == b.rows() && a.cols() == b.cols()) return same;
  if (b.rows() == 1 && b.cols() == a.cols()) return row;
  if (b.cols() == 1 && b.rows() == a.rows()) return col;
  throw DimensionError(std::string(name) + ": incompatible shapes " +
                       shape_str(a.value()) + " and " + shape_str(b.value()));
}

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_tape(a, b, "add");
  const Op op = broadcast_kind(a, b, Op::Add, Op::AddRow, Op::AddCol, "add");
  Matrix out;
  if (op == Op::Add) {
    out = a.value() + b.value();
  } else if (op == Op::AddRow) {
    out = a.value().rowwise() + b.value().row(0);
  } else {
    out = a.value().colwise() + b.value().col(0);
  }
  return a.tape()->emplace(op, std::move(out), a.index(), b.index(), 2);
}

Var sub(const Var& a, const Var& b) {
  require_same_tape(a, b, "sub");
  const Op op = broadcast_kind(a, b, Op::Sub, Op::SubRow, Op::SubCol, "sub");
  Matrix out;
  if (op == Op::Sub) {
    out = a.value() - b.value();
  } else if (op == Op::SubRow) {
    out = a.value().rowwise() - b.value().row(0);
  } else {
    out = a.value().colwise() - b.value().col(0);
  }
  return a.tape()->emplace(op, std::move(out), a.index(), b.index(), 2);
}

Var mul(const Var& a, const Var& b) {
  require_same_tape(a, b, "mul");
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError("mul: shapes disagree: " + shape_str(a.value()) +
                         " and " + shape_str(b.value()));
  }
  Matrix out = a.value().cwiseProduct(b.value());
  return a.tape()->emplace(Op::Mul, std::move(out), a.index(), b.index(), 2);
}

Var square(const Var& a) {
  Matrix out = a.value().cwiseProduct(a.value());
  return a.tape()->emplace(Op::Square, std::move(out), a.index(), 0, 1);
}

Var leaky_relu(const Var& a, double alpha) {
  return a.tape()->emplace(Op::LeakyRelu, leaky_relu_value(a.value(), alpha),
                           a.index(), 0, 1, alpha);
}

Var scale(const Var& a, double c) {
  Matrix out = c * a.value();
  return a.tape()->emplace(Op::Scale, std::move(out), a.index(), 0, 1, c);
}

Var exp(const Var& a) {
  Matrix out = a.value().array().exp();
  return a.tape()->emplace(Op::Exp, std::move(out), a.index(), 0, 1);
}

Var log(const Var& a) {
  if ((a.value().array() <= 0.0).any()) {
    throw DomainError("log: non-positive entry");
  }
  Matrix out = a.value().array().log();
  return a.tape()->emplace(Op::Log, std::move(out), a.index(), 0, 1);
}

Var transpose(const Var& a) {
  Matrix out = a.value().transpose();
  return a.tape()->emplace(Op::Transpose, std::move(out), a.index(), 0, 1);
}

Var row_l2_normalize(const Var& a) {
  const Matrix& x = a.value();
  Matrix norms(x.rows(), 1);
  Matrix out(x.rows(), x.cols());
  for (Index r = 0; r < x.rows(); ++r) {
    double sq = 0.0;
    for (Index c = 0; c < x.cols(); ++c) sq += x(r, c) * x(r, c);
    const double norm = std::sqrt(sq);
    if (norm < kRowNormEpsilon) {
      throw DegenerateError("row_l2_normalize: row " + std::to_string(r) +
                            " has near-zero norm " + std::to_string(norm));
    }
    norms(r, 0) = norm;
    out.row(r) = x.row(r) / norm;
  }
  return a.tape()->emplace(Op::RowL2Normalize, std::move(out), a.index(), 0, 1,
                           0.0, std::move(norms));
}

Var row_sum(const Var& a) {
  const Matrix& x = a.value();
  Matrix out(x.rows(), 1);
  for (Index r = 0; r < x.rows(); ++r) {
    out(r, 0) = row_accumulate(x, r);
  }
  return a.tape()->emplace(Op::RowSum, std::move(out), a.index(), 0, 1);
}

Var sum(const Var& a) {
  const Matrix& x = a.value();
  double s = 0.0;
  for (Index r = 0; r < x.rows(); ++r) {
    s += row_accumulate(x, r);
  }
  Matrix out(1, 1);
  out(0, 0) = s;
  return a.tape()->emplace(Op::Sum, std::move(out), a.index(), 0, 1);
}

Matrix leaky_relu_value(const Matrix& a, double alpha) {
  return (a.array() > 0.0).select(a, alpha * a);
}

Matrix row_l2_normalize_value(const Matrix& a) {
  Tape tape;
  return row_l2_normalize(tape.constant(a)).value();
}

}  // namespace monocon::ad
