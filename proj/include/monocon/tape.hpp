#pragma once

#include <array>
#include <cstddef>
#include <deque>

#include "monocon/matrix.hpp"

namespace monocon::ad {

// Reverse-mode automatic differentiation over dense matrices.
//
// A Tape records one forward computation as a flat sequence of nodes;
// insertion order is a topological order, so backward() is a single reverse
// sweep that visits each node exactly once and accumulates into parent
// gradients. Tapes are rebuilt per batch and are single-owner.
//
// Determinism: reductions (row_sum, sum, row norms) are explicit
// left-to-right loops over row-major storage; products go through Eigen's
// fixed-order kernels. Identical inputs give bit-identical outputs.

enum class Op {
  Leaf,       // differentiable input (parameter)
  Constant,   // non-differentiable input (data, masks)
  MatMul,
  Add,        // same shape
  AddRow,     // b is 1 x d, broadcast down rows
  AddCol,     // b is n x 1, broadcast across columns
  Sub,
  SubRow,
  SubCol,
  Mul,        // elementwise
  Square,
  LeakyRelu,  // scalar = slope alpha
  Scale,      // scalar = factor c
  Exp,
  Log,
  Transpose,
  RowL2Normalize,
  RowSum,     // n x d -> n x 1
  Sum,        // -> 1 x 1
};

class Tape;

// Cheap handle into a tape. Valid as long as its tape is alive.
class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  const Matrix& grad() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }

  Tape* tape() const { return tape_; }
  std::size_t index() const { return index_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t index) : tape_(tape), index_(index) {}

  Tape* tape_ = nullptr;
  std::size_t index_ = 0;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var leaf(Matrix value);
  Var constant(Matrix value);

  // Root must be a 1x1 node on this tape. After the sweep every leaf holds
  // d(root)/d(leaf) in grad(). A second backward without reset_grads() is
  // rejected (gradients would otherwise silently double-accumulate).
  void backward(const Var& root);

  void reset_grads();

  std::size_t size() const { return nodes_.size(); }

 private:
  friend class Var;

  struct Node {
    Matrix value;
    Matrix grad;  // same shape, zero until backward
    Op op = Op::Leaf;
    std::array<std::size_t, 2> parents{};
    int arity = 0;
    double scalar = 0.0;  // LeakyRelu slope / Scale factor
    Matrix aux;           // RowL2Normalize: per-row norms (n x 1)
  };

  Var emplace(Op op, Matrix value, std::size_t p0 = 0, std::size_t p1 = 0,
              int arity = 0, double scalar = 0.0, Matrix aux = {});
  void backprop_node(std::size_t i);
  Node& node(std::size_t i) { return nodes_[i]; }
  const Node& node(std::size_t i) const { return nodes_[i]; }

  std::deque<Node> nodes_;  // deque: stable references while appending
  bool backward_done_ = false;

  friend Var matmul(const Var&, const Var&);
  friend Var add(const Var&, const Var&);
  friend Var sub(const Var&, const Var&);
  friend Var mul(const Var&, const Var&);
  friend Var square(const Var&);
  friend Var leaky_relu(const Var&, double);
  friend Var scale(const Var&, double);
  friend Var exp(const Var&);
  friend Var log(const Var&);
  friend Var transpose(const Var&);
  friend Var row_l2_normalize(const Var&);
  friend Var row_sum(const Var&);
  friend Var sum(const Var&);
};

// All binary ops require both operands on the same tape.
Var matmul(const Var& a, const Var& b);

// add/sub accept equal shapes, or a row vector (1 x d) / column vector
// (n x 1) as second operand, broadcast over the first. Anything wider is a
// non-goal.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);

Var mul(const Var& a, const Var& b);  // elementwise, equal shapes
Var square(const Var& a);
Var leaky_relu(const Var& a, double alpha);
Var scale(const Var& a, double c);
Var exp(const Var& a);
Var log(const Var& a);  // throws DomainError on non-positive entries
Var transpose(const Var& a);

// Rows below kRowNormEpsilon in L2 norm raise DegenerateError.
inline constexpr double kRowNormEpsilon = 1e-12;
Var row_l2_normalize(const Var& a);

Var row_sum(const Var& a);
Var sum(const Var& a);

// Value-level helpers shared with the non-graph paths.
Matrix leaky_relu_value(const Matrix& a, double alpha);
Matrix row_l2_normalize_value(const Matrix& a);

}  // namespace monocon::ad
