// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode automatic differentiation over real tensors.
//
// A Tape owns a flat record of nodes in creation order; creation order is a
// valid topological order, so backward() is a single reverse sweep with a
// deterministic accumulation order. Complex quantities are carried as
// explicit (real, imaginary) tensor pairs, so differentiation stays
// real-valued throughout; see CVar below.
//
// Tensors are rank-1 or rank-2 (all the network needs); matrices are
// row-major. Var is a cheap handle {tape, node id}.
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "raqr/error.hpp"
#include "raqr/linops/matrix.hpp"

namespace raqr::diff {

struct Shape {
  std::size_t rows = 1, cols = 1;
  std::size_t count() const { return rows * cols; }
  bool operator==(const Shape&) const = default;
  std::string str() const { return shape_str(rows, cols); }
};

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Shape& shape() const;
  const std::vector<double>& value() const;
  // Valid after Tape::backward().
  const std::vector<double>& grad() const;

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  // Leaves. requires_grad marks trainable parameters; constants never
  // accumulate gradient and are skipped by the backward sweep.
  Var leaf(Shape shape, std::vector<double> values, bool requires_grad);
  Var constant(Shape shape, std::vector<double> values) {
    return leaf(shape, std::move(values), false);
  }
  Var constant_scalar(double v) { return leaf({1, 1}, {v}, false); }
  Var constant_matrix(const RealMatrix& m);

  // Accumulates d(loss)/d(node) for every node reachable from loss.
  // loss must be a single-element tensor.
  void backward(const Var& loss);

  std::size_t node_count() const { return nodes_.size(); }

  // -- internal access for primitive implementations --
  struct Node {
    Shape shape;
    std::vector<double> value;
    std::vector<double> grad;
    bool requires_grad = false;
    // Pulls this node's gradient into its inputs' gradients.
    std::function<void(Tape&)> backward_fn;
  };
  Node& node(std::size_t id) { return nodes_[id]; }
  const Node& node(std::size_t id) const { return nodes_[id]; }
  Var emit(Shape shape, std::vector<double> value, bool requires_grad,
           std::function<void(Tape&)> backward_fn);

 private:
  std::vector<Node> nodes_;
};

// ---- primitives ----
// Binary ops require identical shapes and throw ShapeError naming the
// primitive otherwise.

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var reshape(const Var& a, Shape s);
// Concatenate along columns (axis 1); rows must match.
Var concat_cols(const Var& a, const Var& b);
// Rectangular slice [r0, r0+rows) x [c0, c0+cols).
Var slice(const Var& a, std::size_t r0, std::size_t c0, std::size_t rows,
          std::size_t cols);

Var exp(const Var& a);
Var log1p(const Var& a);
Var sigmoid(const Var& a);
Var relu(const Var& a);
Var gelu(const Var& a);  // exact erf form
Var square(const Var& a);

// Multiply by a compile-time constant.
Var scale_const(const Var& a, double c);
// Broadcast product with a single-element tensor (the gate).
Var scalar_mul(const Var& a, const Var& s);
// Broadcast a 1 x cols row vector over all rows (bias add / gain).
Var add_rowvec(const Var& a, const Var& v);
Var mul_rowvec(const Var& a, const Var& v);

// Row-wise softmax.
Var softmax_rows(const Var& a);
// Row-wise layer normalization (mean 0, variance 1 per row); affine scale and
// offset are applied separately via mul_rowvec/add_rowvec.
Var layer_norm_rows(const Var& a, double eps = 1e-6);

// Full reductions to a single-element tensor.
Var sum(const Var& a);
Var mean(const Var& a);

// sqrt(re^2 + im^2) entrywise; at an exact zero the subgradient is 0.
Var complex_magnitude(const Var& re, const Var& im);

// Elementwise Bessel-ratio filter R(kappa) with its analytic derivative;
// the differentiable fixed-filter counterpart of the learned FilterNet.
Var bessel_ratio(const Var& kappa);

// A complex matrix as a pair of real tensors.
struct CVar {
  Var re, im;
  Shape shape() const { return re.shape(); }
};

CVar cadd(const CVar& a, const CVar& b);
CVar csub(const CVar& a, const CVar& b);
CVar cmatmul(const CVar& a, const CVar& b);
// Entrywise product with a real tensor.
CVar chadamard_real(const CVar& a, const Var& r);
CVar cscalar_mul(const CVar& a, const Var& s);
Var cmagnitude(const CVar& a);

// Z .* y / max(|y|, clamp): the differentiable surrogate of the magnitude
// projection. The clamp (1e-12) bounds the division; below it the output
// degrades smoothly to ~0 instead of the non-differentiable unit phasor.
CVar complex_phase_apply(const Var& z, const CVar& y, double clamp = 1e-12);

// Constants from matrices.
CVar constant_cmatrix(Tape& tape, const ComplexMatrix& m);
ComplexMatrix to_complex_matrix(const CVar& v);
RealMatrix to_real_matrix(const Var& v);

}  // namespace raqr::diff
