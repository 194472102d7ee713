// SPDX-License-Identifier: Apache-2.0
#include "raqr/diff/tape.hpp"

#include <cmath>
#include <memory>
#include <numbers>

#include "raqr/linops/bessel.hpp"

namespace raqr::diff {

namespace {

void require_same_tape(const Var& a, const Var& b, const char* prim) {
  if (a.tape() != b.tape())
    throw Error(std::string(prim) + ": operands belong to different tapes");
}

void require_same_shape(const Var& a, const Var& b, const char* prim) {
  require_same_tape(a, b, prim);
  if (!(a.shape() == b.shape()))
    throw ShapeError(std::string(prim) + ": shape mismatch " + a.shape().str() +
                     " vs " + b.shape().str());
}

}  // namespace

const Shape& Var::shape() const { return tape_->node(id_).shape; }
const std::vector<double>& Var::value() const { return tape_->node(id_).value; }
const std::vector<double>& Var::grad() const {
  const auto& n = tape_->node(id_);
  if (!n.requires_grad)
    throw Error("grad requested for a node that does not require gradients");
  return n.grad;
}

Var Tape::leaf(Shape shape, std::vector<double> values, bool requires_grad) {
  if (values.size() != shape.count())
    throw ShapeError("leaf: " + std::to_string(values.size()) + " values for shape " +
                     shape.str());
  return emit(shape, std::move(values), requires_grad, nullptr);
}

Var Tape::constant_matrix(const RealMatrix& m) {
  return leaf({m.rows(), m.cols()},
              std::vector<double>(m.data().begin(), m.data().end()), false);
}

Var Tape::emit(Shape shape, std::vector<double> value, bool requires_grad,
               std::function<void(Tape&)> backward_fn) {
  Node n;
  n.shape = shape;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  if (requires_grad) n.grad.assign(n.shape.count(), 0.0);
  n.backward_fn = std::move(backward_fn);
  nodes_.push_back(std::move(n));
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) throw Error("backward: loss lives on another tape");
  Node& ln = node(loss.id());
  if (ln.shape.count() != 1)
    throw DomainError("backward: loss must be a scalar, got shape " + ln.shape.str());
  if (!ln.requires_grad) return;  // loss independent of every parameter
  ln.grad[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backward_fn) n.backward_fn(*this);
  }
}

namespace {

// Emits an elementwise unary node. dfun(x, y) returns dy/dx given input and
// output values.
template <typename F, typename DF>
Var unary_elementwise(const Var& a, const char* prim, F fun, DF dfun) {
  Tape& t = *a.tape();
  const auto& x = a.value();
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = fun(x[i]);
  const bool rg = t.node(a.id()).requires_grad;
  const std::size_t aid = a.id();
  // The backward closure needs the output node id, so it is attached after
  // the node is emitted.
  Var out = t.emit(a.shape(), std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t oid = out.id();
    t.node(oid).backward_fn = [aid, oid, dfun](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      const auto& xv = tp.node(aid).value;
      const auto& yv = tp.node(oid).value;
      auto& ga = tp.node(aid).grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfun(xv[i], yv[i]);
    };
  }
  (void)prim;
  return out;
}

bool needs_grad(const Var& v) { return v.tape()->node(v.id()).requires_grad; }

}  // namespace

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  Tape& t = *a.tape();
  const auto& xa = a.value();
  const auto& xb = b.value();
  std::vector<double> y(xa.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] + xb[i];
  const bool rg = needs_grad(a) || needs_grad(b);
  Var out = t.emit(a.shape(), std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), bid = b.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, bid, oid](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      if (tp.node(aid).requires_grad) {
        auto& ga = tp.node(aid).grad;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tp.node(bid).requires_grad) {
        auto& gb = tp.node(bid).grad;
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
      }
    };
  }
  return out;
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  Tape& t = *a.tape();
  const auto& xa = a.value();
  const auto& xb = b.value();
  std::vector<double> y(xa.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] - xb[i];
  const bool rg = needs_grad(a) || needs_grad(b);
  Var out = t.emit(a.shape(), std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), bid = b.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, bid, oid](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      if (tp.node(aid).requires_grad) {
        auto& ga = tp.node(aid).grad;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      }
      if (tp.node(bid).requires_grad) {
        auto& gb = tp.node(bid).grad;
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] -= g[i];
      }
    };
  }
  return out;
}

Var hadamard(const Var& a, const Var& b) {
  require_same_shape(a, b, "hadamard");
  Tape& t = *a.tape();
  const auto& xa = a.value();
  const auto& xb = b.value();
  std::vector<double> y(xa.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xa[i] * xb[i];
  const bool rg = needs_grad(a) || needs_grad(b);
  Var out = t.emit(a.shape(), std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), bid = b.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, bid, oid](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      const auto& va = tp.node(aid).value;
      const auto& vb = tp.node(bid).value;
      if (tp.node(aid).requires_grad) {
        auto& ga = tp.node(aid).grad;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * vb[i];
      }
      if (tp.node(bid).requires_grad) {
        auto& gb = tp.node(bid).grad;
        for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * va[i];
      }
    };
  }
  return out;
}

namespace {

// C(m,n) += A(m,k) * B(k,n), row-major, ikj order.
void gemm_acc(const double* a, const double* b, double* c, std::size_t m,
              std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

// C(m,n) += A(m,k) * B(n,k)^T
void gemm_bt_acc(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double* arow = a + i * k;
      const double* brow = b + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += arow[p] * brow[p];
      c[i * n + j] += s;
    }
}

// C(k,n) += A(m,k)^T * B(m,n)
void gemm_at_acc(const double* a, const double* b, double* c, std::size_t m,
                 std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + i * n;
      double* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require_same_tape(a, b, "matmul");
  const Shape sa = a.shape(), sb = b.shape();
  if (sa.cols != sb.rows)
    throw ShapeError("matmul: inner dimensions differ, " + sa.str() + " times " +
                     sb.str());
  Tape& t = *a.tape();
  std::vector<double> y(sa.rows * sb.cols, 0.0);
  gemm_acc(a.value().data(), b.value().data(), y.data(), sa.rows, sa.cols, sb.cols);
  const bool rg = needs_grad(a) || needs_grad(b);
  Var out = t.emit({sa.rows, sb.cols}, std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), bid = b.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, bid, oid, sa, sb](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      if (tp.node(aid).requires_grad)  // dA = G B^T
        gemm_bt_acc(g.data(), tp.node(bid).value.data(), tp.node(aid).grad.data(),
                    sa.rows, sb.cols, sa.cols);
      if (tp.node(bid).requires_grad)  // dB = A^T G
        gemm_at_acc(tp.node(aid).value.data(), g.data(), tp.node(bid).grad.data(),
                    sa.rows, sa.cols, sb.cols);
    };
  }
  return out;
}

Var transpose(const Var& a) {
  Tape& t = *a.tape();
  const Shape s = a.shape();
  std::vector<double> y(s.count());
  for (std::size_t i = 0; i < s.rows; ++i)
    for (std::size_t j = 0; j < s.cols; ++j) y[j * s.rows + i] = a.value()[i * s.cols + j];
  const bool rg = needs_grad(a);
  Var out = t.emit({s.cols, s.rows}, std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, oid, s](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      auto& ga = tp.node(aid).grad;
      for (std::size_t i = 0; i < s.rows; ++i)
        for (std::size_t j = 0; j < s.cols; ++j)
          ga[i * s.cols + j] += g[j * s.rows + i];
    };
  }
  return out;
}

Var reshape(const Var& a, Shape s) {
  if (s.count() != a.shape().count())
    throw ShapeError("reshape: cannot view " + a.shape().str() + " as " + s.str());
  Tape& t = *a.tape();
  const bool rg = needs_grad(a);
  Var out = t.emit(s, a.value(), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, oid](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      auto& ga = tp.node(aid).grad;
      for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    };
  }
  return out;
}

Var concat_cols(const Var& a, const Var& b) {
  require_same_tape(a, b, "concat_cols");
  const Shape sa = a.shape(), sb = b.shape();
  if (sa.rows != sb.rows)
    throw ShapeError("concat_cols: row counts differ, " + sa.str() + " vs " + sb.str());
  Tape& t = *a.tape();
  const std::size_t cols = sa.cols + sb.cols;
  std::vector<double> y(sa.rows * cols);
  for (std::size_t i = 0; i < sa.rows; ++i) {
    for (std::size_t j = 0; j < sa.cols; ++j) y[i * cols + j] = a.value()[i * sa.cols + j];
    for (std::size_t j = 0; j < sb.cols; ++j)
      y[i * cols + sa.cols + j] = b.value()[i * sb.cols + j];
  }
  const bool rg = needs_grad(a) || needs_grad(b);
  Var out = t.emit({sa.rows, cols}, std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), bid = b.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, bid, oid, sa, sb, cols](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      if (tp.node(aid).requires_grad) {
        auto& ga = tp.node(aid).grad;
        for (std::size_t i = 0; i < sa.rows; ++i)
          for (std::size_t j = 0; j < sa.cols; ++j)
            ga[i * sa.cols + j] += g[i * cols + j];
      }
      if (tp.node(bid).requires_grad) {
        auto& gb = tp.node(bid).grad;
        for (std::size_t i = 0; i < sb.rows; ++i)
          for (std::size_t j = 0; j < sb.cols; ++j)
            gb[i * sb.cols + j] += g[i * cols + sa.cols + j];
      }
    };
  }
  return out;
}

Var slice(const Var& a, std::size_t r0, std::size_t c0, std::size_t rows,
          std::size_t cols) {
  const Shape s = a.shape();
  if (r0 + rows > s.rows || c0 + cols > s.cols)
    throw ShapeError("slice: window [" + std::to_string(r0) + "+" +
                     std::to_string(rows) + ", " + std::to_string(c0) + "+" +
                     std::to_string(cols) + ") exceeds " + s.str());
  Tape& t = *a.tape();
  std::vector<double> y(rows * cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      y[i * cols + j] = a.value()[(r0 + i) * s.cols + (c0 + j)];
  const bool rg = needs_grad(a);
  Var out = t.emit({rows, cols}, std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, oid, r0, c0, rows, cols, s](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      auto& ga = tp.node(aid).grad;
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
          ga[(r0 + i) * s.cols + (c0 + j)] += g[i * cols + j];
    };
  }
  return out;
}

Var exp(const Var& a) {
  return unary_elementwise(
      a, "exp", [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var log1p(const Var& a) {
  return unary_elementwise(
      a, "log1p", [](double x) { return std::log1p(x); },
      [](double x, double) { return 1.0 / (1.0 + x); });
}

Var sigmoid(const Var& a) {
  return unary_elementwise(
      a, "sigmoid",
      [](double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                     : std::exp(x) / (1.0 + std::exp(x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var relu(const Var& a) {
  return unary_elementwise(
      a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var gelu(const Var& a) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  constexpr double kInvSqrt2Pi = 0.3989422804014326779;
  return unary_elementwise(
      a, "gelu",
      [=](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
      [=](double x, double) {
        const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        const double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        return cdf + x * pdf;
      });
}

Var square(const Var& a) {
  return unary_elementwise(
      a, "square", [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Var bessel_ratio(const Var& a) {
  return unary_elementwise(
      a, "bessel_ratio", [](double x) { return linops::bessel_ratio(x); },
      [](double x, double) { return linops::bessel_ratio_derivative(x); });
}

Var scale_const(const Var& a, double c) {
  return unary_elementwise(
      a, "scale_const", [c](double x) { return c * x; },
      [c](double, double) { return c; });
}

Var scalar_mul(const Var& a, const Var& s) {
  require_same_tape(a, s, "scalar_mul");
  if (s.shape().count() != 1)
    throw ShapeError("scalar_mul: scale must be a single element, got " +
                     s.shape().str());
  Tape& t = *a.tape();
  const double sv = s.value()[0];
  std::vector<double> y(a.value().size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.value()[i] * sv;
  const bool rg = needs_grad(a) || needs_grad(s);
  Var out = t.emit(a.shape(), std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), sid = s.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, sid, oid](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      const double sval = tp.node(sid).value[0];
      if (tp.node(aid).requires_grad) {
        auto& ga = tp.node(aid).grad;
        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * sval;
      }
      if (tp.node(sid).requires_grad) {
        const auto& va = tp.node(aid).value;
        double acc = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * va[i];
        tp.node(sid).grad[0] += acc;
      }
    };
  }
  return out;
}

namespace {

Var rowvec_op(const Var& a, const Var& v, bool multiply, const char* prim) {
  require_same_tape(a, v, prim);
  const Shape sa = a.shape(), sv = v.shape();
  if (sv.rows != 1 || sv.cols != sa.cols)
    throw ShapeError(std::string(prim) + ": vector must be 1x" +
                     std::to_string(sa.cols) + ", got " + sv.str());
  Tape& t = *a.tape();
  std::vector<double> y(sa.count());
  for (std::size_t i = 0; i < sa.rows; ++i)
    for (std::size_t j = 0; j < sa.cols; ++j)
      y[i * sa.cols + j] = multiply ? a.value()[i * sa.cols + j] * v.value()[j]
                                    : a.value()[i * sa.cols + j] + v.value()[j];
  const bool rg = needs_grad(a) || needs_grad(v);
  Var out = t.emit(sa, std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), vid = v.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, vid, oid, sa, multiply](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      if (tp.node(aid).requires_grad) {
        auto& ga = tp.node(aid).grad;
        const auto& vv = tp.node(vid).value;
        for (std::size_t i = 0; i < sa.rows; ++i)
          for (std::size_t j = 0; j < sa.cols; ++j)
            ga[i * sa.cols + j] += multiply ? g[i * sa.cols + j] * vv[j]
                                            : g[i * sa.cols + j];
      }
      if (tp.node(vid).requires_grad) {
        auto& gv = tp.node(vid).grad;
        const auto& va = tp.node(aid).value;
        for (std::size_t i = 0; i < sa.rows; ++i)
          for (std::size_t j = 0; j < sa.cols; ++j)
            gv[j] += multiply ? g[i * sa.cols + j] * va[i * sa.cols + j]
                              : g[i * sa.cols + j];
      }
    };
  }
  return out;
}

}  // namespace

Var add_rowvec(const Var& a, const Var& v) { return rowvec_op(a, v, false, "add_rowvec"); }
Var mul_rowvec(const Var& a, const Var& v) { return rowvec_op(a, v, true, "mul_rowvec"); }

Var softmax_rows(const Var& a) {
  Tape& t = *a.tape();
  const Shape s = a.shape();
  std::vector<double> y(s.count());
  for (std::size_t i = 0; i < s.rows; ++i) {
    const double* row = a.value().data() + i * s.cols;
    double mx = row[0];
    for (std::size_t j = 1; j < s.cols; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < s.cols; ++j) {
      y[i * s.cols + j] = std::exp(row[j] - mx);
      denom += y[i * s.cols + j];
    }
    for (std::size_t j = 0; j < s.cols; ++j) y[i * s.cols + j] /= denom;
  }
  const bool rg = needs_grad(a);
  Var out = t.emit(s, std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, oid, s](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      const auto& yv = tp.node(oid).value;
      auto& ga = tp.node(aid).grad;
      for (std::size_t i = 0; i < s.rows; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < s.cols; ++j)
          dot += g[i * s.cols + j] * yv[i * s.cols + j];
        for (std::size_t j = 0; j < s.cols; ++j)
          ga[i * s.cols + j] += yv[i * s.cols + j] * (g[i * s.cols + j] - dot);
      }
    };
  }
  return out;
}

Var layer_norm_rows(const Var& a, double eps) {
  Tape& t = *a.tape();
  const Shape s = a.shape();
  std::vector<double> y(s.count());
  auto inv_std = std::make_shared<std::vector<double>>(s.rows);
  for (std::size_t i = 0; i < s.rows; ++i) {
    const double* row = a.value().data() + i * s.cols;
    double mu = 0.0;
    for (std::size_t j = 0; j < s.cols; ++j) mu += row[j];
    mu /= static_cast<double>(s.cols);
    double var = 0.0;
    for (std::size_t j = 0; j < s.cols; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<double>(s.cols);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < s.cols; ++j) y[i * s.cols + j] = (row[j] - mu) * is;
  }
  const bool rg = needs_grad(a);
  Var out = t.emit(s, std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, oid, s, inv_std](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      const auto& yv = tp.node(oid).value;
      auto& ga = tp.node(aid).grad;
      const double n = static_cast<double>(s.cols);
      for (std::size_t i = 0; i < s.rows; ++i) {
        double mean_g = 0.0, mean_gy = 0.0;
        for (std::size_t j = 0; j < s.cols; ++j) {
          mean_g += g[i * s.cols + j];
          mean_gy += g[i * s.cols + j] * yv[i * s.cols + j];
        }
        mean_g /= n;
        mean_gy /= n;
        const double is = (*inv_std)[i];
        for (std::size_t j = 0; j < s.cols; ++j)
          ga[i * s.cols + j] +=
              is * (g[i * s.cols + j] - mean_g - yv[i * s.cols + j] * mean_gy);
      }
    };
  }
  return out;
}

Var sum(const Var& a) {
  Tape& t = *a.tape();
  double acc = 0.0;
  for (double v : a.value()) acc += v;
  const bool rg = needs_grad(a);
  Var out = t.emit({1, 1}, {acc}, rg, nullptr);
  if (rg) {
    const std::size_t aid = a.id(), oid = out.id();
    t.node(oid).backward_fn = [aid, oid](Tape& tp) {
      const double g = tp.node(oid).grad[0];
      auto& ga = tp.node(aid).grad;
      for (double& v : ga) v += g;
    };
  }
  return out;
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.shape().count());
  return scale_const(sum(a), 1.0 / n);
}

Var complex_magnitude(const Var& re, const Var& im) {
  require_same_shape(re, im, "complex_magnitude");
  Tape& t = *re.tape();
  const auto& xr = re.value();
  const auto& xi = im.value();
  std::vector<double> y(xr.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = std::sqrt(xr[i] * xr[i] + xi[i] * xi[i]);
  const bool rg = needs_grad(re) || needs_grad(im);
  Var out = t.emit(re.shape(), std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t rid = re.id(), iid = im.id(), oid = out.id();
    t.node(oid).backward_fn = [rid, iid, oid](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      const auto& m = tp.node(oid).value;
      const auto& vr = tp.node(rid).value;
      const auto& vi = tp.node(iid).value;
      // Subgradient 0 at the origin.
      if (tp.node(rid).requires_grad) {
        auto& gr = tp.node(rid).grad;
        for (std::size_t i = 0; i < g.size(); ++i)
          if (m[i] > 0.0) gr[i] += g[i] * vr[i] / m[i];
      }
      if (tp.node(iid).requires_grad) {
        auto& gi = tp.node(iid).grad;
        for (std::size_t i = 0; i < g.size(); ++i)
          if (m[i] > 0.0) gi[i] += g[i] * vi[i] / m[i];
      }
    };
  }
  return out;
}

namespace {

// One output part of Z .* y / max(|y|, clamp). part == 0 for the real part.
Var phase_apply_part(const Var& z, const Var& re, const Var& im, double clamp,
                     int part, const std::shared_ptr<std::vector<double>>& c) {
  Tape& t = *z.tape();
  const auto& zv = z.value();
  const auto& vr = re.value();
  const auto& vi = im.value();
  std::vector<double> y(zv.size());
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = zv[i] * (part == 0 ? vr[i] : vi[i]) / (*c)[i];
  const bool rg = needs_grad(z) || needs_grad(re) || needs_grad(im);
  Var out = t.emit(z.shape(), std::move(y), rg, nullptr);
  if (rg) {
    const std::size_t zid = z.id(), rid = re.id(), iid = im.id(), oid = out.id();
    t.node(oid).backward_fn = [zid, rid, iid, oid, clamp, part, c](Tape& tp) {
      const auto& g = tp.node(oid).grad;
      const auto& zv2 = tp.node(zid).value;
      const auto& vr2 = tp.node(rid).value;
      const auto& vi2 = tp.node(iid).value;
      const bool gz = tp.node(zid).requires_grad;
      const bool gr = tp.node(rid).requires_grad;
      const bool gi = tp.node(iid).requires_grad;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double ci = (*c)[i];
        const double zr = vr2[i], zi = vi2[i];
        const double num = part == 0 ? zr : zi;
        if (gz) tp.node(zid).grad[i] += g[i] * num / ci;
        const double r = std::sqrt(zr * zr + zi * zi);
        if (r > clamp) {
          // d(z * num / r): dre and dim via the quotient rule.
          const double r3 = r * r * r;
          if (part == 0) {
            if (gr) tp.node(rid).grad[i] += g[i] * zv2[i] * (zi * zi) / r3;
            if (gi) tp.node(iid).grad[i] -= g[i] * zv2[i] * zr * zi / r3;
          } else {
            if (gr) tp.node(rid).grad[i] -= g[i] * zv2[i] * zr * zi / r3;
            if (gi) tp.node(iid).grad[i] += g[i] * zv2[i] * (zr * zr) / r3;
          }
        } else {
          // Clamped region: denominator is the constant clamp.
          if (part == 0) {
            if (gr) tp.node(rid).grad[i] += g[i] * zv2[i] / ci;
          } else {
            if (gi) tp.node(iid).grad[i] += g[i] * zv2[i] / ci;
          }
        }
      }
    };
  }
  return out;
}

}  // namespace

CVar complex_phase_apply(const Var& z, const CVar& y, double clamp) {
  require_same_shape(z, y.re, "complex_phase_apply");
  require_same_shape(y.re, y.im, "complex_phase_apply");
  const auto& vr = y.re.value();
  const auto& vi = y.im.value();
  auto c = std::make_shared<std::vector<double>>(vr.size());
  for (std::size_t i = 0; i < vr.size(); ++i)
    (*c)[i] = std::max(std::sqrt(vr[i] * vr[i] + vi[i] * vi[i]), clamp);
  return {phase_apply_part(z, y.re, y.im, clamp, 0, c),
          phase_apply_part(z, y.re, y.im, clamp, 1, c)};
}

CVar cadd(const CVar& a, const CVar& b) { return {add(a.re, b.re), add(a.im, b.im)}; }
CVar csub(const CVar& a, const CVar& b) { return {sub(a.re, b.re), sub(a.im, b.im)}; }

CVar cmatmul(const CVar& a, const CVar& b) {
  // (Ar + i Ai)(Br + i Bi) = (Ar Br - Ai Bi) + i (Ar Bi + Ai Br)
  return {sub(matmul(a.re, b.re), matmul(a.im, b.im)),
          add(matmul(a.re, b.im), matmul(a.im, b.re))};
}

CVar chadamard_real(const CVar& a, const Var& r) {
  return {hadamard(a.re, r), hadamard(a.im, r)};
}

CVar cscalar_mul(const CVar& a, const Var& s) {
  return {scalar_mul(a.re, s), scalar_mul(a.im, s)};
}

Var cmagnitude(const CVar& a) { return complex_magnitude(a.re, a.im); }

CVar constant_cmatrix(Tape& tape, const ComplexMatrix& m) {
  std::vector<double> re(m.real_part().begin(), m.real_part().end());
  std::vector<double> im(m.imag_part().begin(), m.imag_part().end());
  return {tape.leaf({m.rows(), m.cols()}, std::move(re), false),
          tape.leaf({m.rows(), m.cols()}, std::move(im), false)};
}

ComplexMatrix to_complex_matrix(const CVar& v) {
  const Shape s = v.re.shape();
  return ComplexMatrix(s.rows, s.cols, v.re.value(), v.im.value());
}

RealMatrix to_real_matrix(const Var& v) {
  return RealMatrix(v.shape().rows, v.shape().cols, v.value());
}

}  // namespace raqr::diff
