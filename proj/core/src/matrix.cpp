// SPDX-License-Identifier: Apache-2.0
#include "raqr/linops/matrix.hpp"

#include <cmath>

namespace raqr {

ComplexMatrix ComplexMatrix::from_parts(const RealMatrix& re, const RealMatrix& im) {
  if (!re.same_shape(im))
    throw ShapeError("from_parts: real " + shape_str(re.rows(), re.cols()) +
                     " vs imaginary " + shape_str(im.rows(), im.cols()));
  ComplexMatrix m(re.rows(), re.cols());
  for (std::size_t i = 0; i < re.size(); ++i) {
    m.real_part()[i] = re.data()[i];
    m.imag_part()[i] = im.data()[i];
  }
  return m;
}

namespace linops {
namespace {

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b,
                        const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.rows(), a.cols()) + " vs " +
                     shape_str(b.rows(), b.cols()));
}

void require_same_shape(const RealMatrix& a, const RealMatrix& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.rows(), a.cols()) + " vs " +
                     shape_str(b.rows(), b.cols()));
}

}  // namespace

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows())
    throw ShapeError("matmul: inner dimensions differ, " +
                     shape_str(a.rows(), a.cols()) + " times " +
                     shape_str(b.rows(), b.cols()));
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  ComplexMatrix c(m, n);
  // i-k-j loop order keeps the inner loop contiguous in b and c.
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double ar = a.re(i, p), ai = a.im(i, p);
      if (ar == 0.0 && ai == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double br = b.re(p, j), bi = b.im(p, j);
        c.re(i, j) += ar * br - ai * bi;
        c.im(i, j) += ar * bi + ai * br;
      }
    }
  }
  return c;
}

ComplexMatrix transpose(const ComplexMatrix& a) {
  ComplexMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) {
      t.re(j, i) = a.re(i, j);
      t.im(j, i) = a.im(i, j);
    }
  return t;
}

ComplexMatrix conjugate(const ComplexMatrix& a) {
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.real_part()[i] = a.real_part()[i];
    c.imag_part()[i] = -a.imag_part()[i];
  }
  return c;
}

ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "add");
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.real_part()[i] = a.real_part()[i] + b.real_part()[i];
    c.imag_part()[i] = a.imag_part()[i] + b.imag_part()[i];
  }
  return c;
}

ComplexMatrix subtract(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "subtract");
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.real_part()[i] = a.real_part()[i] - b.real_part()[i];
    c.imag_part()[i] = a.imag_part()[i] - b.imag_part()[i];
  }
  return c;
}

ComplexMatrix hadamard(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "hadamard");
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a.real_part()[i], ai = a.imag_part()[i];
    const double br = b.real_part()[i], bi = b.imag_part()[i];
    c.real_part()[i] = ar * br - ai * bi;
    c.imag_part()[i] = ar * bi + ai * br;
  }
  return c;
}

ComplexMatrix hadamard(const ComplexMatrix& a, const RealMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ShapeError("hadamard: shape mismatch " + shape_str(a.rows(), a.cols()) +
                     " vs " + shape_str(b.rows(), b.cols()));
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    c.real_part()[i] = a.real_part()[i] * b.data()[i];
    c.imag_part()[i] = a.imag_part()[i] * b.data()[i];
  }
  return c;
}

RealMatrix magnitude(const ComplexMatrix& a) {
  RealMatrix m(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i)
    m.data()[i] = std::sqrt(a.real_part()[i] * a.real_part()[i] +
                            a.imag_part()[i] * a.imag_part()[i]);
  return m;
}

ComplexMatrix scale(const ComplexMatrix& a, std::complex<double> s) {
  ComplexMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ar = a.real_part()[i], ai = a.imag_part()[i];
    c.real_part()[i] = ar * s.real() - ai * s.imag();
    c.imag_part()[i] = ar * s.imag() + ai * s.real();
  }
  return c;
}

RealMatrix add(const RealMatrix& a, const RealMatrix& b) {
  require_same_shape(a, b, "add");
  RealMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] + b.data()[i];
  return c;
}

RealMatrix subtract(const RealMatrix& a, const RealMatrix& b) {
  require_same_shape(a, b, "subtract");
  RealMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] - b.data()[i];
  return c;
}

RealMatrix hadamard(const RealMatrix& a, const RealMatrix& b) {
  require_same_shape(a, b, "hadamard");
  RealMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
  return c;
}

RealMatrix scale(const RealMatrix& a, double s) {
  RealMatrix c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c.data()[i] = a.data()[i] * s;
  return c;
}

ComplexMatrix phase_project(const RealMatrix& z, const ComplexMatrix& y) {
  if (z.rows() != y.rows() || z.cols() != y.cols())
    throw ShapeError("phase_project: shape mismatch " +
                     shape_str(z.rows(), z.cols()) + " vs " +
                     shape_str(y.rows(), y.cols()));
  ComplexMatrix out(y.rows(), y.cols());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double yr = y.real_part()[i], yi = y.imag_part()[i];
    const double r = std::sqrt(yr * yr + yi * yi);
    if (r == 0.0) {
      // Phase of 0 is taken as 0: entry becomes z + 0i.
      out.real_part()[i] = z.data()[i];
      out.imag_part()[i] = 0.0;
    } else {
      out.real_part()[i] = z.data()[i] * (yr / r);
      out.imag_part()[i] = z.data()[i] * (yi / r);
    }
  }
  return out;
}

double frob_norm_sq(const ComplexMatrix& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += a.real_part()[i] * a.real_part()[i] + a.imag_part()[i] * a.imag_part()[i];
  return s;
}

double frob_norm_sq(const RealMatrix& a) {
  double s = 0.0;
  for (double v : a.data()) s += v * v;
  return s;
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double dr = a.real_part()[i] - b.real_part()[i];
    const double di = a.imag_part()[i] - b.imag_part()[i];
    m = std::max(m, std::sqrt(dr * dr + di * di));
  }
  return m;
}

double max_abs_diff(const RealMatrix& a, const RealMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

bool all_finite(const ComplexMatrix& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!std::isfinite(a.real_part()[i]) || !std::isfinite(a.imag_part()[i]))
      return false;
  return true;
}

bool all_finite(const RealMatrix& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace linops
}  // namespace raqr
