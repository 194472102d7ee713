// SPDX-License-Identifier: Apache-2.0
//
// Dense complex and real matrices in split real/imaginary row-major storage,
// plus the elementwise and product operations the estimators are built from.
// All operations are pure: inputs are never modified and results are returned
// by value, so matrices can be shared freely across threads.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "raqr/error.hpp"

namespace raqr {

class RealMatrix {
 public:
  RealMatrix() = default;
  RealMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  RealMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_)
      throw ShapeError("RealMatrix: data length " + std::to_string(data_.size()) +
                       " does not match shape " + shape_str(rows_, cols_));
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  bool same_shape(const RealMatrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

class ComplexMatrix {
 public:
  ComplexMatrix() = default;
  ComplexMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), re_(rows * cols, 0.0), im_(rows * cols, 0.0) {}
  ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<double> re,
                std::vector<double> im)
      : rows_(rows), cols_(cols), re_(std::move(re)), im_(std::move(im)) {
    if (re_.size() != rows_ * cols_ || im_.size() != rows_ * cols_)
      throw ShapeError("ComplexMatrix: part lengths do not match shape " +
                       shape_str(rows_, cols_));
  }

  static ComplexMatrix identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.re(i, i) = 1.0;
    return m;
  }
  static ComplexMatrix from_parts(const RealMatrix& re, const RealMatrix& im);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return re_.size(); }

  double& re(std::size_t r, std::size_t c) { return re_[r * cols_ + c]; }
  double re(std::size_t r, std::size_t c) const { return re_[r * cols_ + c]; }
  double& im(std::size_t r, std::size_t c) { return im_[r * cols_ + c]; }
  double im(std::size_t r, std::size_t c) const { return im_[r * cols_ + c]; }

  std::complex<double> at(std::size_t r, std::size_t c) const {
    return {re(r, c), im(r, c)};
  }
  void set(std::size_t r, std::size_t c, std::complex<double> v) {
    re(r, c) = v.real();
    im(r, c) = v.imag();
  }

  std::span<const double> real_part() const noexcept { return re_; }
  std::span<const double> imag_part() const noexcept { return im_; }
  std::span<double> real_part() noexcept { return re_; }
  std::span<double> imag_part() noexcept { return im_; }

  bool same_shape(const ComplexMatrix& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> re_, im_;
};

namespace linops {

// C = A B, standard complex product. Throws ShapeError naming both shapes.
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix transpose(const ComplexMatrix& a);
ComplexMatrix conjugate(const ComplexMatrix& a);

ComplexMatrix add(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix subtract(const ComplexMatrix& a, const ComplexMatrix& b);
// Hadamard (entrywise) product.
ComplexMatrix hadamard(const ComplexMatrix& a, const ComplexMatrix& b);
// Entrywise product with a real matrix (filter application).
ComplexMatrix hadamard(const ComplexMatrix& a, const RealMatrix& b);
// Entrywise |a|.
RealMatrix magnitude(const ComplexMatrix& a);
// a scaled by a complex scalar.
ComplexMatrix scale(const ComplexMatrix& a, std::complex<double> s);

RealMatrix add(const RealMatrix& a, const RealMatrix& b);
RealMatrix subtract(const RealMatrix& a, const RealMatrix& b);
RealMatrix hadamard(const RealMatrix& a, const RealMatrix& b);
RealMatrix scale(const RealMatrix& a, double s);

// Entrywise magnitude Z with the phase of Y: Z .* exp(i*angle(Y)).
// Where |Y| is exactly zero the phase is taken as 0, i.e. the entry is Z + 0i.
ComplexMatrix phase_project(const RealMatrix& z, const ComplexMatrix& y);

// Squared Frobenius norm.
double frob_norm_sq(const ComplexMatrix& a);
double frob_norm_sq(const RealMatrix& a);

// max_ij |a_ij - b_ij| (complex modulus for complex matrices).
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
double max_abs_diff(const RealMatrix& a, const RealMatrix& b);

bool all_finite(const ComplexMatrix& a);
bool all_finite(const RealMatrix& a);

}  // namespace linops
}  // namespace raqr
