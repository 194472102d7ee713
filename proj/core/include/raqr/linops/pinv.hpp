// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "raqr/linops/matrix.hpp"

namespace raqr::linops {

// Moore-Penrose pseudo-inverse via SVD. Singular values below
// tau = eps * max(rows, cols) * sigma_max are treated as zero, so a
// near-rank-deficient pilot matrix degrades gracefully instead of blowing
// up. An all-zero input returns the all-zero matrix of transposed shape.
ComplexMatrix pseudo_inverse(const ComplexMatrix& a);

// sigma_max / sigma_min; +inf if numerically rank-deficient.
double condition_number(const ComplexMatrix& a);

// Numerical rank under the same tau threshold as pseudo_inverse.
std::size_t numerical_rank(const ComplexMatrix& a);

}  // namespace raqr::linops
