// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace raqr::linops {

// R(kappa) = I1(kappa)/I0(kappa), the soft-filter weight of the EM-GS update.
//
// kappa < 50: ratio of the two power series, each summed to machine
// convergence (all terms positive, no cancellation). kappa >= 50: ratio of
// the scaled asymptotic series for I1 and I0, truncated adaptively; the
// e^kappa/sqrt(2 pi kappa) prefactors cancel, so nothing overflows even
// though I0 itself would overflow near kappa ~ 700.
//
// Result is in [0, 1), monotone nondecreasing, and accurate to ~2e-15
// absolute over [0, 1e6]. Throws DomainError for negative or non-finite
// input.
double bessel_ratio(double kappa);

// Derivative dR/dkappa = 1 - R/kappa - R^2 (from I0' = I1, I1' = I0 - I1/k);
// the kappa -> 0 limit is 1/2. Used by the differentiable fixed-filter path.
double bessel_ratio_derivative(double kappa);

}  // namespace raqr::linops
