// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "raqr/linops/bessel.hpp"
#include "raqr/linops/matrix.hpp"
#include "raqr/linops/pinv.hpp"

using namespace raqr;

TEST_CASE("matmul: identity leaves any 2x2 matrix unchanged") {
  Rng rng(11);
  const ComplexMatrix x = oracles::random_complex(2, 2, rng);
  const ComplexMatrix y = linops::matmul(ComplexMatrix::identity(2), x);
  CHECK(linops::max_abs_diff(x, y) == 0.0);
}

TEST_CASE("matmul: [[i]] times [[i]] is [[-1]]") {
  ComplexMatrix a(1, 1);
  a.set(0, 0, {0.0, 1.0});
  const ComplexMatrix c = linops::matmul(a, a);
  CHECK(c.re(0, 0) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(c.im(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("matmul: random 3x4 times 4x2 matches the naive triple-loop oracle") {
  Rng rng(42);
  const ComplexMatrix a = oracles::random_complex(3, 4, rng);
  const ComplexMatrix b = oracles::random_complex(4, 2, rng);
  const ComplexMatrix fast = linops::matmul(a, b);
  const ComplexMatrix slow = oracles::naive_matmul(a, b);
  CHECK(linops::max_abs_diff(fast, slow) < 1e-13);
}

TEST_CASE("matmul: dimension mismatch names both shapes") {
  const ComplexMatrix a(2, 3), b(4, 2);
  CHECK_THROWS_WITH_AS(linops::matmul(a, b),
                       doctest::Contains("2x3"), ShapeError);
  try {
    linops::matmul(a, b);
  } catch (const ShapeError& e) {
    CHECK(std::string(e.what()).find("4x2") != std::string::npos);
  }
}

TEST_CASE("pseudo_inverse: identity") {
  const ComplexMatrix p = linops::pseudo_inverse(ComplexMatrix::identity(4));
  CHECK(linops::max_abs_diff(p, ComplexMatrix::identity(4)) < 1e-14);
}

TEST_CASE("pseudo_inverse: diagonal inverse") {
  ComplexMatrix d(2, 2);
  d.set(0, 0, {2.0, 0.0});
  d.set(1, 1, {4.0, 0.0});
  const ComplexMatrix p = linops::pseudo_inverse(d);
  CHECK(p.at(0, 0).real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p.at(1, 1).real() == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(std::abs(p.at(0, 1)) < 1e-15);
}

TEST_CASE("pseudo_inverse: random full-rank 4x20 gives A A+ = I") {
  Rng rng(7);
  const ComplexMatrix a = oracles::random_complex(4, 20, rng);
  const ComplexMatrix ap = linops::pseudo_inverse(a);
  const ComplexMatrix prod = linops::matmul(a, ap);
  CHECK(linops::max_abs_diff(prod, ComplexMatrix::identity(4)) < 1e-9);
}

TEST_CASE("pseudo_inverse: all-zero matrix returns zero of transposed shape") {
  const ComplexMatrix z(3, 5);
  const ComplexMatrix p = linops::pseudo_inverse(z);
  CHECK(p.rows() == 5);
  CHECK(p.cols() == 3);
  CHECK(linops::frob_norm_sq(p) == 0.0);
}

TEST_CASE("pseudo_inverse: four Moore-Penrose conditions on random K x P") {
  Rng rng(99);
  for (int rep = 0; rep < 8; ++rep) {
    const std::size_t k = 2 + rep % 4;
    const std::size_t p = k + 4 + (rep % 3) * 5;
    const ComplexMatrix a = oracles::random_complex(k, p, rng);
    const ComplexMatrix ap = linops::pseudo_inverse(a);
    const ComplexMatrix a_ap = linops::matmul(a, ap);
    const ComplexMatrix ap_a = linops::matmul(ap, a);
    const double scale = std::sqrt(linops::frob_norm_sq(a));
    // A A+ A = A
    CHECK(linops::max_abs_diff(linops::matmul(a_ap, a), a) / scale < 1e-9);
    // A+ A A+ = A+
    CHECK(linops::max_abs_diff(linops::matmul(ap_a, ap), ap) / scale < 1e-9);
    // (A A+)^H = A A+
    CHECK(linops::max_abs_diff(linops::conjugate(linops::transpose(a_ap)), a_ap) < 1e-9);
    // (A+ A)^H = A+ A
    CHECK(linops::max_abs_diff(linops::conjugate(linops::transpose(ap_a)), ap_a) < 1e-9);
  }
}

TEST_CASE("bessel_ratio: R(0) = 0") { CHECK(linops::bessel_ratio(0.0) == 0.0); }

TEST_CASE("bessel_ratio: R(1) matches the power-series oracle") {
  const double expected = static_cast<double>(oracles::bessel_ratio_series_ld(1.0L));
  CHECK(expected == doctest::Approx(0.4463899658965345).epsilon(1e-12));
  CHECK(std::abs(linops::bessel_ratio(1.0) - expected) < 1e-10);
}

TEST_CASE("bessel_ratio: R(500) matches the asymptotic expansion") {
  // 1 - 1/(2k) - 1/(8k^2) - 1/(8k^3) - 25/(128k^4), truncation ~ 1e-14 there
  const double k = 500.0;
  const double expansion =
      1.0 - 1.0 / (2 * k) - 1.0 / (8 * k * k) - 1.0 / (8 * k * k * k) -
      25.0 / (128 * k * k * k * k);
  CHECK(std::abs(linops::bessel_ratio(k) - expansion) / expansion < 1e-8);
}

TEST_CASE("bessel_ratio: monotone nondecreasing on a log grid") {
  double prev = 0.0;
  for (int i = 0; i <= 600; ++i) {
    const double kappa = std::pow(10.0, -8.0 + 14.0 * i / 600.0);
    const double r = linops::bessel_ratio(kappa);
    CHECK(r >= prev);
    CHECK(r >= 0.0);
    CHECK(r < 1.0);
    prev = r;
  }
}

TEST_CASE("bessel_ratio: series and asymptotic branches agree around the crossover") {
  // Both the series oracle and the CF oracle are valid in [35, 70]; the
  // implementation switches branch at 50.
  for (double kappa = 35.0; kappa <= 70.0; kappa += 0.5) {
    const double r = linops::bessel_ratio(kappa);
    const double s = static_cast<double>(oracles::bessel_ratio_series_ld(kappa));
    CHECK(std::abs(r - s) / s < 1e-9);
  }
}

TEST_CASE("bessel_ratio: cf oracle and series oracle agree with each other") {
  for (double kappa : {0.1, 1.0, 5.0, 20.0, 80.0, 150.0}) {
    const long double cf = oracles::bessel_ratio_cf_ld(kappa);
    const long double se = oracles::bessel_ratio_series_ld(kappa);
    CHECK(std::fabs(static_cast<double>(cf - se)) < 1e-14);
  }
}

TEST_CASE("bessel_ratio: rejects negative and non-finite input") {
  CHECK_THROWS_AS(linops::bessel_ratio(-1.0), DomainError);
  CHECK_THROWS_AS(linops::bessel_ratio(std::nan("")), DomainError);
  CHECK_THROWS_AS(linops::bessel_ratio(std::numeric_limits<double>::infinity()),
                  DomainError);
}

TEST_CASE("bessel_ratio_derivative: matches central differences") {
  for (double kappa : {0.5, 2.0, 10.0, 60.0, 400.0}) {
    const double h = 1e-6 * std::max(1.0, kappa);
    const double fd =
        (linops::bessel_ratio(kappa + h) - linops::bessel_ratio(kappa - h)) / (2 * h);
    CHECK(linops::bessel_ratio_derivative(kappa) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(linops::bessel_ratio_derivative(0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("phase_project: Z = |Y| returns Y") {
  Rng rng(3);
  const ComplexMatrix y = oracles::random_complex(4, 5, rng);
  const ComplexMatrix out = linops::phase_project(linops::magnitude(y), y);
  CHECK(linops::max_abs_diff(out, y) < 1e-14);
}

TEST_CASE("phase_project: zero-phase convention at Y = 0") {
  RealMatrix z(1, 1);
  z(0, 0) = 3.0;
  const ComplexMatrix y(1, 1);  // zero
  const ComplexMatrix out = linops::phase_project(z, y);
  CHECK(out.re(0, 0) == 3.0);
  CHECK(out.im(0, 0) == 0.0);
}

TEST_CASE("phase_project: magnitude 2 at phase pi/4") {
  RealMatrix z(1, 1);
  z(0, 0) = 2.0;
  ComplexMatrix y(1, 1);
  y.set(0, 0, {1.0, 1.0});
  const ComplexMatrix out = linops::phase_project(z, y);
  // polar oracle: 2 e^{i pi/4} = sqrt2 + i sqrt2
  const double expected = 2.0 * std::cos(std::atan2(1.0, 1.0));
  CHECK(out.re(0, 0) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(out.im(0, 0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("phase_project: idempotent in magnitude") {
  Rng rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const ComplexMatrix y = oracles::random_complex(3, 4, rng);
    const RealMatrix z = oracles::random_real(3, 4, rng, 0.0, 5.0);
    const ComplexMatrix out = linops::phase_project(z, y);
    CHECK(linops::max_abs_diff(linops::magnitude(out), z) < 1e-13);
  }
}

TEST_CASE("phase_project: shape mismatch throws") {
  CHECK_THROWS_AS(linops::phase_project(RealMatrix(2, 2), ComplexMatrix(3, 2)),
                  ShapeError);
}

TEST_CASE("elementwise: |3+4i| = 5") {
  ComplexMatrix a(1, 1);
  a.set(0, 0, {3.0, 4.0});
  CHECK(linops::magnitude(a)(0, 0) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("elementwise: Hadamard with all-ones is the identity") {
  Rng rng(23);
  const ComplexMatrix a = oracles::random_complex(4, 4, rng);
  ComplexMatrix ones(4, 4);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j) ones.set(i, j, {1.0, 0.0});
  CHECK(linops::max_abs_diff(linops::hadamard(a, ones), a) == 0.0);
}

TEST_CASE("elementwise: Hadamard equals naive per-entry products on 5x5") {
  Rng rng(31);
  const ComplexMatrix a = oracles::random_complex(5, 5, rng);
  const ComplexMatrix b = oracles::random_complex(5, 5, rng);
  const ComplexMatrix h = linops::hadamard(a, b);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::abs(h.at(i, j) - a.at(i, j) * b.at(i, j)) < 1e-14);
}

TEST_CASE("elementwise: binary ops reject mismatched shapes") {
  CHECK_THROWS_AS(linops::add(ComplexMatrix(2, 2), ComplexMatrix(2, 3)), ShapeError);
  CHECK_THROWS_AS(linops::hadamard(RealMatrix(1, 2), RealMatrix(2, 1)), ShapeError);
  CHECK_THROWS_AS(linops::subtract(ComplexMatrix(4, 1), ComplexMatrix(1, 4)),
                  ShapeError);
}

TEST_CASE("exported operations keep entries finite") {
  Rng rng(5);
  const ComplexMatrix a = oracles::random_complex(6, 3, rng, 100.0);
  const ComplexMatrix b = oracles::random_complex(3, 6, rng, 100.0);
  CHECK(linops::all_finite(linops::matmul(a, b)));
  CHECK(linops::all_finite(linops::pseudo_inverse(a)));
  CHECK(linops::all_finite(linops::magnitude(a)));
}
