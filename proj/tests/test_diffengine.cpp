// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "oracles.hpp"
#include "raqr/diff/adam.hpp"
#include "raqr/diff/tape.hpp"

using namespace raqr;
using diff::Shape;
using diff::Tape;
using diff::Var;

namespace {

// Builds a scalar loss from leaf tensors; re-invoked for every finite
// difference probe.
using LossBuilder = std::function<Var(Tape&, std::vector<Var>&)>;

// Central finite differences with h = 1e-6 * max(1, |x|), compared to the
// recorded backward pass at relative error < 1e-4.
void check_gradients(const LossBuilder& build, std::vector<Shape> shapes,
                     Rng& rng, double lo = -2.0, double hi = 2.0) {
  std::vector<std::vector<double>> inputs;
  for (const auto& s : shapes) {
    std::vector<double> v(s.count());
    for (auto& x : v) x = rng.uniform(lo, hi);
    inputs.push_back(std::move(v));
  }

  auto eval = [&](const std::vector<std::vector<double>>& vals,
                  bool with_grad) -> std::pair<double, std::vector<std::vector<double>>> {
    Tape tape;
    std::vector<Var> leaves;
    for (std::size_t i = 0; i < shapes.size(); ++i)
      leaves.push_back(tape.leaf(shapes[i], vals[i], with_grad));
    Var loss = build(tape, leaves);
    std::vector<std::vector<double>> grads;
    if (with_grad) {
      tape.backward(loss);
      for (auto& l : leaves) grads.push_back(l.grad());
    }
    return {loss.value()[0], std::move(grads)};
  };

  const auto [loss0, grads] = eval(inputs, true);
  REQUIRE(std::isfinite(loss0));
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    for (std::size_t j = 0; j < inputs[t].size(); ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(inputs[t][j]));
      auto plus = inputs;
      plus[t][j] += h;
      auto minus = inputs;
      minus[t][j] -= h;
      const double fd = (eval(plus, false).first - eval(minus, false).first) / (2 * h);
      const double an = grads[t][j];
      const double denom = std::max({0.01, std::abs(fd), std::abs(an)});
      CHECK(std::abs(an - fd) / denom < 1e-4);
    }
  }
}

// Weighted sum turns any tensor output into a scalar, exercising generic
// cotangents through the primitive under test.
Var weighted(Tape& tape, const Var& out, Rng& rng) {
  std::vector<double> w(out.shape().count());
  for (auto& x : w) x = rng.uniform(-1.0, 1.0);
  return diff::sum(diff::hadamard(out, tape.leaf(out.shape(), w, false)));
}

}  // namespace

TEST_CASE("gradient check: every primitive, 20 random instances each") {
  Rng rng(2024);
  for (int rep = 0; rep < 20; ++rep) {
    // add / sub / hadamard
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::add(l[0], l[1]), rng);
        },
        {{3, 4}, {3, 4}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::sub(l[0], l[1]), rng);
        },
        {{3, 4}, {3, 4}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::hadamard(l[0], l[1]), rng);
        },
        {{3, 4}, {3, 4}}, rng);
    // matmul / transpose / reshape / concat / slice
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::matmul(l[0], l[1]), rng);
        },
        {{3, 4}, {4, 2}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::transpose(l[0]), rng);
        },
        {{3, 5}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::reshape(l[0], {10, 2}), rng);
        },
        {{4, 5}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::concat_cols(l[0], l[1]), rng);
        },
        {{3, 2}, {3, 4}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::slice(l[0], 1, 2, 2, 3), rng);
        },
        {{4, 6}}, rng);
    // pointwise nonlinearities
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) { return weighted(t, diff::exp(l[0]), rng); },
        {{2, 3}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::log1p(l[0]), rng);
        },
        {{2, 3}}, rng, 0.0, 3.0);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::sigmoid(l[0]), rng);
        },
        {{2, 3}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) { return weighted(t, diff::gelu(l[0]), rng); },
        {{2, 3}}, rng);
    // relu away from the kink
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) { return weighted(t, diff::relu(l[0]), rng); },
        {{2, 3}}, rng, 0.5, 2.0);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::square(l[0]), rng);
        },
        {{2, 3}}, rng);
    // reductions, broadcasts, normalizations
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          (void)t;
          return diff::mean(diff::square(l[0]));
        },
        {{3, 3}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::scalar_mul(l[0], l[1]), rng);
        },
        {{3, 3}, {1, 1}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::scale_const(l[0], -1.7), rng);
        },
        {{3, 3}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::add_rowvec(l[0], l[1]), rng);
        },
        {{3, 4}, {1, 4}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::mul_rowvec(l[0], l[1]), rng);
        },
        {{3, 4}, {1, 4}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::softmax_rows(l[0]), rng);
        },
        {{3, 5}}, rng);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::layer_norm_rows(l[0]), rng);
        },
        {{3, 6}}, rng);
    // complex pieces: keep inputs away from the origin kink
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::complex_magnitude(l[0], l[1]), rng);
        },
        {{2, 3}, {2, 3}}, rng, 0.4, 2.0);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          auto pair = diff::complex_phase_apply(l[0], {l[1], l[2]});
          return diff::add(weighted(t, pair.re, rng), weighted(t, pair.im, rng));
        },
        {{2, 3}, {2, 3}, {2, 3}}, rng, 0.4, 2.0);
    check_gradients(
        [&](Tape& t, std::vector<Var>& l) {
          return weighted(t, diff::bessel_ratio(l[0]), rng);
        },
        {{2, 3}}, rng, 0.1, 60.0);
  }
}

TEST_CASE("sigmoid: value 0.5 and derivative 0.25 at zero") {
  Tape tape;
  Var x = tape.leaf({1, 1}, {0.0}, true);
  Var y = diff::sigmoid(x);
  CHECK(y.value()[0] == doctest::Approx(0.5).epsilon(1e-15));
  tape.backward(diff::sum(y));
  CHECK(x.grad()[0] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("complex magnitude gradient at 3+4i is (0.6, 0.8)") {
  Tape tape;
  Var re = tape.leaf({1, 1}, {3.0}, true);
  Var im = tape.leaf({1, 1}, {4.0}, true);
  Var m = diff::complex_magnitude(re, im);
  CHECK(m.value()[0] == doctest::Approx(5.0).epsilon(1e-15));
  tape.backward(m);
  CHECK(re.grad()[0] == doctest::Approx(0.6).epsilon(1e-14));
  CHECK(im.grad()[0] == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("backward of sum is an all-ones gradient") {
  Rng rng(4);
  Tape tape;
  std::vector<double> v(12);
  for (auto& x : v) x = rng.uniform(-3.0, 3.0);
  Var x = tape.leaf({3, 4}, v, true);
  tape.backward(diff::sum(x));
  for (double g : x.grad()) CHECK(g == 1.0);
}

TEST_CASE("backward of ||x||^2 / 2 is x itself") {
  Rng rng(5);
  Tape tape;
  std::vector<double> v(10);
  for (auto& x : v) x = rng.uniform(-3.0, 3.0);
  Var x = tape.leaf({10, 1}, v, true);
  tape.backward(diff::scale_const(diff::sum(diff::square(x)), 0.5));
  for (std::size_t i = 0; i < v.size(); ++i)
    CHECK(x.grad()[i] == doctest::Approx(v[i]).epsilon(1e-14));
}

TEST_CASE("backward on a non-scalar node is rejected") {
  Tape tape;
  Var x = tape.leaf({2, 2}, {1, 2, 3, 4}, true);
  CHECK_THROWS_AS(tape.backward(diff::square(x)), DomainError);
}

TEST_CASE("shape mismatches name the primitive") {
  Tape tape;
  Var a = tape.leaf({2, 2}, {1, 2, 3, 4}, false);
  Var b = tape.leaf({1, 4}, {1, 2, 3, 4}, false);
  CHECK_THROWS_WITH_AS(diff::add(a, b), doctest::Contains("add"), ShapeError);
  CHECK_THROWS_WITH_AS(diff::matmul(b, b), doctest::Contains("matmul"), ShapeError);
  CHECK_THROWS_WITH_AS(diff::add_rowvec(a, a), doctest::Contains("add_rowvec"),
                       ShapeError);
}

TEST_CASE("identical graphs produce bitwise-identical gradients") {
  auto run = [] {
    Rng rng(77);
    Tape tape;
    std::vector<double> v(24);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    Var x = tape.leaf({4, 6}, v, true);
    Var y = diff::layer_norm_rows(diff::gelu(diff::matmul(x, diff::transpose(x))));
    tape.backward(diff::mean(diff::square(y)));
    return x.grad();
  };
  const auto g1 = run();
  const auto g2 = run();
  REQUIRE(g1.size() == g2.size());
  for (std::size_t i = 0; i < g1.size(); ++i) CHECK(g1[i] == g2[i]);
}

TEST_CASE("magnitude gradient norm is at most 1, zero at the origin") {
  Rng rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    Tape tape;
    Var re = tape.leaf({1, 1}, {rng.uniform(-5.0, 5.0)}, true);
    Var im = tape.leaf({1, 1}, {rng.uniform(-5.0, 5.0)}, true);
    tape.backward(diff::complex_magnitude(re, im));
    const double norm = std::hypot(re.grad()[0], im.grad()[0]);
    CHECK(norm <= 1.0 + 1e-12);
  }
  Tape tape;
  Var re = tape.leaf({1, 1}, {0.0}, true);
  Var im = tape.leaf({1, 1}, {0.0}, true);
  tape.backward(diff::complex_magnitude(re, im));
  CHECK(re.grad()[0] == 0.0);
  CHECK(im.grad()[0] == 0.0);
}

TEST_CASE("complex_phase_apply: clamped region keeps the output bounded") {
  Tape tape;
  Var z = tape.leaf({1, 1}, {3.0}, false);
  Var re = tape.leaf({1, 1}, {1e-20}, true);
  Var im = tape.leaf({1, 1}, {0.0}, true);
  auto out = diff::complex_phase_apply(z, {re, im});
  // |y| = 1e-20 < clamp=1e-12: surrogate returns z * y / clamp ~ 3e-8, not
  // the unit-phasor magnitude 3.
  CHECK(out.re.value()[0] == doctest::Approx(3.0 * 1e-20 / 1e-12));
  CHECK(std::isfinite(out.re.value()[0]));
  tape.backward(diff::sum(out.re));
  CHECK(std::isfinite(re.grad()[0]));
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  std::vector<double> params{1.0, -2.0, 3.0};
  const std::vector<double> grads{0.0, 0.0, 0.0};
  diff::AdamState state;
  adam_step(params, grads, state, {});
  CHECK(params[0] == 1.0);
  CHECK(params[1] == -2.0);
  CHECK(params[2] == 3.0);
}

TEST_CASE("adam: first step matches the closed form") {
  // t=1: m_hat = g, v_hat = g^2, update = -lr * g / (|g| + eps)
  std::vector<double> params{0.5, -1.5};
  const std::vector<double> grads{0.3, -0.02};
  diff::AdamConfig cfg;
  diff::AdamState state;
  adam_step(params, grads, state, cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    const double expected =
        (i == 0 ? 0.5 : -1.5) -
        cfg.lr * grads[i] / (std::abs(grads[i]) + cfg.eps);
    CHECK(params[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("adam: identical scalar problems step bitwise identically") {
  std::vector<double> p1{0.7}, p2{0.7};
  diff::AdamState s1, s2;
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> g{std::sin(0.1 * i)};
    adam_step(p1, g, s1, {});
    adam_step(p2, g, s2, {});
  }
  CHECK(p1[0] == p2[0]);
  CHECK(s1.m[0] == s2.m[0]);
  CHECK(s1.v[0] == s2.v[0]);
}

TEST_CASE("clip_global_norm scales gradients to the budget") {
  std::vector<double> g1{3.0, 0.0}, g2{0.0, 4.0};
  const double pre = diff::clip_global_norm({&g1, &g2}, 1.0);
  CHECK(pre == doctest::Approx(5.0).epsilon(1e-14));
  const double post = std::sqrt(g1[0] * g1[0] + g2[1] * g2[1]);
  CHECK(post == doctest::Approx(1.0).epsilon(1e-12));
}
