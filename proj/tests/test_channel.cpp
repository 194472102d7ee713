// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "raqr/channel/dataset.hpp"
#include "raqr/channel/model.hpp"
#include "raqr/linops/pinv.hpp"

using namespace raqr;
using channel::ScenarioConfig;

namespace {

ScenarioConfig small_cfg() {
  ScenarioConfig cfg;
  cfg.num_antennas = 8;
  cfg.num_users = 2;
  cfg.num_pilots = 6;
  cfg.num_clusters = 2;
  cfg.rays_per_cluster = 2;
  cfg.snr_db = 10.0;
  cfg.seed = 123;
  return cfg;
}

}  // namespace

TEST_CASE("steering_vector: theta = 0 gives the all-ones vector") {
  const ComplexMatrix a = channel::steering_vector(0.0, 5, 0.5);
  for (std::size_t m = 0; m < 5; ++m) {
    CHECK(a.re(m, 0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(a.im(m, 0) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("steering_vector: theta = pi/2, half-wavelength, M = 2 gives [1, -1]") {
  const ComplexMatrix a = channel::steering_vector(std::numbers::pi / 2, 2, 0.5);
  CHECK(a.re(0, 0) == doctest::Approx(1.0));
  CHECK(a.re(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(a.im(1, 0)) < 1e-12);
}

TEST_CASE("steering_vector: theta = pi/6 matches per-entry complex exponentials") {
  const std::size_t m_total = 4;
  const ComplexMatrix a = channel::steering_vector(std::numbers::pi / 6, m_total, 0.5);
  for (std::size_t m = 0; m < m_total; ++m) {
    // sin(pi/6) = 1/2, so entry m = exp(j pi m / 2)
    const std::complex<double> expected =
        std::exp(std::complex<double>(0.0, std::numbers::pi * 0.5 * double(m)));
    CHECK(std::abs(a.at(m, 0) - expected) < 1e-14);
  }
}

TEST_CASE("steering_vector: always unit modulus per entry") {
  Rng rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const double theta = rng.uniform(-1.5, 1.5);
    const ComplexMatrix a = channel::steering_vector(theta, 16, 0.5);
    for (std::size_t m = 0; m < 16; ++m)
      CHECK(std::abs(a.at(m, 0)) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("steering_vector: non-finite angle throws") {
  CHECK_THROWS_AS(channel::steering_vector(std::nan(""), 4, 0.5), DomainError);
}

TEST_CASE("generate_channel: Table-scale dims give a 32x4 matrix") {
  ScenarioConfig cfg;  // defaults are the paper-scale values
  Rng rng = substream(cfg.seed, StreamId::channel);
  const auto real = channel::generate_channel(cfg, rng);
  CHECK(real.H.rows() == 32);
  CHECK(real.H.cols() == 4);
  CHECK(real.doas.size() == 4);
  CHECK(real.doas[0].size() == cfg.total_rays());
}

TEST_CASE("channel_from_rays: single ray with unit gain at broadside") {
  const ComplexMatrix h =
      channel::channel_from_rays({0.0}, {{1.0, 0.0}}, 9, 0.5);
  // sqrt(M/1) * all-ones
  for (std::size_t m = 0; m < 9; ++m) {
    CHECK(h.re(m, 0) == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(h.im(m, 0) == doctest::Approx(0.0).epsilon(1e-14));
  }
}

TEST_CASE("generate_channel: round-trip from stored rays reproduces H") {
  ScenarioConfig cfg = small_cfg();
  Rng rng = substream(cfg.seed, StreamId::channel);
  const auto real = channel::generate_channel(cfg, rng);
  for (std::size_t k = 0; k < cfg.num_users; ++k) {
    const ComplexMatrix h = channel::channel_from_rays(
        real.doas[k], real.gains[k], cfg.num_antennas, cfg.spacing_over_wavelength);
    double worst = 0.0;
    for (std::size_t m = 0; m < cfg.num_antennas; ++m)
      worst = std::max(worst, std::abs(h.at(m, 0) - real.H.at(m, k)));
    CHECK(worst / std::sqrt(linops::frob_norm_sq(real.H)) < 1e-12);
  }
}

TEST_CASE("generate_channel: DoAs stay inside the open interval") {
  ScenarioConfig cfg = small_cfg();
  Rng rng = substream(cfg.seed, StreamId::channel);
  for (int rep = 0; rep < 200; ++rep) {
    const auto real = channel::generate_channel(cfg, rng);
    for (const auto& user : real.doas)
      for (double th : user) {
        CHECK(th > -std::numbers::pi / 2);
        CHECK(th < std::numbers::pi / 2);
      }
  }
}

TEST_CASE("generate_channel: Monte-Carlo norm matches the sum-derived value") {
  // E||h_k||^2 = (M/N) * sum_r E|g|^2 ||a||^2 = (M/N) * N * M = M^2.
  ScenarioConfig cfg = small_cfg();  // M=8 -> expect 64
  const double expected = 64.0;
  double acc = 0.0;
  const int trials = 100000;
  Rng rng = substream(77, StreamId::channel);
  for (int i = 0; i < trials; ++i) {
    const auto real = channel::generate_channel(cfg, rng);
    acc += linops::frob_norm_sq(real.H) / static_cast<double>(cfg.num_users);
  }
  const double mc = acc / trials;
  CHECK(std::abs(mc - expected) / expected < 0.02);
}

TEST_CASE("generate_pilots: unit-modulus entries") {
  ScenarioConfig cfg = small_cfg();
  Rng rng = substream(cfg.seed, StreamId::pilots);
  const ComplexMatrix s = channel::generate_pilots(cfg, rng);
  for (std::size_t p = 0; p < s.rows(); ++p)
    for (std::size_t k = 0; k < s.cols(); ++k)
      CHECK(std::abs(s.at(p, k)) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("generate_pilots: DFT pilots are Hermitian-orthogonal, S^H S = P I") {
  ScenarioConfig cfg = small_cfg();
  cfg.num_pilots = 6;
  cfg.num_users = 6;
  cfg.pilot_design = channel::PilotDesign::dft;
  Rng rng(1);
  const ComplexMatrix s = channel::generate_pilots(cfg, rng);
  const ComplexMatrix gram =
      linops::matmul(linops::conjugate(linops::transpose(s)), s);
  ComplexMatrix expected = ComplexMatrix::identity(6);
  for (std::size_t i = 0; i < 6; ++i) expected.re(i, i) = 6.0;
  CHECK(linops::max_abs_diff(gram, expected) < 1e-12);
}

TEST_CASE("generate_pilots: condition number below 1e3 over many seeds") {
  ScenarioConfig cfg;
  cfg.num_pilots = 20;
  cfg.num_users = 4;
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    Rng rng = substream(seed, StreamId::pilots);
    const ComplexMatrix s = channel::generate_pilots(cfg, rng);
    worst = std::max(worst, linops::condition_number(linops::transpose(s)));
  }
  CHECK(worst < 1e3);
}

TEST_CASE("generate_pilots: P < K is rejected") {
  ScenarioConfig cfg = small_cfg();
  cfg.num_pilots = 1;
  Rng rng(0);
  CHECK_THROWS_AS(channel::generate_pilots(cfg, rng), ConfigError);
}

TEST_CASE("generate_lo: 10 dB RSR at unit signal power gives |b|^2 = 10") {
  ScenarioConfig cfg = small_cfg();
  cfg.rsr_db = 10.0;
  Rng rng(9);
  const ComplexMatrix b = channel::generate_lo(cfg, 1.0, rng);
  for (std::size_t m = 0; m < b.rows(); ++m)
    CHECK(std::norm(b.at(m, 0)) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("generate_lo: 0 dB RSR gives unit magnitudes") {
  ScenarioConfig cfg = small_cfg();
  cfg.rsr_db = 0.0;
  Rng rng(9);
  const ComplexMatrix b = channel::generate_lo(cfg, 1.0, rng);
  for (std::size_t m = 0; m < b.rows(); ++m)
    CHECK(std::abs(b.at(m, 0)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("generate_lo: empirical LO-to-signal power ratio matches the RSR") {
  ScenarioConfig cfg = small_cfg();
  cfg.rsr_db = 10.0;
  double lo_power = 0.0, sig_power = 0.0;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const std::uint64_t seed = derive_seed(1000, StreamId::trial, i);
    Rng rc = substream(seed, StreamId::channel);
    Rng rp = substream(seed, StreamId::pilots);
    Rng rl = substream(seed, StreamId::lo);
    const auto real = channel::generate_channel(cfg, rc);
    const ComplexMatrix s = channel::generate_pilots(cfg, rp);
    const double power = channel::mean_signal_power(real.H, s);
    const ComplexMatrix b = channel::generate_lo(cfg, power, rl);
    lo_power += linops::frob_norm_sq(b) / static_cast<double>(b.rows());
    sig_power += power;
  }
  const double measured_rsr = lo_power / sig_power;
  CHECK(std::abs(measured_rsr - 10.0) / 10.0 < 0.01);
}

TEST_CASE("measure: zero channel and zero noise leave only the LO magnitude") {
  ScenarioConfig cfg = small_cfg();
  const ComplexMatrix h(cfg.num_antennas, cfg.num_users);
  Rng rp = substream(1, StreamId::pilots);
  Rng rl = substream(1, StreamId::lo);
  Rng rn = substream(1, StreamId::noise);
  const ComplexMatrix s = channel::generate_pilots(cfg, rp);
  const ComplexMatrix b = channel::generate_lo(cfg, 1.0, rl);
  const auto meas = channel::measure(h, s, b, 0.0, rn);
  for (std::size_t p = 0; p < meas.Z.cols(); ++p)
    for (std::size_t m = 0; m < meas.Z.rows(); ++m)
      CHECK(meas.Z(m, p) == doctest::Approx(std::abs(b.at(m, 0))).epsilon(1e-14));
}

TEST_CASE("measure: noiseless magnitudes match a direct recomputation") {
  ScenarioConfig cfg = small_cfg();
  Rng rc = substream(4, StreamId::channel);
  Rng rp = substream(4, StreamId::pilots);
  Rng rl = substream(4, StreamId::lo);
  Rng rn = substream(4, StreamId::noise);
  const auto real = channel::generate_channel(cfg, rc);
  const ComplexMatrix s = channel::generate_pilots(cfg, rp);
  const ComplexMatrix b =
      channel::generate_lo(cfg, channel::mean_signal_power(real.H, s), rl);
  const auto meas = channel::measure(real.H, s, b, 0.0, rn);
  const ComplexMatrix field = linops::add(
      linops::matmul(real.H, linops::transpose(s)), meas.B);
  CHECK(linops::max_abs_diff(meas.Z, linops::magnitude(field)) < 1e-13);
}

TEST_CASE("measure: magnitudes are nonnegative across random draws") {
  ScenarioConfig cfg = small_cfg();
  for (std::uint64_t i = 0; i < 1000; ++i) {
    cfg.seed = i;
    const auto r = channel::realize(cfg);
    for (double z : r.meas.Z.data()) CHECK(z >= 0.0);
  }
}

TEST_CASE("measure: invariant to a global phase rotation at zero noise") {
  ScenarioConfig cfg = small_cfg();
  Rng rc = substream(6, StreamId::channel);
  Rng rp = substream(6, StreamId::pilots);
  Rng rl = substream(6, StreamId::lo);
  const auto real = channel::generate_channel(cfg, rc);
  const ComplexMatrix s = channel::generate_pilots(cfg, rp);
  const ComplexMatrix b =
      channel::generate_lo(cfg, channel::mean_signal_power(real.H, s), rl);
  Rng rn1(0), rn2(0);
  const auto meas1 = channel::measure(real.H, s, b, 0.0, rn1);
  const std::complex<double> rot = std::polar(1.0, 1.234
  );
  const auto meas2 =
      channel::measure(linops::scale(real.H, rot), s, linops::scale(b, rot), 0.0, rn2);
  CHECK(linops::max_abs_diff(meas1.Z, meas2.Z) < 1e-13);
}

TEST_CASE("snr_calibrate: 0 dB gives sigma2 equal to the mean signal power") {
  ScenarioConfig cfg = small_cfg();
  cfg.snr_db = 0.0;
  Rng rc = substream(8, StreamId::channel);
  Rng rp = substream(8, StreamId::pilots);
  const auto real = channel::generate_channel(cfg, rc);
  const ComplexMatrix s = channel::generate_pilots(cfg, rp);
  const double sigma2 = channel::snr_calibrate(cfg, real.H, s);
  CHECK(sigma2 ==
        doctest::Approx(channel::mean_signal_power(real.H, s)).epsilon(1e-12));
}

TEST_CASE("snr_calibrate: decibel arithmetic") {
  ScenarioConfig cfg = small_cfg();
  Rng rc = substream(8, StreamId::channel);
  Rng rp = substream(8, StreamId::pilots);
  const auto real = channel::generate_channel(cfg, rc);
  const ComplexMatrix s = channel::generate_pilots(cfg, rp);
  cfg.snr_db = 10.0;
  const double s10 = channel::snr_calibrate(cfg, real.H, s);
  cfg.snr_db = 13.010299956639812;
  const double s13 = channel::snr_calibrate(cfg, real.H, s);
  CHECK(s10 == doctest::Approx(2.0 * s13).epsilon(1e-10));
}

TEST_CASE("snr_calibrate: empirical noise SNR within 2% over many draws") {
  ScenarioConfig cfg = small_cfg();
  cfg.snr_db = 7.0;
  Rng rc = substream(12, StreamId::channel);
  Rng rp = substream(12, StreamId::pilots);
  const auto real = channel::generate_channel(cfg, rc);
  const ComplexMatrix s = channel::generate_pilots(cfg, rp);
  const double sigma2 = channel::snr_calibrate(cfg, real.H, s);
  const double sig_power = channel::mean_signal_power(real.H, s);
  Rng noise(99);
  double w_power = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) w_power += std::norm(noise.normal_complex(sigma2));
  w_power /= draws;
  const double snr_lin = sig_power / w_power;
  CHECK(std::abs(10.0 * std::log10(snr_lin) - 7.0) < 0.1);
  CHECK(std::abs(w_power - sigma2) / sigma2 < 0.02);
}

TEST_CASE("snr_calibrate: zero channel is rejected") {
  ScenarioConfig cfg = small_cfg();
  const ComplexMatrix h(cfg.num_antennas, cfg.num_users);
  Rng rp = substream(3, StreamId::pilots);
  const ComplexMatrix s = channel::generate_pilots(cfg, rp);
  CHECK_THROWS_AS(channel::snr_calibrate(cfg, h, s), DomainError);
}

TEST_CASE("realize: identical (cfg, seed) reproduces bit-identical output") {
  ScenarioConfig cfg = small_cfg();
  cfg.seed = 20250809;
  const auto a = channel::realize(cfg);
  const auto b = channel::realize(cfg);
  CHECK(linops::max_abs_diff(a.chan.H, b.chan.H) == 0.0);
  CHECK(linops::max_abs_diff(a.meas.Z, b.meas.Z) == 0.0);
  CHECK(linops::max_abs_diff(a.meas.S, b.meas.S) == 0.0);
  CHECK(linops::max_abs_diff(a.meas.B, b.meas.B) == 0.0);
  CHECK(a.meas.sigma2 == b.meas.sigma2);
}

TEST_CASE("dataset: container round-trip is bit-exact") {
  namespace fs = std::filesystem;
  ScenarioConfig cfg = small_cfg();
  channel::Dataset ds;
  ds.scenario = cfg;
  ds.seed = 7;
  ds.snr_lo_db = -5.0;
  ds.snr_hi_db = 15.0;
  Rng rp = substream(7, StreamId::pilots);
  ds.S = channel::generate_pilots(cfg, rp);
  for (std::size_t i = 0; i < 3; ++i) {
    ScenarioConfig si = cfg;
    si.snr_db = -5.0 + 10.0 * static_cast<double>(i);
    const auto r =
        channel::realize_with_pilots(si, ds.S, derive_seed(7, StreamId::dataset, i));
    ds.H.push_back(r.chan.H);
    ds.B.push_back(r.meas.B);
    ds.Z.push_back(r.meas.Z);
    ds.sigma2.push_back(r.meas.sigma2);
    ds.snr_db_targets.push_back(si.snr_db);
  }

  const std::string path = (fs::temp_directory_path() / "raqr_ds_test.bin").string();
  channel::write_dataset(path, ds);
  const channel::Dataset back = channel::read_dataset(path);
  REQUIRE(back.size() == ds.size());
  CHECK(linops::max_abs_diff(back.S, ds.S) == 0.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(linops::max_abs_diff(back.H[i], ds.H[i]) == 0.0);
    CHECK(linops::max_abs_diff(back.B[i], ds.B[i]) == 0.0);
    CHECK(linops::max_abs_diff(back.Z[i], ds.Z[i]) == 0.0);
    CHECK(back.sigma2[i] == ds.sigma2[i]);
    CHECK(back.snr_db_targets[i] == ds.snr_db_targets[i]);
  }
  CHECK(back.scenario.num_antennas == cfg.num_antennas);
  CHECK(back.scenario.pilot_design == cfg.pilot_design);

  // writing the same dataset twice produces identical bytes
  const std::string path2 = (fs::temp_directory_path() / "raqr_ds_test2.bin").string();
  channel::write_dataset(path2, ds);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  const std::string b1((std::istreambuf_iterator<char>(f1)),
                       std::istreambuf_iterator<char>());
  const std::string b2((std::istreambuf_iterator<char>(f2)),
                       std::istreambuf_iterator<char>());
  CHECK(b1 == b2);
  fs::remove(path);
  fs::remove(path2);
}
