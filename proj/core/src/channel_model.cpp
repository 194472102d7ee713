// SPDX-License-Identifier: Apache-2.0
#include "raqr/channel/model.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "raqr/linops/pinv.hpp"

namespace raqr::channel {

std::string scenario_to_json_string(const ScenarioConfig& c) {
  nlohmann::json j{{"num_antennas", c.num_antennas},
                   {"num_users", c.num_users},
                   {"num_pilots", c.num_pilots},
                   {"num_clusters", c.num_clusters},
                   {"rays_per_cluster", c.rays_per_cluster},
                   {"spacing_over_wavelength", c.spacing_over_wavelength},
                   {"snr_db", c.snr_db},
                   {"rsr_db", c.rsr_db},
                   {"seed", c.seed},
                   {"pilot_design", to_string(c.pilot_design)}};
  return j.dump();
}

ScenarioConfig scenario_from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ScenarioConfig c;
  c.num_antennas = j.at("num_antennas").get<std::size_t>();
  c.num_users = j.at("num_users").get<std::size_t>();
  c.num_pilots = j.at("num_pilots").get<std::size_t>();
  c.num_clusters = j.at("num_clusters").get<std::size_t>();
  c.rays_per_cluster = j.at("rays_per_cluster").get<std::size_t>();
  c.spacing_over_wavelength = j.at("spacing_over_wavelength").get<double>();
  c.snr_db = j.at("snr_db").get<double>();
  c.rsr_db = j.at("rsr_db").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.pilot_design = pilot_design_from_string(j.at("pilot_design").get<std::string>());
  return c;
}

std::string to_string(PilotDesign d) {
  return d == PilotDesign::dft ? "dft" : "random_phase";
}

PilotDesign pilot_design_from_string(const std::string& s) {
  if (s == "dft") return PilotDesign::dft;
  if (s == "random_phase") return PilotDesign::random_phase;
  throw ConfigError("unknown pilot design '" + s + "' (random_phase|dft)");
}

void ScenarioConfig::validate() const {
  if (num_antennas < 1 || num_users < 1 || num_pilots < 1 || num_clusters < 1 ||
      rays_per_cluster < 1)
    throw ConfigError("scenario: all counts must be >= 1");
  if (num_pilots < num_users)
    throw ConfigError("scenario: P=" + std::to_string(num_pilots) +
                      " < K=" + std::to_string(num_users) +
                      "; the linear estimation stage needs P >= K");
  if (!(spacing_over_wavelength > 0.0))
    throw ConfigError("scenario: spacing_over_wavelength must be > 0");
}

ComplexMatrix steering_vector(double theta, std::size_t num_antennas,
                              double spacing_over_wavelength) {
  if (!std::isfinite(theta))
    throw DomainError("steering_vector: theta must be finite");
  ComplexMatrix a(num_antennas, 1);
  const double phase_step =
      2.0 * std::numbers::pi * spacing_over_wavelength * std::sin(theta);
  for (std::size_t m = 0; m < num_antennas; ++m) {
    const double phi = phase_step * static_cast<double>(m);
    a.re(m, 0) = std::cos(phi);
    a.im(m, 0) = std::sin(phi);
  }
  return a;
}

ComplexMatrix channel_from_rays(const std::vector<double>& doas,
                                const std::vector<std::complex<double>>& gains,
                                std::size_t num_antennas,
                                double spacing_over_wavelength) {
  if (doas.size() != gains.size())
    throw ShapeError("channel_from_rays: " + std::to_string(doas.size()) +
                     " DoAs vs " + std::to_string(gains.size()) + " gains");
  ComplexMatrix h(num_antennas, 1);
  const double norm =
      std::sqrt(static_cast<double>(num_antennas) / static_cast<double>(doas.size()));
  for (std::size_t r = 0; r < doas.size(); ++r) {
    const ComplexMatrix a =
        steering_vector(doas[r], num_antennas, spacing_over_wavelength);
    const double gr = gains[r].real(), gi = gains[r].imag();
    for (std::size_t m = 0; m < num_antennas; ++m) {
      h.re(m, 0) += norm * (gr * a.re(m, 0) - gi * a.im(m, 0));
      h.im(m, 0) += norm * (gr * a.im(m, 0) + gi * a.re(m, 0));
    }
  }
  return h;
}

ChannelRealization generate_channel(const ScenarioConfig& cfg, Rng& rng) {
  cfg.validate();
  const std::size_t n_ray = cfg.total_rays();
  ChannelRealization out;
  out.H = ComplexMatrix(cfg.num_antennas, cfg.num_users);
  out.doas.resize(cfg.num_users);
  out.gains.resize(cfg.num_users);
  for (std::size_t k = 0; k < cfg.num_users; ++k) {
    out.doas[k].reserve(n_ray);
    out.gains[k].reserve(n_ray);
    for (std::size_t r = 0; r < n_ray; ++r) {
      // open interval (-pi/2, pi/2)
      const double theta = (rng.uniform_open01() - 0.5) * std::numbers::pi;
      out.doas[k].push_back(theta);
      out.gains[k].push_back(rng.normal_complex(1.0));
    }
    const ComplexMatrix h = channel_from_rays(out.doas[k], out.gains[k],
                                              cfg.num_antennas,
                                              cfg.spacing_over_wavelength);
    for (std::size_t m = 0; m < cfg.num_antennas; ++m) {
      out.H.re(m, k) = h.re(m, 0);
      out.H.im(m, k) = h.im(m, 0);
    }
  }
  return out;
}

ComplexMatrix generate_pilots(const ScenarioConfig& cfg, Rng& rng) {
  if (cfg.num_pilots < cfg.num_users)
    throw ConfigError("generate_pilots: P=" + std::to_string(cfg.num_pilots) +
                      " < K=" + std::to_string(cfg.num_users));
  const std::size_t p_total = cfg.num_pilots, k_total = cfg.num_users;
  if (cfg.pilot_design == PilotDesign::dft) {
    ComplexMatrix s(p_total, k_total);
    for (std::size_t p = 0; p < p_total; ++p)
      for (std::size_t k = 0; k < k_total; ++k) {
        const double phi = 2.0 * std::numbers::pi * static_cast<double>(p) *
                           static_cast<double>(k) / static_cast<double>(p_total);
        s.re(p, k) = std::cos(phi);
        s.im(p, k) = std::sin(phi);
      }
    return s;
  }
  // Unit-modulus random phases; regenerate while cond(S^T) exceeds 1e3.
  constexpr int kMaxAttempts = 64;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    ComplexMatrix s(p_total, k_total);
    for (std::size_t p = 0; p < p_total; ++p)
      for (std::size_t k = 0; k < k_total; ++k) {
        const double phi = 2.0 * std::numbers::pi * rng.uniform01();
        s.re(p, k) = std::cos(phi);
        s.im(p, k) = std::sin(phi);
      }
    if (linops::condition_number(linops::transpose(s)) <= 1e3) return s;
  }
  throw DomainError("generate_pilots: no well-conditioned pilot matrix in 64 draws");
}

ComplexMatrix generate_lo(const ScenarioConfig& cfg, double signal_power, Rng& rng) {
  if (!(signal_power > 0.0))
    throw DomainError("generate_lo: signal_power must be > 0");
  const double rsr_lin = std::pow(10.0, cfg.rsr_db / 10.0);
  const double mag = std::sqrt(rsr_lin * signal_power);
  ComplexMatrix b(cfg.num_antennas, 1);
  for (std::size_t m = 0; m < cfg.num_antennas; ++m) {
    const double phi = 2.0 * std::numbers::pi * rng.uniform01();
    b.re(m, 0) = mag * std::cos(phi);
    b.im(m, 0) = mag * std::sin(phi);
  }
  return b;
}

double mean_signal_power(const ComplexMatrix& H, const ComplexMatrix& S) {
  const ComplexMatrix y0 = linops::matmul(H, linops::transpose(S));
  return linops::frob_norm_sq(y0) / static_cast<double>(y0.size());
}

double snr_calibrate(const ScenarioConfig& cfg, const ComplexMatrix& H,
                     const ComplexMatrix& S) {
  const double power = mean_signal_power(H, S);
  if (power <= 0.0)
    throw DomainError("snr_calibrate: zero channel, SNR undefined");
  return power / std::pow(10.0, cfg.snr_db / 10.0);
}

MeasurementSet measure(const ComplexMatrix& H, const ComplexMatrix& S,
                       const ComplexMatrix& lo, double sigma2, Rng& rng) {
  if (H.cols() != S.cols())
    throw ShapeError("measure: H " + shape_str(H.rows(), H.cols()) +
                     " vs S " + shape_str(S.rows(), S.cols()));
  if (lo.rows() != H.rows() || lo.cols() != 1)
    throw ShapeError("measure: LO must be " + shape_str(H.rows(), 1) + ", got " +
                     shape_str(lo.rows(), lo.cols()));
  if (sigma2 < 0.0) throw DomainError("measure: sigma2 must be >= 0");

  const std::size_t m_total = H.rows(), p_total = S.rows();
  MeasurementSet out;
  out.S = S;
  out.sigma2 = sigma2;
  out.B = ComplexMatrix(m_total, p_total);
  for (std::size_t m = 0; m < m_total; ++m)
    for (std::size_t p = 0; p < p_total; ++p) {
      out.B.re(m, p) = lo.re(m, 0);
      out.B.im(m, p) = lo.im(m, 0);
    }

  const ComplexMatrix field =
      linops::add(linops::matmul(H, linops::transpose(S)), out.B);
  out.Z = RealMatrix(m_total, p_total);
  for (std::size_t p = 0; p < p_total; ++p)
    for (std::size_t m = 0; m < m_total; ++m) {
      std::complex<double> w{0.0, 0.0};
      if (sigma2 > 0.0) w = rng.normal_complex(sigma2);
      const double re = field.re(m, p) + w.real();
      const double im = field.im(m, p) + w.imag();
      out.Z(m, p) = std::sqrt(re * re + im * im);
    }
  return out;
}

Realization realize(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng_pilot = substream(cfg.seed, StreamId::pilots);
  return realize_with_pilots(cfg, generate_pilots(cfg, rng_pilot), cfg.seed);
}

Realization realize_with_pilots(const ScenarioConfig& cfg, const ComplexMatrix& S,
                                std::uint64_t sample_seed) {
  cfg.validate();
  if (S.rows() != cfg.num_pilots || S.cols() != cfg.num_users)
    throw ShapeError("realize_with_pilots: S is " + shape_str(S.rows(), S.cols()) +
                     ", expected " + shape_str(cfg.num_pilots, cfg.num_users));
  Rng rng_chan = substream(sample_seed, StreamId::channel);
  Rng rng_lo = substream(sample_seed, StreamId::lo);
  Rng rng_noise = substream(sample_seed, StreamId::noise);

  Realization out;
  out.chan = generate_channel(cfg, rng_chan);
  const double power = mean_signal_power(out.chan.H, S);
  const ComplexMatrix lo = generate_lo(cfg, power, rng_lo);
  const double sigma2 = snr_calibrate(cfg, out.chan.H, S);
  out.meas = measure(out.chan.H, S, lo, sigma2, rng_noise);
  return out;
}

}  // namespace raqr::channel
