// SPDX-License-Identifier: Apache-2.0
//
// Clustered multipath channel generation and magnitude-only measurement.
//
// Signal model: K single-antenna users transmit P pilot slots toward a
// uniform linear array of M atomic antennas. The receiver observes only the
// magnitude of the superposed signal, LO reference and noise fields,
//   Z[:,p] = | H s_p + b + w_p |,
// so estimation is a biased phase retrieval problem: the known LO field b
// anchors the otherwise unobservable phase.
#pragma once

#include <cstdint>
#include <vector>

#include "raqr/channel/scenario.hpp"
#include "raqr/linops/matrix.hpp"
#include "raqr/rng.hpp"

namespace raqr::channel {

// One multipath channel draw, kept with its per-ray parameters so the
// generating sum can be reconstructed exactly.
struct ChannelRealization {
  ComplexMatrix H;                                  // M x K
  std::vector<std::vector<double>> doas;            // [user][ray], radians
  std::vector<std::vector<std::complex<double>>> gains;  // [user][ray]
};

// Pilot matrix, replicated LO matrix, noise variance and magnitude
// observations for one scenario realization.
struct MeasurementSet {
  ComplexMatrix S;   // P x K, row p is the pilot vector of slot p
  ComplexMatrix B;   // M x P, LO vector replicated across the P columns
  double sigma2 = 0; // complex noise variance per entry
  RealMatrix Z;      // M x P, nonnegative magnitudes

  std::size_t num_antennas() const { return B.rows(); }
  std::size_t num_pilots() const { return B.cols(); }
  std::size_t num_users() const { return S.cols(); }
};

// ULA steering vector, entry m = exp(j 2 pi (d/lambda) m sin theta),
// m = 0..M-1. Every entry has unit modulus.
ComplexMatrix steering_vector(double theta, std::size_t num_antennas,
                              double spacing_over_wavelength);

// Rebuild the channel column of one user from its per-ray parameters:
// h = sqrt(M / N_ray) * sum_r gains[r] * a(doas[r]).
ComplexMatrix channel_from_rays(const std::vector<double>& doas,
                                const std::vector<std::complex<double>>& gains,
                                std::size_t num_antennas,
                                double spacing_over_wavelength);

// Draw a channel: per-ray complex gains are i.i.d. CN(0,1), DoAs i.i.d.
// uniform on the open interval (-pi/2, pi/2), N_ray = L * C_l rays per user.
ChannelRealization generate_channel(const ScenarioConfig& cfg, Rng& rng);

// P x K pilot matrix with unit-modulus entries. random_phase draws i.i.d.
// uniform phases and redraws until cond(S^T) <= 1e3; dft takes the first K
// columns of the P-point DFT matrix (requires P >= K; Hermitian-orthogonal
// columns, S^H S = P I).
ComplexMatrix generate_pilots(const ScenarioConfig& cfg, Rng& rng);

// LO vector b (M x 1): per-antenna magnitude sqrt(rsr_linear * signal_power),
// phases i.i.d. uniform on [0, 2pi) fixed for the realization. b is known to
// every estimator.
ComplexMatrix generate_lo(const ScenarioConfig& cfg, double signal_power, Rng& rng);

// Noise variance from the target SNR: sigma2 = mean |[H S^T]_mp|^2 / snr_lin.
// Throws DomainError if the channel is identically zero.
double snr_calibrate(const ScenarioConfig& cfg, const ComplexMatrix& H,
                     const ComplexMatrix& S);

// Magnitude measurement: Z[:,p] = |H s_p + b + w_p| with w i.i.d. CN(0, sigma2)
// drawn inside the magnitude.
MeasurementSet measure(const ComplexMatrix& H, const ComplexMatrix& S,
                       const ComplexMatrix& lo, double sigma2, Rng& rng);

// Full realization of a scenario from its seed: channel, pilots, LO scaled to
// the configured RSR against the realized signal power, noise calibrated to
// the configured SNR. Substreams: channel / pilots / lo / noise.
struct Realization {
  ChannelRealization chan;
  MeasurementSet meas;
};
Realization realize(const ScenarioConfig& cfg);

// Same, but with a caller-supplied pilot matrix (fixed-pilot datasets and
// paired evaluation trials) and an explicit seed for the channel / LO / noise
// substreams.
Realization realize_with_pilots(const ScenarioConfig& cfg, const ComplexMatrix& S,
                                std::uint64_t sample_seed);

// Mean per-entry power of the noiseless received field H S^T.
double mean_signal_power(const ComplexMatrix& H, const ComplexMatrix& S);

}  // namespace raqr::channel
