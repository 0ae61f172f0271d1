#pragma once

// Geometry, deterministic signal components and parameter transforms for a
// single-antenna UE observed by an N-element half-wavelength ULA over an
// OFDM link with K subcarriers and G transmissions.

#include <cstdint>
#include <random>

#include "hwiloc/types.hpp"

namespace hwiloc {

/// Channel parameters [aoa, delay, gain amplitude, gain phase]; alpha = rho * exp(-j xi).
struct ChannelParams {
  double aoa = 0.0;             // rad
  double delay = 0.0;           // s
  double gain_amplitude = 0.0;  // dimensionless
  double gain_phase = 0.0;      // rad

  cd gain() const { return std::polar(gain_amplitude, -gain_phase); }
  Vec4 as_vector() const { return {aoa, delay, gain_amplitude, gain_phase}; }
  static ChannelParams from_vector(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// UE state [p_x, p_y, rho, xi].
struct UeState {
  Vec2 position = Vec2::Zero();  // m
  double gain_amplitude = 0.0;
  double gain_phase = 0.0;
};

struct SystemConfig {
  int antennas = 10;       // N
  int transmissions = 10;  // G
  int subcarriers = 100;   // K
  int cp_length = 7;       // K_cp
  double carrier_hz = 140e9;
  double bandwidth_hz = 1e9;
  double load_ohm = 50.0;
  double noise_psd_dbm_hz = -173.855;
  double noise_figure_db = 10.0;
  double tx_power_dbm = 20.0;
  std::uint64_t pilot_seed = 1;
  std::uint64_t combiner_seed = 2;

  double subcarrier_spacing() const { return bandwidth_hz / subcarriers; }
  double wavelength() const { return kSpeedOfLight / carrier_hz; }
  double tx_power_watt() const;
  int total_length() const { return subcarriers + cp_length; }
  /// Largest range c / delta_f at which the delay phasors are still unambiguous.
  double unambiguous_range() const { return kSpeedOfLight / subcarrier_spacing(); }

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

/// Pilot symbols (G x K, row g is x_g) and combiners (N x G, column g is w_g).
struct PilotBlock {
  CMat symbols;
  CMat combiners;

  int transmissions() const { return static_cast<int>(symbols.rows()); }
  int subcarriers() const { return static_cast<int>(symbols.cols()); }
  int antennas() const { return static_cast<int>(combiners.rows()); }
};

/// a(aoa)[n] = exp(j n pi sin(aoa)), n = 0..N-1.
CVec steering_vector(double aoa, int antennas);

/// d(tau)[k-1] = exp(-j 2 pi k delta_f tau) for subcarrier k = 1..K.
///
/// Subcarrier indices on the delay phasor are 1-based; everything else
/// (DFT matrix, storage) is 0-based, so storage slot i holds subcarrier i+1.
CVec delay_vector(double delay, int subcarriers, double spacing_hz);

/// Free-space LOS gain lambda * exp(-j xi) / (4 pi c tau). Throws DomainError for tau <= 0.
cd gain_from_geometry(double delay, double wavelength, double phase);

/// Channel parameters of a UE; rho and xi pass through unchanged.
ChannelParams state_to_params(const UeState& state);
UeState params_to_state(const ChannelParams& params);

/// UE at `position` with the free-space gain amplitude and the given phase.
UeState ue_from_position(const Vec2& position, double wavelength, double gain_phase);

/// Unitary, symmetric DFT matrix F(n, m) = exp(-j 2 pi n m / K) / sqrt(K).
CMat dft_matrix(int subcarriers);

/// Constant-modulus sqrt(P R) pilots with i.i.d. uniform phases, G x K.
CMat generate_pilots(const SystemConfig& cfg, std::mt19937_64& rng);

/// Unit-norm combiners with i.i.d. uniform-phase entries, N x G.
CMat generate_combiners(const SystemConfig& cfg, std::mt19937_64& rng);

/// Pilots from cfg.pilot_seed and combiners from cfg.combiner_seed.
PilotBlock make_pilot_block(const SystemConfig& cfg);

/// Per-symbol complex noise variance N0 * NF * W (see README for units).
double noise_variance(const SystemConfig& cfg);
double noise_std(const SystemConfig& cfg);

double dbm_to_watt(double dbm);

}  // namespace hwiloc
