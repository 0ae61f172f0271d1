#include "hwiloc/model_core.hpp"

#include <cmath>
#include <string>

namespace hwiloc {

double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double SystemConfig::tx_power_watt() const { return dbm_to_watt(tx_power_dbm); }

void SystemConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(antennas >= 1, "antennas must be >= 1");
  require(transmissions >= 1, "transmissions must be >= 1");
  require(subcarriers >= 1, "subcarriers must be >= 1");
  require(cp_length >= 0, "cp_length must be >= 0");
  require(carrier_hz > 0.0, "carrier frequency must be positive");
  require(bandwidth_hz > 0.0, "bandwidth must be positive");
  require(load_ohm > 0.0, "load impedance must be positive");
  require(std::isfinite(noise_psd_dbm_hz) && std::isfinite(noise_figure_db),
          "noise parameters must be finite");
  require(std::isfinite(tx_power_dbm), "tx power must be finite");
}

CVec steering_vector(double aoa, int antennas) {
  CVec a(antennas);
  const double phase = kPi * std::sin(aoa);
  for (int n = 0; n < antennas; ++n) a[n] = std::polar(1.0, n * phase);
  return a;
}

CVec delay_vector(double delay, int subcarriers, double spacing_hz) {
  CVec d(subcarriers);
  for (int k = 1; k <= subcarriers; ++k)
    d[k - 1] = std::polar(1.0, -2.0 * kPi * k * spacing_hz * delay);
  return d;
}

cd gain_from_geometry(double delay, double wavelength, double phase) {
  if (!(delay > 0.0)) throw DomainError("gain_from_geometry: delay must be positive");
  return std::polar(wavelength / (4.0 * kPi * kSpeedOfLight * delay), -phase);
}

ChannelParams state_to_params(const UeState& state) {
  const double range = state.position.norm();
  if (!(range > 0.0)) throw DomainError("state_to_params: UE at the array origin");
  return {std::atan2(state.position.y(), state.position.x()), range / kSpeedOfLight,
          state.gain_amplitude, state.gain_phase};
}

UeState params_to_state(const ChannelParams& params) {
  const double range = params.delay * kSpeedOfLight;
  return {Vec2(range * std::cos(params.aoa), range * std::sin(params.aoa)),
          params.gain_amplitude, params.gain_phase};
}

UeState ue_from_position(const Vec2& position, double wavelength, double gain_phase) {
  const double range = position.norm();
  if (!(range > 0.0)) throw DomainError("ue_from_position: UE at the array origin");
  const double rho = std::abs(gain_from_geometry(range / kSpeedOfLight, wavelength, 0.0));
  return {position, rho, gain_phase};
}

CMat dft_matrix(int subcarriers) {
  CMat f(subcarriers, subcarriers);
  const double scale = 1.0 / std::sqrt(static_cast<double>(subcarriers));
  for (int n = 0; n < subcarriers; ++n)
    for (int m = 0; m < subcarriers; ++m) {
      // reduce n*m mod K first so large K keeps full phase precision
      const long long nm = (static_cast<long long>(n) * m) % subcarriers;
      f(n, m) = std::polar(scale, -2.0 * kPi * static_cast<double>(nm) / subcarriers);
    }
  return f;
}

CMat generate_pilots(const SystemConfig& cfg, std::mt19937_64& rng) {
  const double amplitude = std::sqrt(cfg.tx_power_watt() * cfg.load_ohm);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  CMat x(cfg.transmissions, cfg.subcarriers);
  for (int g = 0; g < cfg.transmissions; ++g)
    for (int k = 0; k < cfg.subcarriers; ++k) x(g, k) = std::polar(amplitude, phase(rng));
  return x;
}

CMat generate_combiners(const SystemConfig& cfg, std::mt19937_64& rng) {
  const double amplitude = 1.0 / std::sqrt(static_cast<double>(cfg.antennas));
  std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
  CMat w(cfg.antennas, cfg.transmissions);
  for (int g = 0; g < cfg.transmissions; ++g)
    for (int n = 0; n < cfg.antennas; ++n) w(n, g) = std::polar(amplitude, phase(rng));
  return w;
}

PilotBlock make_pilot_block(const SystemConfig& cfg) {
  std::mt19937_64 pilot_rng(cfg.pilot_seed);
  std::mt19937_64 combiner_rng(cfg.combiner_seed);
  return {generate_pilots(cfg, pilot_rng), generate_combiners(cfg, combiner_rng)};
}

double noise_variance(const SystemConfig& cfg) {
  // Noise PSD plus noise figure, linearized from dB(m) without the mW->W
  // shift, times the full bandwidth.
  return std::pow(10.0, (cfg.noise_psd_dbm_hz + cfg.noise_figure_db) / 10.0) * cfg.bandwidth_hz;
}

double noise_std(const SystemConfig& cfg) { return std::sqrt(noise_variance(cfg)); }

}  // namespace hwiloc
