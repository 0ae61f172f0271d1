#include "hwiloc/observation.hpp"

#include <cmath>

namespace hwiloc {

namespace {

void check_delay(double delay) {
  if (!(delay >= 0.0) || !std::isfinite(delay))
    throw DomainError("signal model: delay must be finite and non-negative");
}

CVec steering_derivative(double aoa, int antennas, int order) {
  CVec a = steering_vector(aoa, antennas);
  if (order == 0) return a;
  const double c = std::cos(aoa);
  const double s = std::sin(aoa);
  for (int n = 0; n < antennas; ++n) {
    const cd first = kJ * (n * kPi * c);
    a[n] *= (order == 1) ? first : first * first - kJ * (n * kPi * s);
  }
  return a;
}

}  // namespace

CVec SignalModel::mu(const ChannelParams& params) const {
  return params.gain() * eta(params.aoa, params.delay);
}

MismatchedModel::MismatchedModel(const SystemConfig& cfg, const PilotBlock& pilots,
                                 const ImpairmentConfig& imp)
    : pilots_(pilots),
      coupling_(mc_matrix(imp.mc_coeffs, cfg.antennas)),
      spacing_hz_(cfg.subcarrier_spacing()) {
  combined_ = pilots_.combiners.transpose() * coupling_;
}

CVec MismatchedModel::beam_gains(double aoa) const {
  return combined_ * steering_vector(aoa, static_cast<int>(combined_.cols()));
}

CVec MismatchedModel::beam_gain_derivative(double aoa, int order) const {
  return combined_ * steering_derivative(aoa, static_cast<int>(combined_.cols()), order);
}

CVec MismatchedModel::eta(double aoa, double delay) const {
  check_delay(delay);
  const int g_count = transmissions();
  const int k_count = subcarriers();
  const CVec s = beam_gains(aoa);
  const CVec d = delay_vector(delay, k_count, spacing_hz_);
  CVec out(g_count * k_count);
  for (int g = 0; g < g_count; ++g)
    for (int k = 0; k < k_count; ++k) out[g * k_count + k] = s[g] * d[k] * pilots_.symbols(g, k);
  return out;
}

ImpairedModel::ImpairedModel(const SystemConfig& cfg, const PilotBlock& pilots,
                             const ImpairmentConfig& imp,
                             const ImpairmentRealization& realization)
    : spacing_hz_(cfg.subcarrier_spacing()) {
  const int g_count = pilots.transmissions();
  const int k_count = pilots.subcarriers();
  combined_ = pilots.combiners.transpose() * coupling_matrix(imp, realization, cfg.antennas);

  const CMat f = dft_matrix(k_count);
  const CMat fh = f.adjoint();
  pa_input_.resize(g_count, k_count);
  distorted_.resize(g_count, k_count);
  for (int g = 0; g < g_count; ++g) {
    const CVec time = fh * pilots.symbols.row(g).transpose();
    pa_input_.row(g) = time.transpose();
    // F^T = F for the symmetric DFT matrix
    distorted_.row(g) = (f * pa_apply(time, imp.pa_coeffs, imp.x_clip)).transpose();
  }

  identity_mixers_ = realization.cfo == 0.0 && realization.pn_phases.isZero(0.0);
  if (!identity_mixers_) {
    mixers_.reserve(g_count);
    for (int g = 0; g < g_count; ++g) {
      const DiagMat e = cfo_matrix(realization.cfo, g + 1, k_count, cfg.cp_length);
      const DiagMat xi = pn_matrix(realization.pn_phases.row(g).transpose());
      CMat inner = fh;
      inner = xi * inner;
      inner = e * inner;
      mixers_.push_back(f * inner);
    }
  }
}

CVec ImpairedModel::eta(double aoa, double delay) const {
  check_delay(delay);
  const int g_count = transmissions();
  const int k_count = subcarriers();
  const CVec s = combined_ * steering_vector(aoa, static_cast<int>(combined_.cols()));
  const CVec d = delay_vector(delay, k_count, spacing_hz_);
  CVec out(g_count * k_count);
  CVec v(k_count);
  for (int g = 0; g < g_count; ++g) {
    for (int k = 0; k < k_count; ++k) v[k] = s[g] * d[k] * distorted_(g, k);
    if (identity_mixers_)
      out.segment(g * k_count, k_count) = v;
    else
      out.segment(g * k_count, k_count).noalias() = mixers_[g] * v;
  }
  return out;
}

CVec mu_m2(const ChannelParams& params, const SystemConfig& cfg, const PilotBlock& pilots,
           const ImpairmentConfig& imp) {
  return MismatchedModel(cfg, pilots, imp).mu(params);
}

CVec mu_m1(const ChannelParams& params, const SystemConfig& cfg, const PilotBlock& pilots,
           const ImpairmentConfig& imp, const ImpairmentRealization& realization) {
  return ImpairedModel(cfg, pilots, imp, realization).mu(params);
}

ObservationSet observe(const CVec& mu, double noise_std, std::mt19937_64& rng) {
  if (!(noise_std >= 0.0)) throw DomainError("observe: noise std must be >= 0");
  ObservationSet obs;
  obs.noise_std = noise_std;
  obs.y = mu;
  if (noise_std == 0.0) return obs;
  std::normal_distribution<double> unit(0.0, 1.0);
  const double scale = noise_std / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < obs.y.size(); ++i) {
    const double re = unit(rng);
    const double im = unit(rng);
    obs.y[i] += scale * cd(re, im);
  }
  return obs;
}

}  // namespace hwiloc
