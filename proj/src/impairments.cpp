#include "hwiloc/impairments.hpp"

#include <cmath>

namespace hwiloc {

ImpairmentConfig ImpairmentConfig::reference_profile() {
  ImpairmentConfig cfg;
  cfg.sigma_pn = deg2rad(10.0);
  cfg.sigma_cfo = 0.01;
  cfg.mc_coeffs = {cd(0.6, 0.5), cd(0.4054, -0.128)};
  cfg.sigma_mc = 0.02;
  cfg.pa_coeffs = {cd(0.9798, 0.0286), cd(0.0122, -0.0043), cd(-0.0007, 0.0001)};
  cfg.x_clip = 25.0;
  return cfg;
}

ImpairmentConfig ImpairmentConfig::neutral() {
  ImpairmentConfig cfg;
  cfg.mc_coeffs = reference_profile().mc_coeffs;
  return cfg;
}

bool ImpairmentConfig::pa_is_linear() const {
  if (pa_coeffs.empty() || pa_coeffs[0] != cd(1.0)) return false;
  for (std::size_t q = 1; q < pa_coeffs.size(); ++q)
    if (pa_coeffs[q] != cd(0.0)) return false;
  return std::isinf(x_clip);
}

void ImpairmentConfig::validate(int antennas) const {
  if (!(sigma_pn >= 0.0) || !(sigma_cfo >= 0.0) || !(sigma_mc >= 0.0))
    throw ConfigError("impairment standard deviations must be >= 0");
  if (!(x_clip > 0.0)) throw ConfigError("PA clip level must be positive");
  if (pa_coeffs.empty()) throw ConfigError("PA needs at least beta_0");
  if (static_cast<int>(mc_coeffs.size()) >= antennas)
    throw ConfigError("mutual-coupling band must be narrower than the array");
}

ImpairmentRealization ImpairmentRealization::zero(const ImpairmentDims& dims) {
  return {Eigen::MatrixXd::Zero(dims.transmissions, dims.subcarriers), 0.0,
          Eigen::MatrixXd::Zero(dims.antennas, dims.antennas)};
}

ImpairmentRealization sample_realization(const ImpairmentConfig& cfg, const ImpairmentDims& dims,
                                         std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  ImpairmentRealization r = ImpairmentRealization::zero(dims);
  for (int g = 0; g < dims.transmissions; ++g)
    for (int k = 0; k < dims.subcarriers; ++k) r.pn_phases(g, k) = cfg.sigma_pn * unit(rng);
  r.cfo = cfg.sigma_cfo * unit(rng);
  for (int i = 0; i < dims.antennas; ++i)
    for (int j = 0; j < dims.antennas; ++j) r.mc_residual(i, j) = cfg.sigma_mc * unit(rng);
  return r;
}

DiagMat pn_matrix(const Eigen::VectorXd& phases) {
  CVec d(phases.size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) d[k] = std::polar(1.0, phases[k]);
  return DiagMat(d);
}

DiagMat cfo_matrix(double cfo, int transmission, int subcarriers, int cp_length) {
  const double common =
      2.0 * kPi * cfo * transmission * (subcarriers + cp_length) / static_cast<double>(subcarriers);
  CVec d(subcarriers);
  for (int n = 0; n < subcarriers; ++n)
    d[n] = std::polar(1.0, common + 2.0 * kPi * cfo * n / static_cast<double>(subcarriers));
  return DiagMat(d);
}

CMat mc_matrix(const std::vector<cd>& coeffs, int antennas) {
  const int band = static_cast<int>(coeffs.size());
  if (band >= antennas && band > 0)
    throw ConfigError("mc_matrix: band of " + std::to_string(band) + " needs more than " +
                      std::to_string(antennas) + " antennas");
  CMat c = CMat::Identity(antennas, antennas);
  for (int i = 0; i < antennas; ++i)
    for (int j = 0; j < antennas; ++j) {
      const int lag = std::abs(i - j);
      if (lag >= 1 && lag <= band) c(i, j) = coeffs[lag - 1];
    }
  return c;
}

CMat coupling_matrix(const ImpairmentConfig& cfg, const ImpairmentRealization& realization,
                     int antennas) {
  CMat c = mc_matrix(cfg.mc_coeffs, antennas);
  c += realization.mc_residual.cast<cd>();
  return c;
}

cd pa_apply(cd x, const std::vector<cd>& coeffs, double x_clip) {
  double magnitude = std::abs(x);
  if (magnitude > x_clip) {
    x *= x_clip / magnitude;
    magnitude = x_clip;
  }
  // Horner in |x|: x * (beta_0 + |x| (beta_1 + |x| (...)))
  cd poly = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) poly = poly * magnitude + *it;
  return x * poly;
}

CVec pa_apply(const CVec& x, const std::vector<cd>& coeffs, double x_clip) {
  CVec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = pa_apply(x[i], coeffs, x_clip);
  return out;
}

}  // namespace hwiloc
