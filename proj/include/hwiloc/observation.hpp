#pragma once

// Noise-free means of the impaired model M1 and the mismatched model M2,
// and noisy observations. Every GK-vector is stacked g-major:
// element g*K + k belongs to transmission g, subcarrier slot k.

#include <optional>
#include <random>
#include <vector>

#include "hwiloc/impairments.hpp"
#include "hwiloc/model_core.hpp"

namespace hwiloc {

enum class ModelKind { Impaired /* M1 */, Mismatched /* M2 */ };

/// A mean model mu(theta) = alpha * eta(aoa, delay), linear in the complex gain.
class SignalModel {
 public:
  virtual ~SignalModel() = default;

  /// Gain-free signature eta(aoa, delay) = mu / alpha, length G*K.
  virtual CVec eta(double aoa, double delay) const = 0;
  virtual ModelKind kind() const = 0;
  virtual int transmissions() const = 0;
  virtual int subcarriers() const = 0;

  int size() const { return transmissions() * subcarriers(); }
  CVec mu(const ChannelParams& params) const;
};

/// M2: y_g = alpha (w_g^T C~ a(aoa)) d(tau) .* x_g.
class MismatchedModel final : public SignalModel {
 public:
  MismatchedModel(const SystemConfig& cfg, const PilotBlock& pilots, const ImpairmentConfig& imp);

  CVec eta(double aoa, double delay) const override;
  ModelKind kind() const override { return ModelKind::Mismatched; }
  int transmissions() const override { return static_cast<int>(pilots_.symbols.rows()); }
  int subcarriers() const override { return static_cast<int>(pilots_.symbols.cols()); }

  /// Beam gains s_g = w_g^T C~ a(aoa), one per transmission.
  CVec beam_gains(double aoa) const;
  /// Beam-gain derivatives w.r.t. aoa of the given order (0, 1 or 2).
  CVec beam_gain_derivative(double aoa, int order) const;

  const PilotBlock& pilots() const { return pilots_; }
  const CMat& coupling() const { return coupling_; }
  double spacing_hz() const { return spacing_hz_; }

 private:
  PilotBlock pilots_;
  CMat coupling_;
  CMat combined_;  // G x N, row g = w_g^T C~
  double spacing_hz_;
};

/// M1: y_g = alpha F E_g Xi_g F^H [(w_g^T C a(aoa)) d(tau) .* (F h_PA(F^H x_g))],
/// C = C~ + Delta_MC. The operator order follows the frequency-domain model
/// literally: combining precedes the PN/CFO sandwich.
class ImpairedModel final : public SignalModel {
 public:
  ImpairedModel(const SystemConfig& cfg, const PilotBlock& pilots, const ImpairmentConfig& imp,
                const ImpairmentRealization& realization);

  CVec eta(double aoa, double delay) const override;
  ModelKind kind() const override { return ModelKind::Impaired; }
  int transmissions() const override { return static_cast<int>(distorted_.rows()); }
  int subcarriers() const override { return static_cast<int>(distorted_.cols()); }

  /// Time-domain PA input samples F^H x_g, G x K.
  const CMat& pa_input() const { return pa_input_; }

 private:
  CMat combined_;             // G x N, row g = w_g^T C
  CMat distorted_;            // G x K, row g = F h_PA(F^H x_g)
  std::vector<CMat> mixers_;  // F E_g Xi_g F^H
  CMat pa_input_;
  double spacing_hz_;
  bool identity_mixers_;
};

CVec mu_m2(const ChannelParams& params, const SystemConfig& cfg, const PilotBlock& pilots,
           const ImpairmentConfig& imp);
CVec mu_m1(const ChannelParams& params, const SystemConfig& cfg, const PilotBlock& pilots,
           const ImpairmentConfig& imp, const ImpairmentRealization& realization);

struct ObservationSet {
  CVec y;
  ModelKind model = ModelKind::Mismatched;
  std::optional<ImpairmentRealization> realization;
  double noise_std = 0.0;
};

/// y = mu + n with n ~ CN(0, sigma^2 I); real and imaginary parts each N(0, sigma^2/2).
ObservationSet observe(const CVec& mu, double noise_std, std::mt19937_64& rng);

}  // namespace hwiloc
