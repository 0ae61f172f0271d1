#pragma once

// Residual phase noise, residual CFO, mutual coupling (fixed banded Toeplitz
// plus an uncalibrated residual) and a memoryless polynomial PA with clipping.

#include <limits>
#include <random>
#include <vector>

#include "hwiloc/types.hpp"

namespace hwiloc {

using DiagMat = Eigen::DiagonalMatrix<cd, Eigen::Dynamic>;

struct ImpairmentConfig {
  double sigma_pn = 0.0;          // rad
  double sigma_cfo = 0.0;         // normalized to the subcarrier spacing
  std::vector<cd> mc_coeffs;      // c_1..c_n of the fixed coupling band
  double sigma_mc = 0.0;
  std::vector<cd> pa_coeffs{1.0}; // beta_0..beta_Q
  double x_clip = std::numeric_limits<double>::infinity();  // V

  /// Default hardware (residual PN 10 deg, CFO 0.01, MC 0.02, measured PA).
  static ImpairmentConfig reference_profile();
  /// Linear PA, no residuals, but the fixed coupling band of reference_profile().
  static ImpairmentConfig neutral();

  bool pa_is_linear() const;
  void validate(int antennas) const;
};

struct ImpairmentDims {
  int antennas = 1;
  int transmissions = 1;
  int subcarriers = 1;
};

/// One hardware draw held fixed over a coherence block.
struct ImpairmentRealization {
  Eigen::MatrixXd pn_phases;    // G x K
  double cfo = 0.0;             // one scalar for all g
  Eigen::MatrixXd mc_residual;  // N x N, real

  static ImpairmentRealization zero(const ImpairmentDims& dims);
};

/// Draw order is fixed: PN phases row by row, then CFO, then the MC residual row by row.
/// All draws are unit normals scaled by their sigma, so realizations sharing a
/// seed differ only in scale across sigma sweeps.
ImpairmentRealization sample_realization(const ImpairmentConfig& cfg, const ImpairmentDims& dims,
                                         std::mt19937_64& rng);

/// diag(exp(j omega_{g,1}), ..., exp(j omega_{g,K})).
DiagMat pn_matrix(const Eigen::VectorXd& phases);

/// CFO matrix for transmission g (1-based); common phase 2 pi eps g K_tot / K times
/// the intra-symbol ramp 2 pi eps n / K.
DiagMat cfo_matrix(double cfo, int transmission, int subcarriers, int cp_length);

/// Toeplitz([1, c_1, ..., c_n, 0, ..., 0]); ConfigError if n >= N.
CMat mc_matrix(const std::vector<cd>& coeffs, int antennas);

/// Fixed band plus residual, C = C~ + Delta_MC.
CMat coupling_matrix(const ImpairmentConfig& cfg, const ImpairmentRealization& realization,
                     int antennas);

/// Polynomial sum_q beta_q x |x|^q applied element-wise. Inputs above the clip
/// level are magnitude-limited to x_clip before the polynomial, which keeps the
/// characteristic continuous at |x| = x_clip.
CVec pa_apply(const CVec& x, const std::vector<cd>& coeffs, double x_clip);
cd pa_apply(cd x, const std::vector<cd>& coeffs, double x_clip);

}  // namespace hwiloc
