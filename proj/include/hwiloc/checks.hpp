#pragma once

// Independent numerical oracles (finite differences, Monte-Carlo expectations,
// brute-force minimization) and the invariant suite run by `hwiloc validate`.

#include <random>
#include <string>
#include <vector>

#include "hwiloc/bounds.hpp"

namespace hwiloc {

struct DerivativeError {
  double first = 0.0;   // worst column-relative error over d mu / d theta_i
  double second = 0.0;  // worst over d^2 mu / d theta_i d theta_j
};

/// Analytic derivatives against fourth-order central differences. Steps are
/// chosen so that every phase in mu moves by about `phase_step` radians.
DerivativeError derivative_oracle(const ChannelParams& theta, const MismatchedModel& model,
                                  double phase_step = 0.03);

/// Central-difference Jacobian of the channel parameters with respect to the
/// state, in the same denominator layout as jacobian_state.
Mat4 numeric_state_jacobian(const ChannelParams& theta, double rel_step = 1e-6);

struct MonteCarloAB {
  Mat4 a = Mat4::Zero();  // mean Hessian of ln f_M2(y | theta0)
  Mat4 b = Mat4::Zero();  // mean outer product of the score
  int draws = 0;
};

/// Monte-Carlo estimates of A and B with y = mu_true + n, n ~ CN(0, sigma^2 I).
MonteCarloAB monte_carlo_ab(const ChannelParams& theta0, const CVec& mu_true,
                            const MismatchedModel& model, double noise_std, int draws,
                            std::mt19937_64& rng);

/// Worst relative error of `estimate` against `exact` over the entries whose
/// magnitude exceeds `floor_fraction` of the spectral norm of `exact`.
double significant_relative_error(const Mat4& exact, const Mat4& estimate,
                                  double floor_fraction = 0.01);

/// max |a_ij - b_ij| / sqrt(b_ii b_jj) for a positive-definite reference b;
/// on the diagonal this is the plain relative error.
double scaled_difference(const Mat4& a, const Mat4& b);

/// Pseudo-true (aoa, delay) by exhaustive search over a polar grid around
/// `center`, gain profiled out; returns the best grid node.
ChannelParams brute_force_pseudo_true(const CVec& mu_true, const MismatchedModel& model,
                                      const ChannelParams& center, double aoa_half_width,
                                      double delay_half_width, int nodes_per_axis);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Invariants and oracles that need no long Monte-Carlo runs (a few seconds).
std::vector<CheckResult> run_validation_suite();

}  // namespace hwiloc
