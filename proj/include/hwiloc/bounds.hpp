#pragma once

// Analytic derivatives of the mismatched mean, Fisher information and CRB,
// the pseudo-true parameter, the misspecified-CRB sandwich A^-1 B A^-1 and
// the mismatch lower bound LB = MCRB + bias bias^T.

#include <optional>
#include <string>
#include <vector>

#include "hwiloc/estimation.hpp"

namespace hwiloc {

struct ModelDerivatives {
  CMat first;   // GK x 4, column i = d mu / d theta_i
  CMat second;  // GK x 16, column 4*i + j = d^2 mu / d theta_i d theta_j

  auto first_col(int i) const { return first.col(i); }
  auto second_col(int i, int j) const { return second.col(4 * i + j); }
};

/// Orientation of d tau / d p in the state Jacobian. `Printed` keeps the
/// dimensionally inconsistent p / (c tau) for auditing; `Corrected` is p / (c^2 tau).
enum class DelayJacobian { Corrected, Printed };

struct ScalarBounds {
  double aeb = 0.0;  // rad
  double deb = 0.0;  // s
  double peb = 0.0;  // m
};

struct PseudoTrue {
  ChannelParams theta0;
  Estimate descent;             // position descent started at the true position
  double residual_norm = 0.0;   // |mu_bar(theta_bar) - mu(theta0)|
  double initial_residual = 0.0;  // |mu_bar(theta_bar) - mu(theta_bar)|
};

struct MismatchBound {
  Mat4 mcrb = Mat4::Zero();
  Mat4 bias = Mat4::Zero();
  Mat4 lb = Mat4::Zero();
};

struct MismatchReport {
  PseudoTrue pseudo_true;
  Mat4 a = Mat4::Zero();
  Mat4 b = Mat4::Zero();
  MismatchBound bound;
  double lb_peb = 0.0;  // m
  double lb_aeb = 0.0;  // rad
  double lb_deb = 0.0;  // s
};

struct BoundsReport {
  ChannelParams theta;
  Mat4 fim_theta = Mat4::Zero();
  Mat4 crb_theta = Mat4::Zero();
  Mat4 crb_state = Mat4::Zero();
  ScalarBounds scalar;
  std::optional<MismatchReport> mismatch;
  std::vector<std::string> warnings;
};

/// All first- and second-order derivatives of the M2 mean at theta.
/// DomainError for tau <= 0.
ModelDerivatives model_derivatives(const ChannelParams& theta, const MismatchedModel& model);

/// (2 / sigma^2) Re(J^H J) for a GK x 4 derivative matrix J.
Mat4 fim_from_jacobian(const CMat& jacobian, double noise_var);
Mat4 fim_theta(const ChannelParams& theta, const MismatchedModel& model, double noise_std);

/// d theta / d s in denominator layout: row = state component, column = channel parameter.
Mat4 jacobian_state(const ChannelParams& theta, DelayJacobian form = DelayJacobian::Corrected);

/// I(s) = J_S I(theta) J_S^T for the denominator-layout J_S.
Mat4 fim_state(const Mat4& fim_theta, const Mat4& jacobian);

/// (J_S I(theta) J_S^T)^-1; NumericError (carrying the condition number) when singular.
Mat4 crb_state(const ChannelParams& theta, const MismatchedModel& model, double noise_std,
               DelayJacobian form = DelayJacobian::Corrected);

/// AEB = sqrt([I^-1]_11), DEB = sqrt([I^-1]_22), PEB = sqrt(tr CRB_{1:2,1:2}).
ScalarBounds scalar_bounds(const Mat4& fim_theta, const Mat4& crb_state);

/// Inverse after symmetric diagonal equilibration; NumericError if the
/// equilibrated matrix has condition number above `max_condition` or is non-finite.
Mat4 stable_inverse(const Mat4& m, const std::string& what, double max_condition = 1e14);

/// CRB of M2 at theta: FIM, CRB in channel and state domains and the scalar bounds.
BoundsReport crb_m2(const ChannelParams& theta, const MismatchedModel& model, double noise_std);

/// Refinement settings used for the pseudo-true parameter (tighter than estimation).
EstimatorConfig pseudo_true_config();

/// argmin_theta |mu_bar(theta_bar) - mu(theta)|^2: position by descent from the
/// true position, gain from the plug-in estimate. NumericError when the descent
/// hits the iteration cap.
PseudoTrue pseudo_true(const ChannelParams& theta_bar, const SignalModel& true_model,
                       const MismatchedModel& model, const EstimatorConfig& cfg = pseudo_true_config());

/// A_ij = (2/s^2) Re[<d_ij mu, eps> - <d_i mu, d_j mu>].
Mat4 matrix_a(const ModelDerivatives& d, const CVec& eps, double noise_var);
/// B_ij = (4/s^4) Re<d_i mu, eps> Re<d_j mu, eps> + (2/s^2) Re<d_i mu, d_j mu>.
Mat4 matrix_b(const ModelDerivatives& d, const CVec& eps, double noise_var);

/// MCRB = A^-1 B A^-1, bias = (theta_bar - theta0)(...)^T, LB = MCRB + bias.
MismatchBound lower_bound(const ChannelParams& theta_bar, const ChannelParams& theta0,
                          const Mat4& a, const Mat4& b);

/// Position-domain LB: the (aoa, delay) block of the MCRB mapped through the
/// inverse position Jacobian at theta0, plus the exact position bias.
double lb_position(const ChannelParams& theta_bar, const ChannelParams& theta0, const Mat4& mcrb);

/// Full mismatch analysis of M2 against the true model.
MismatchReport mismatch_bounds(const ChannelParams& theta_bar, const SignalModel& true_model,
                               const MismatchedModel& model, double noise_std,
                               const EstimatorConfig& cfg = pseudo_true_config());

/// Central-difference derivatives of any model's mean, steps relative per parameter.
CMat numeric_jacobian(const ChannelParams& theta, const SignalModel& model, double fd_step);

/// CRB of M1 from numerically differentiated mu_bar.
BoundsReport crb_m1_numeric(const ChannelParams& theta_bar, const ImpairedModel& model,
                            double noise_std, double fd_step, double x_clip);

/// Wrap to (-pi, pi].
double wrap_phase(double phase);

}  // namespace hwiloc
