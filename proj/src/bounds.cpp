#include "hwiloc/bounds.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <sstream>

namespace hwiloc {

namespace {

// d^a/d rho^a d^b/d xi^b of alpha = rho exp(-j xi), a, b <= 2.
cd gain_derivative(const ChannelParams& theta, int rho_order, int xi_order) {
  double amplitude = 0.0;
  if (rho_order == 0)
    amplitude = theta.gain_amplitude;
  else if (rho_order == 1)
    amplitude = 1.0;
  cd factor = 1.0;
  for (int i = 0; i < xi_order; ++i) factor *= -kJ;
  return amplitude * factor * std::polar(1.0, -theta.gain_phase);
}

CVec delay_derivative(const CVec& d, double spacing_hz, int order) {
  if (order == 0) return d;
  CVec out(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const cd rate = -kJ * (2.0 * kPi * static_cast<double>(i + 1) * spacing_hz);
    out[i] = (order == 1 ? rate : rate * rate) * d[i];
  }
  return out;
}

Mat4 symmetrize(const Mat4& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

double wrap_phase(double phase) {
  double w = std::remainder(phase, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

ModelDerivatives model_derivatives(const ChannelParams& theta, const MismatchedModel& model) {
  if (!(theta.delay > 0.0)) throw DomainError("model_derivatives: delay must be positive");
  const int g_count = model.transmissions();
  const int k_count = model.subcarriers();
  const CMat& x = model.pilots().symbols;

  const std::array<CVec, 3> beam = {model.beam_gain_derivative(theta.aoa, 0),
                                    model.beam_gain_derivative(theta.aoa, 1),
                                    model.beam_gain_derivative(theta.aoa, 2)};
  const CVec d0 = delay_vector(theta.delay, k_count, model.spacing_hz());
  const std::array<CVec, 3> delay = {d0, delay_derivative(d0, model.spacing_hz(), 1),
                                     delay_derivative(d0, model.spacing_hz(), 2)};

  // mu = alpha(rho, xi) * s(aoa) * D(tau) * x: each derivative is a product of
  // per-factor derivatives whose orders are the multiplicities of each parameter.
  auto term = [&](const std::array<int, 4>& orders) {
    const cd a = gain_derivative(theta, orders[kGainAmp], orders[kGainPhase]);
    CVec out(g_count * k_count);
    for (int g = 0; g < g_count; ++g) {
      const cd sg = a * beam[orders[kAoa]][g];
      for (int k = 0; k < k_count; ++k)
        out[g * k_count + k] = sg * delay[orders[kDelay]][k] * x(g, k);
    }
    return out;
  };

  ModelDerivatives d;
  d.first.resize(g_count * k_count, 4);
  d.second.resize(g_count * k_count, 16);
  for (int i = 0; i < 4; ++i) {
    std::array<int, 4> orders{0, 0, 0, 0};
    orders[i] = 1;
    d.first.col(i) = term(orders);
  }
  for (int i = 0; i < 4; ++i)
    for (int j = i; j < 4; ++j) {
      std::array<int, 4> orders{0, 0, 0, 0};
      ++orders[i];
      ++orders[j];
      d.second.col(4 * i + j) = term(orders);
      if (j != i) d.second.col(4 * j + i) = d.second.col(4 * i + j);
    }
  return d;
}

Mat4 fim_from_jacobian(const CMat& jacobian, double noise_var) {
  const CMat gram = jacobian.adjoint() * jacobian;
  return symmetrize((2.0 / noise_var) * gram.real());
}

Mat4 fim_theta(const ChannelParams& theta, const MismatchedModel& model, double noise_std) {
  if (!(noise_std > 0.0)) throw DomainError("fim_theta: noise std must be positive");
  return fim_from_jacobian(model_derivatives(theta, model).first, noise_std * noise_std);
}

Mat4 jacobian_state(const ChannelParams& theta, DelayJacobian form) {
  const double c = kSpeedOfLight;
  const double tau = theta.delay;
  const double ca = std::cos(theta.aoa);
  const double sa = std::sin(theta.aoa);
  Mat4 j = Mat4::Identity();
  j(0, 0) = -sa / (c * tau);
  j(1, 0) = ca / (c * tau);
  // corrected p / (c^2 tau) = [cos, sin] / c; printed p / (c tau) = [cos, sin]
  const double delay_scale = form == DelayJacobian::Corrected ? 1.0 / c : 1.0;
  j(0, 1) = ca * delay_scale;
  j(1, 1) = sa * delay_scale;
  return j;
}

Mat4 fim_state(const Mat4& fim, const Mat4& jacobian) {
  return symmetrize(jacobian * fim * jacobian.transpose());
}

Mat4 stable_inverse(const Mat4& m, const std::string& what, double max_condition) {
  if (!m.allFinite()) throw NumericError(what + ": non-finite matrix");
  Vec4 scale;
  for (int i = 0; i < 4; ++i) {
    const double d = std::abs(m(i, i));
    if (!(d > 0.0)) throw NumericError(what + ": zero diagonal entry", std::numeric_limits<double>::infinity());
    scale[i] = 1.0 / std::sqrt(d);
  }
  const Mat4 equilibrated = scale.asDiagonal() * m * scale.asDiagonal();
  Eigen::JacobiSVD<Mat4> svd(equilibrated);
  const auto& sv = svd.singularValues();
  const double cond = sv[3] > 0.0 ? sv[0] / sv[3] : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition)) {
    std::ostringstream msg;
    msg << what << ": singular matrix (condition number " << cond << ")";
    throw NumericError(msg.str(), cond);
  }
  return scale.asDiagonal() * equilibrated.inverse() * scale.asDiagonal();
}

Mat4 crb_state(const ChannelParams& theta, const MismatchedModel& model, double noise_std,
               DelayJacobian form) {
  const Mat4 fs = fim_state(fim_theta(theta, model, noise_std), jacobian_state(theta, form));
  return symmetrize(stable_inverse(fs, "crb_state"));
}

ScalarBounds scalar_bounds(const Mat4& fim, const Mat4& crb) {
  const Mat4 inv = stable_inverse(fim, "scalar_bounds");
  return {std::sqrt(inv(0, 0)), std::sqrt(inv(1, 1)), std::sqrt(crb(0, 0) + crb(1, 1))};
}

BoundsReport crb_m2(const ChannelParams& theta, const MismatchedModel& model, double noise_std) {
  BoundsReport r;
  r.theta = theta;
  r.fim_theta = fim_theta(theta, model, noise_std);
  r.crb_theta = symmetrize(stable_inverse(r.fim_theta, "crb_theta"));
  r.crb_state = symmetrize(
      stable_inverse(fim_state(r.fim_theta, jacobian_state(theta)), "crb_state"));
  r.scalar = scalar_bounds(r.fim_theta, r.crb_state);
  return r;
}

EstimatorConfig pseudo_true_config() {
  EstimatorConfig cfg;
  cfg.max_iterations = 2000;
  cfg.gradient_tolerance = 1e-11;
  cfg.initial_step = 0.05;
  return cfg;
}

PseudoTrue pseudo_true(const ChannelParams& theta_bar, const SignalModel& true_model,
                       const MismatchedModel& model, const EstimatorConfig& cfg) {
  const CVec target = true_model.mu(theta_bar);
  const UeState start = params_to_state(theta_bar);

  PseudoTrue out;
  out.initial_residual = (target - model.mu(theta_bar)).norm();
  out.descent = refine(target, model, start.position, cfg);
  if (!out.descent.converged) {
    std::ostringstream msg;
    msg << "pseudo_true: descent did not converge after " << out.descent.iterations
        << " iterations; objective trace";
    const auto& trace = out.descent.objective_trace;
    const std::size_t from = trace.size() > 5 ? trace.size() - 5 : 0;
    for (std::size_t i = from; i < trace.size(); ++i) msg << ' ' << trace[i];
    throw NumericError(msg.str());
  }
  const Vec2 p = out.descent.position;
  const cd alpha = out.descent.gain;
  out.theta0.aoa = std::atan2(p.y(), p.x());
  out.theta0.delay = p.norm() / kSpeedOfLight;
  out.theta0.gain_amplitude = std::abs(alpha);
  // keep xi0 on the branch closest to the true phase so the bias is meaningful
  out.theta0.gain_phase = theta_bar.gain_phase + wrap_phase(-std::arg(alpha) - theta_bar.gain_phase);
  out.residual_norm = (target - model.mu(out.theta0)).norm();
  return out;
}

Mat4 matrix_a(const ModelDerivatives& d, const CVec& eps, double noise_var) {
  const CMat gram = d.first.adjoint() * d.first;
  Mat4 a;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      a(i, j) = (2.0 / noise_var) * std::real(d.second_col(i, j).dot(eps) - gram(i, j));
  return symmetrize(a);
}

Mat4 matrix_b(const ModelDerivatives& d, const CVec& eps, double noise_var) {
  const CMat gram = d.first.adjoint() * d.first;
  const Vec4 score = (d.first.adjoint() * eps).real();
  const Mat4 b = (4.0 / (noise_var * noise_var)) * score * score.transpose() +
                 (2.0 / noise_var) * gram.real();
  return symmetrize(b);
}

MismatchBound lower_bound(const ChannelParams& theta_bar, const ChannelParams& theta0,
                          const Mat4& a, const Mat4& b) {
  const Mat4 a_inv = stable_inverse(a, "lower_bound: A");
  MismatchBound out;
  out.mcrb = symmetrize(a_inv * b * a_inv);
  Vec4 diff = theta_bar.as_vector() - theta0.as_vector();
  diff[kGainPhase] = wrap_phase(diff[kGainPhase]);
  out.bias = diff * diff.transpose();
  out.lb = out.mcrb + out.bias;
  return out;
}

double lb_position(const ChannelParams& theta_bar, const ChannelParams& theta0, const Mat4& mcrb) {
  if (!(theta_bar.delay > 0.0) || !(theta0.delay > 0.0))
    throw DomainError("lb_position: delays must be positive");
  const Mat2 jp = jacobian_state(theta0).topLeftCorner<2, 2>();
  const double det = jp.determinant();
  if (!(std::abs(det) > 0.0) || !std::isfinite(det))
    throw NumericError("lb_position: singular position Jacobian");
  // cov_p = (d p / d theta) C (d p / d theta)^T with d p / d theta = (J_p^T)^-1
  const Mat2 dp = jp.transpose().inverse();
  const Mat2 cov = dp * mcrb.topLeftCorner<2, 2>() * dp.transpose();
  const Vec2 bias = params_to_state(theta_bar).position - params_to_state(theta0).position;
  return std::sqrt(cov.trace() + bias.squaredNorm());
}

MismatchReport mismatch_bounds(const ChannelParams& theta_bar, const SignalModel& true_model,
                               const MismatchedModel& model, double noise_std,
                               const EstimatorConfig& cfg) {
  if (!(noise_std > 0.0)) throw DomainError("mismatch_bounds: noise std must be positive");
  const double noise_var = noise_std * noise_std;
  MismatchReport r;
  r.pseudo_true = pseudo_true(theta_bar, true_model, model, cfg);
  const ChannelParams& t0 = r.pseudo_true.theta0;
  const CVec eps = true_model.mu(theta_bar) - model.mu(t0);
  const ModelDerivatives d = model_derivatives(t0, model);
  r.a = matrix_a(d, eps, noise_var);
  r.b = matrix_b(d, eps, noise_var);
  r.bound = lower_bound(theta_bar, t0, r.a, r.b);
  r.lb_peb = lb_position(theta_bar, t0, r.bound.mcrb);
  r.lb_aeb = std::sqrt(r.bound.lb(0, 0));
  r.lb_deb = std::sqrt(r.bound.lb(1, 1));
  return r;
}

CMat numeric_jacobian(const ChannelParams& theta, const SignalModel& model, double fd_step) {
  const Vec4 base = theta.as_vector();
  // steps: absolute for the two angles, relative for delay and amplitude
  const Vec4 steps(fd_step, fd_step * theta.delay, fd_step * theta.gain_amplitude, fd_step);
  CMat j(model.size(), 4);
  for (int i = 0; i < 4; ++i) {
    Vec4 up = base, down = base;
    up[i] += steps[i];
    down[i] -= steps[i];
    j.col(i) = (model.mu(ChannelParams::from_vector(up)) -
                model.mu(ChannelParams::from_vector(down))) /
               (2.0 * steps[i]);
  }
  return j;
}

BoundsReport crb_m1_numeric(const ChannelParams& theta_bar, const ImpairedModel& model,
                            double noise_std, double fd_step, double x_clip) {
  if (!(noise_std > 0.0)) throw DomainError("crb_m1_numeric: noise std must be positive");
  BoundsReport r;
  r.theta = theta_bar;
  if (std::isfinite(x_clip)) {
    const CMat& pa = model.pa_input();
    for (Eigen::Index i = 0; i < pa.size(); ++i)
      if (std::abs(std::abs(pa(i)) - x_clip) <= fd_step * x_clip) {
        r.warnings.emplace_back("PA input sample within fd step of the clip level (kink)");
        break;
      }
  }
  r.fim_theta = fim_from_jacobian(numeric_jacobian(theta_bar, model, fd_step), noise_std * noise_std);
  r.crb_theta = symmetrize(stable_inverse(r.fim_theta, "crb_m1: theta"));
  r.crb_state = symmetrize(
      stable_inverse(fim_state(r.fim_theta, jacobian_state(theta_bar)), "crb_m1: state"));
  r.scalar = scalar_bounds(r.fim_theta, r.crb_state);
  return r;
}

}  // namespace hwiloc
