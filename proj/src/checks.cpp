#include "hwiloc/checks.hpp"

#include <cmath>
#include <sstream>

#include "hwiloc/config.hpp"
#include "hwiloc/harness.hpp"

namespace hwiloc {

namespace {

// Fourth-order central difference of a vector-valued function of one scalar.
template <class F>
CVec central5(F&& f, double h) {
  return (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) / (12.0 * h);
}

template <class F>
CVec central5_second(F&& f, double h) {
  return (-f(-2.0 * h) + 16.0 * f(-h) - 30.0 * f(0.0) + 16.0 * f(h) - f(2.0 * h)) / (12.0 * h * h);
}

ChannelParams shifted(ChannelParams t, int i, double delta) {
  Vec4 v = t.as_vector();
  v[i] += delta;
  return ChannelParams::from_vector(v);
}

std::string fmt_sci(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << v;
  return o.str();
}

}  // namespace

double scaled_difference(const Mat4& a, const Mat4& b) {
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::sqrt(b(i, i) * b(j, j)));
  return worst;
}

DerivativeError derivative_oracle(const ChannelParams& theta, const MismatchedModel& model,
                                  double phase_step) {
  const ModelDerivatives d = model_derivatives(theta, model);
  const int n = static_cast<int>(model.coupling().cols());
  const int k = model.subcarriers();

  // parameter change that moves the fastest phase of mu by phase_step
  Vec4 rate;
  rate[kAoa] = std::max(static_cast<double>(n - 1) * kPi * std::abs(std::cos(theta.aoa)), 1.0);
  rate[kDelay] = 2.0 * kPi * static_cast<double>(k) * model.spacing_hz();
  rate[kGainAmp] = 1.0 / theta.gain_amplitude;
  rate[kGainPhase] = 1.0;
  const Vec4 h = phase_step * rate.cwiseInverse();

  DerivativeError err;
  for (int i = 0; i < 4; ++i) {
    const CVec fd = central5([&](double s) { return model.mu(shifted(theta, i, s)); }, h[i]);
    err.first = std::max(err.first, (d.first_col(i) - fd).norm() / fd.norm());
  }
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      CVec fd;
      if (i == j) {
        fd = central5_second([&](double s) { return model.mu(shifted(theta, i, s)); }, h[i]);
      } else {
        fd = central5(
            [&](double s) { return CVec(model_derivatives(shifted(theta, j, s), model).first_col(i)); },
            h[j]);
      }
      const CVec exact = d.second_col(i, j);
      // d^2/d rho^2 vanishes identically; measure it against the natural scale
      const double scale = exact.norm() > 0.0 ? fd.norm() : d.first_col(i).norm() * rate[j];
      err.second = std::max(err.second, (exact - fd).norm() / scale);
    }
  return err;
}

Mat4 numeric_state_jacobian(const ChannelParams& theta, double rel_step) {
  const UeState s0 = params_to_state(theta);
  const Vec4 sv(s0.position.x(), s0.position.y(), s0.gain_amplitude, s0.gain_phase);
  auto params_of = [](const Vec4& s) {
    UeState u;
    u.position = Vec2(s[0], s[1]);
    u.gain_amplitude = s[2];
    u.gain_phase = s[3];
    return state_to_params(u).as_vector();
  };
  Mat4 j;
  for (int i = 0; i < 4; ++i) {
    const double scale = i < 2 ? s0.position.norm() : std::max(std::abs(sv[i]), 1.0);
    const double h = rel_step * scale;
    Vec4 up = sv, down = sv;
    up[i] += h;
    down[i] -= h;
    j.row(i) = ((params_of(up) - params_of(down)) / (2.0 * h)).transpose();
  }
  return j;
}

MonteCarloAB monte_carlo_ab(const ChannelParams& theta0, const CVec& mu_true,
                            const MismatchedModel& model, double noise_std, int draws,
                            std::mt19937_64& rng) {
  const ModelDerivatives d = model_derivatives(theta0, model);
  const CVec eps = mu_true - model.mu(theta0);
  const double var = noise_std * noise_std;
  const Eigen::MatrixXd gram = (d.first.adjoint() * d.first).real();
  const CMat first_h = d.first.adjoint();
  const CMat second_h = d.second.adjoint();

  std::normal_distribution<double> unit(0.0, 1.0);
  const double scale = noise_std / std::sqrt(2.0);
  CVec r(eps.size());
  MonteCarloAB mc;
  for (int t = 0; t < draws; ++t) {
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double re = unit(rng);
      const double im = unit(rng);
      r[i] = eps[i] + scale * cd(re, im);
    }
    const Vec4 score = (2.0 / var) * (first_h * r).real();
    const Eigen::VectorXd curv = (second_h * r).real();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) mc.a(i, j) += (2.0 / var) * (curv[4 * i + j] - gram(i, j));
    mc.b += score * score.transpose();
  }
  mc.a /= draws;
  mc.b /= draws;
  mc.draws = draws;
  return mc;
}

double significant_relative_error(const Mat4& exact, const Mat4& estimate, double floor_fraction) {
  const double spectral = Eigen::JacobiSVD<Mat4>(exact).singularValues()[0];
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (std::abs(exact(i, j)) > floor_fraction * spectral)
        worst = std::max(worst, std::abs(estimate(i, j) - exact(i, j)) / std::abs(exact(i, j)));
  return worst;
}

ChannelParams brute_force_pseudo_true(const CVec& mu_true, const MismatchedModel& model,
                                      const ChannelParams& center, double aoa_half_width,
                                      double delay_half_width, int nodes_per_axis) {
  double best = std::numeric_limits<double>::infinity();
  ChannelParams out = center;
  const int m = std::max(nodes_per_axis, 2) - 1;
  for (int a = 0; a <= m; ++a)
    for (int b = 0; b <= m; ++b) {
      const double aoa = center.aoa - aoa_half_width + 2.0 * aoa_half_width * a / m;
      const double delay = center.delay - delay_half_width + 2.0 * delay_half_width * b / m;
      const CVec eta = model.eta(aoa, delay);
      const double v = projection_objective(mu_true, eta);
      if (v < best) {
        best = v;
        const cd gain = plug_in_gain(mu_true, eta);
        out = {aoa, delay, std::abs(gain), -std::arg(gain)};
      }
    }
  return out;
}

std::vector<CheckResult> run_validation_suite() {
  std::vector<CheckResult> out;
  auto record = [&](const std::string& name, bool ok, const std::string& detail) {
    out.push_back({name, ok, detail});
  };
  auto guarded = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      record(name, false, std::string("exception: ") + e.what());
    }
  };

  const ExperimentSpec desk = desk_profile();
  SystemConfig sys = desk.system;
  const PilotBlock pilots = make_pilot_block(sys);
  const ChannelParams truth = desk.truth(sys);

  guarded("steering and delay vectors are unit modulus", [&] {
    double worst = 0.0;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-kPi, kPi);
    for (int t = 0; t < 200; ++t) {
      worst = std::max(worst, (steering_vector(u(rng), 10).cwiseAbs().array() - 1.0).abs().maxCoeff());
      worst = std::max(worst, (delay_vector(std::abs(u(rng)) * 1e-8, 32, 3.125e7).cwiseAbs().array() - 1.0)
                                  .abs()
                                  .maxCoeff());
    }
    record("steering and delay vectors are unit modulus", worst < 1e-12, "max deviation " + fmt_sci(worst));
  });

  guarded("DFT matrix is unitary and symmetric", [&] {
    double worst = 0.0;
    for (int k : {1, 2, 4, 8, 64, 100}) {
      const CMat f = dft_matrix(k);
      worst = std::max(worst, (f * f.adjoint() - CMat::Identity(k, k)).cwiseAbs().maxCoeff());
      worst = std::max(worst, (f - f.transpose()).cwiseAbs().maxCoeff());
    }
    record("DFT matrix is unitary and symmetric", worst < 1e-12, "max deviation " + fmt_sci(worst));
  });

  guarded("pilots constant modulus, combiners unit norm", [&] {
    const double pr = sys.tx_power_watt() * sys.load_ohm;
    const double dev_x = (pilots.symbols.cwiseAbs2().array() - pr).abs().maxCoeff() / pr;
    const double dev_w = (pilots.combiners.colwise().norm().array() - 1.0).abs().maxCoeff();
    record("pilots constant modulus, combiners unit norm", dev_x < 1e-12 && dev_w < 1e-12,
           "pilot " + fmt_sci(dev_x) + ", combiner " + fmt_sci(dev_w));
  });

  guarded("analytic derivatives match finite differences", [&] {
    const MismatchedModel model(sys, pilots, desk.impairments);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> aoa(-1.3, 1.3), range(1.0, 9.0), phase(-kPi, kPi);
    DerivativeError worst;
    for (int t = 0; t < 10; ++t) {
      const double r = range(rng);
      const ChannelParams th{aoa(rng), r / kSpeedOfLight,
                             std::abs(gain_from_geometry(r / kSpeedOfLight, sys.wavelength(), 0.0)),
                             phase(rng)};
      const DerivativeError e = derivative_oracle(th, model);
      worst.first = std::max(worst.first, e.first);
      worst.second = std::max(worst.second, e.second);
    }
    record("analytic derivatives match finite differences", worst.first < 1e-6 && worst.second < 1e-6,
           "first " + fmt_sci(worst.first) + ", second " + fmt_sci(worst.second));
  });

  guarded("state Jacobian matches finite differences", [&] {
    const Mat4 exact = jacobian_state(truth);
    const Mat4 fd = numeric_state_jacobian(truth);
    const double err = (exact - fd).norm() / exact.norm();
    record("state Jacobian matches finite differences", err < 1e-6, "relative " + fmt_sci(err));
  });

  guarded("mismatch-free LB equals CRB-M2", [&] {
    const ImpairmentConfig imp = ImpairmentConfig::neutral();
    const MismatchedModel mm(sys, pilots, imp);
    const ImpairedModel tm(sys, pilots, imp,
                           ImpairmentRealization::zero({sys.antennas, sys.transmissions, sys.subcarriers}));
    const double sn = noise_std(sys);
    const BoundsReport crb = crb_m2(truth, mm, sn);
    const MismatchReport mr = mismatch_bounds(truth, tm, mm, sn);
    const double dtheta = (mr.pseudo_true.theta0.as_vector() - truth.as_vector()).cwiseAbs().maxCoeff();
    const double rel = scaled_difference(mr.bound.lb, crb.crb_theta);
    record("mismatch-free LB equals CRB-M2", dtheta < 1e-8 && rel < 1e-8,
           "theta0 offset " + fmt_sci(dtheta) + ", LB/CRB rel " + fmt_sci(rel));
  });

  guarded("A and B match their Monte-Carlo expectations", [&] {
    SystemConfig small = sys;
    small.antennas = 4;
    small.transmissions = 2;
    small.subcarriers = 8;
    const PilotBlock pb = make_pilot_block(small);
    const ImpairmentConfig imp = ImpairmentConfig::reference_profile();
    std::mt19937_64 hw(13);
    const ImpairedModel tm(small, pb, imp,
                           sample_realization(imp, {small.antennas, small.transmissions, small.subcarriers}, hw));
    const MismatchedModel mm(small, pb, imp);
    const ChannelParams th = desk.truth(small);
    const double sn = noise_std(small);
    const MismatchReport mr = mismatch_bounds(th, tm, mm, sn);
    std::mt19937_64 rng(14);
    const MonteCarloAB mc = monte_carlo_ab(mr.pseudo_true.theta0, tm.mu(th), mm, sn, 100000, rng);
    const double ea = significant_relative_error(mr.a, mc.a);
    const double eb = significant_relative_error(mr.b, mc.b);
    record("A and B match their Monte-Carlo expectations", ea < 0.02 && eb < 0.02,
           "A " + fmt_sci(ea) + ", B " + fmt_sci(eb));
  });

  guarded("bounds scale with G and noise", [&] {
    const MismatchedModel base(sys, pilots, desk.impairments);
    // four identical copies of the transmission block
    PilotBlock tiled;
    tiled.symbols = pilots.symbols.replicate(4, 1);
    tiled.combiners = pilots.combiners.replicate(1, 4);
    SystemConfig big = sys;
    big.transmissions *= 4;
    const MismatchedModel quad(big, tiled, desk.impairments);
    const double sn = noise_std(sys);
    const ScalarBounds b1 = crb_m2(truth, base, sn).scalar;
    const ScalarBounds b4 = crb_m2(truth, quad, sn).scalar;
    const ScalarBounds b2 = crb_m2(truth, base, 2.0 * sn).scalar;
    const double g_aeb = b1.aeb / b4.aeb, g_deb = b1.deb / b4.deb;
    const double n_aeb = b2.aeb / b1.aeb, n_deb = b2.deb / b1.deb;
    const bool ok = std::abs(g_aeb - 2.0) < 0.02 && std::abs(g_deb - 2.0) < 0.02 &&
                    std::abs(n_aeb - 2.0) < 2e-10 && std::abs(n_deb - 2.0) < 2e-10;
    std::ostringstream o;
    o.precision(12);
    o << "G x4: " << g_aeb << ", " << g_deb << "; sigma x2: " << n_aeb << ", " << n_deb;
    record("bounds scale with G and noise", ok, o.str());
  });

  guarded("config render and parse round-trip", [&] {
    const std::string text = render_config(desk);
    const std::string again = render_config(parse_config_string(text));
    record("config render and parse round-trip", text == again, text == again ? "identical" : "differs");
  });

  guarded("bounds sweep is deterministic", [&] {
    ExperimentSpec spec = desk;
    spec.values = {0.0, 30.0};
    spec.realizations = 2;
    std::ostringstream a, b;
    write_csv(a, run_bounds_sweep(spec).rows);
    write_csv(b, run_bounds_sweep(spec).rows);
    record("bounds sweep is deterministic", a.str() == b.str(), std::to_string(a.str().size()) + " bytes");
  });

  return out;
}

}  // namespace hwiloc
