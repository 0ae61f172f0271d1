#include <gtest/gtest.h>

#include <random>

#include "hwiloc/impairments.hpp"
#include "hwiloc/model_core.hpp"

using namespace hwiloc;

TEST(Sample, AllZeroSigmas) {
  ImpairmentConfig cfg = ImpairmentConfig::neutral();
  std::mt19937_64 rng(1);
  const auto r = sample_realization(cfg, {4, 3, 8}, rng);
  EXPECT_TRUE(r.pn_phases.isZero(0.0));
  EXPECT_EQ(r.cfo, 0.0);
  EXPECT_TRUE(r.mc_residual.isZero(0.0));
  EXPECT_EQ(r.pn_phases.rows(), 3);
  EXPECT_EQ(r.pn_phases.cols(), 8);
  EXPECT_EQ(r.mc_residual.rows(), 4);
}

TEST(Sample, PhaseNoiseVariance) {
  ImpairmentConfig cfg = ImpairmentConfig::reference_profile();
  std::mt19937_64 rng(2);
  const auto r = sample_realization(cfg, {2, 100, 1000}, rng);
  const double mean = r.pn_phases.mean();
  const double var = (r.pn_phases.array() - mean).square().sum() / (r.pn_phases.size() - 1);
  EXPECT_NEAR(var / (cfg.sigma_pn * cfg.sigma_pn), 1.0, 0.03);
}

TEST(Sample, MutualCouplingResidualVariance) {
  ImpairmentConfig cfg = ImpairmentConfig::neutral();
  cfg.sigma_mc = 0.02;
  std::mt19937_64 rng(3);
  const auto r = sample_realization(cfg, {300, 1, 1}, rng);
  const double var = r.mc_residual.array().square().mean();
  EXPECT_NEAR(var / (0.02 * 0.02), 1.0, 0.03);
}

TEST(Sample, SameSeedSameRealization) {
  const ImpairmentConfig cfg = ImpairmentConfig::reference_profile();
  std::mt19937_64 a(7), b(7);
  const auto ra = sample_realization(cfg, {4, 2, 8}, a);
  const auto rb = sample_realization(cfg, {4, 2, 8}, b);
  EXPECT_EQ(ra.pn_phases, rb.pn_phases);
  EXPECT_EQ(ra.cfo, rb.cfo);
  EXPECT_EQ(ra.mc_residual, rb.mc_residual);
}

TEST(Sample, SigmaSweepOnlyRescales) {
  ImpairmentConfig lo = ImpairmentConfig::reference_profile(), hi = lo;
  hi.sigma_pn = 3.0 * lo.sigma_pn;
  std::mt19937_64 a(8), b(8);
  const auto ra = sample_realization(lo, {4, 2, 8}, a);
  const auto rb = sample_realization(hi, {4, 2, 8}, b);
  EXPECT_LT((rb.pn_phases - 3.0 * ra.pn_phases).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(ra.cfo, rb.cfo);
}

TEST(PhaseNoise, ZeroIsIdentity) {
  const DiagMat xi = pn_matrix(Eigen::VectorXd::Zero(5));
  for (int k = 0; k < 5; ++k) EXPECT_EQ(xi.diagonal()[k], cd(1.0));
}

TEST(PhaseNoise, QuarterTurnGivesJ) {
  const DiagMat xi = pn_matrix(Eigen::VectorXd::Constant(3, kPi / 2.0));
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(xi.diagonal()[k].real(), 0.0, 1e-15);
    EXPECT_NEAR(xi.diagonal()[k].imag(), 1.0, 1e-15);
  }
}

TEST(PhaseNoise, UnitDeterminantModulus) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd w(16);
  for (auto& v : w) v = n(rng);
  EXPECT_NEAR(std::abs(pn_matrix(w).diagonal().prod()), 1.0, 1e-13);
}

TEST(Cfo, ZeroIsIdentity) {
  const DiagMat e = cfo_matrix(0.0, 3, 8, 2);
  for (int k = 0; k < 8; ++k) EXPECT_EQ(e.diagonal()[k], cd(1.0));
}

TEST(Cfo, HandEvaluatedHalfSubcarrier) {
  // common phase 2 pi 0.5 * 1 * 5 / 4 = 5 pi / 4 and ramp n pi / 4
  const DiagMat e = cfo_matrix(0.5, 1, 4, 1);
  for (int n = 0; n < 4; ++n) {
    const cd want = std::polar(1.0, 5.0 * kPi / 4.0 + n * kPi / 4.0);
    EXPECT_NEAR(std::abs(e.diagonal()[n] - want), 0.0, 1e-14);
  }
}

TEST(Cfo, ConsecutiveTransmissionsDifferByConstantPhase) {
  const double eps = 0.013;
  const int k = 16, cp = 3;
  const cd step = std::polar(1.0, 2.0 * kPi * eps * (k + cp) / k);
  for (int g = 1; g < 6; ++g) {
    const CVec ratio = cfo_matrix(eps, g + 1, k, cp).diagonal().cwiseQuotient(
        cfo_matrix(eps, g, k, cp).diagonal());
    for (int n = 0; n < k; ++n) EXPECT_NEAR(std::abs(ratio[n] - step), 0.0, 1e-13);
  }
}

TEST(Mixers, ApplyThenConjugateRestores) {
  std::mt19937_64 rng(10);
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd w(12);
  for (auto& v : w) v = n(rng);
  CVec x(12);
  for (auto& v : x) v = cd(n(rng), n(rng));
  const DiagMat xi = pn_matrix(w);
  const DiagMat e = cfo_matrix(0.07, 4, 12, 2);
  const CVec back = e.diagonal().conjugate().asDiagonal() *
                    (xi.diagonal().conjugate().asDiagonal() * (xi * (e * x)));
  EXPECT_LT((back - x).norm(), 1e-12);
}

TEST(Coupling, EmptyBandIsIdentity) {
  EXPECT_EQ(mc_matrix({}, 4), CMat::Identity(4, 4));
}

TEST(Coupling, TableOneFirstRow) {
  const CMat c = mc_matrix(ImpairmentConfig::reference_profile().mc_coeffs, 4);
  EXPECT_EQ(c(0, 0), cd(1.0));
  EXPECT_EQ(c(0, 1), cd(0.6, 0.5));
  EXPECT_EQ(c(0, 2), cd(0.4054, -0.128));
  EXPECT_EQ(c(0, 3), cd(0.0));
}

TEST(Coupling, SymmetricBandedToeplitzForAnyN) {
  const auto coeffs = ImpairmentConfig::reference_profile().mc_coeffs;
  for (int n = 3; n <= 12; ++n) {
    const CMat c = mc_matrix(coeffs, n);
    EXPECT_EQ(c, c.transpose());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const int lag = std::abs(i - j);
        const cd want = lag == 0 ? cd(1.0) : (lag <= 2 ? coeffs[lag - 1] : cd(0.0));
        EXPECT_EQ(c(i, j), want);
      }
  }
}

TEST(Coupling, BandTooWideIsConfigError) {
  EXPECT_THROW(mc_matrix(ImpairmentConfig::reference_profile().mc_coeffs, 2), ConfigError);
  ImpairmentConfig cfg = ImpairmentConfig::reference_profile();
  EXPECT_THROW(cfg.validate(2), ConfigError);
}

TEST(Coupling, ResidualAddsToEveryEntry) {
  ImpairmentConfig cfg = ImpairmentConfig::reference_profile();
  ImpairmentRealization r = ImpairmentRealization::zero({5, 1, 1});
  r.mc_residual.setConstant(0.01);
  const CMat c = coupling_matrix(cfg, r, 5);
  const CMat base = mc_matrix(cfg.mc_coeffs, 5);
  EXPECT_LT((c - base - CMat::Constant(5, 5, 0.01)).cwiseAbs().maxCoeff(), 1e-16);
}

TEST(PowerAmp, LinearBelowClipIsIdentity) {
  const cd x(3.0, -4.0);
  EXPECT_EQ(pa_apply(x, {1.0, 0.0, 0.0}, 25.0), x);
}

TEST(PowerAmp, TableOneAtUnitInput) {
  const cd y = pa_apply(cd(1.0), ImpairmentConfig::reference_profile().pa_coeffs, 25.0);
  EXPECT_NEAR(y.real(), 0.9913, 1e-12);
  EXPECT_NEAR(y.imag(), 0.0244, 1e-12);
}

TEST(PowerAmp, ClipSaturatesAtLevel) {
  EXPECT_NEAR(std::abs(pa_apply(cd(50.0), {1.0, 0.0, 0.0}, 25.0) - cd(25.0)), 0.0, 1e-15);
}

TEST(PowerAmp, ContinuousAtClipForRandomCoefficients) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 0.3);
  std::uniform_real_distribution<double> ph(-kPi, kPi);
  for (int t = 0; t < 100; ++t) {
    const std::vector<cd> beta = {cd(1.0 + n(rng), n(rng)), cd(n(rng), n(rng)), cd(n(rng), n(rng))};
    const double clip = 5.0 + std::abs(n(rng)) * 10.0;
    const double phase = ph(rng);
    const cd below = pa_apply(std::polar(clip * (1.0 - 1e-14), phase), beta, clip);
    const cd above = pa_apply(std::polar(clip * (1.0 + 1e-14), phase), beta, clip);
    EXPECT_LT(std::abs(below - above), 1e-12 * std::max(1.0, std::abs(below)));
  }
}

TEST(PowerAmp, RealCoefficientsPreservePhase) {
  const std::vector<cd> beta = {0.97, 0.01, -0.001};
  for (double phase : {0.3, -2.0, 3.0}) {
    for (double mag : {1.0, 10.0, 40.0}) {
      const cd y = pa_apply(std::polar(mag, phase), beta, 25.0);
      EXPECT_NEAR(std::remainder(std::arg(y) - phase, 2.0 * kPi), 0.0, 1e-13);
    }
  }
}

TEST(PowerAmp, VectorMatchesScalar) {
  CVec x(3);
  x << cd(1.0, 2.0), cd(-30.0, 0.0), cd(0.0, 0.0);
  const auto beta = ImpairmentConfig::reference_profile().pa_coeffs;
  const CVec y = pa_apply(x, beta, 25.0);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(y[i], pa_apply(x[i], beta, 25.0));
}

TEST(Config, Validation) {
  ImpairmentConfig cfg = ImpairmentConfig::reference_profile();
  EXPECT_NO_THROW(cfg.validate(10));
  cfg.sigma_pn = -1.0;
  EXPECT_THROW(cfg.validate(10), ConfigError);
  cfg = ImpairmentConfig::reference_profile();
  cfg.x_clip = 0.0;
  EXPECT_THROW(cfg.validate(10), ConfigError);
  EXPECT_TRUE(ImpairmentConfig::neutral().pa_is_linear());
  EXPECT_FALSE(ImpairmentConfig::reference_profile().pa_is_linear());
}
