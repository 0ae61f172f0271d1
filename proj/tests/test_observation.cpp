#include <gtest/gtest.h>

#include <random>

#include "hwiloc/observation.hpp"

using namespace hwiloc;

namespace {

SystemConfig tiny(int n, int g, int k) {
  SystemConfig cfg;
  cfg.antennas = n;
  cfg.transmissions = g;
  cfg.subcarriers = k;
  cfg.cp_length = 1;
  return cfg;
}

ImpairmentConfig no_coupling() {
  ImpairmentConfig imp;
  imp.mc_coeffs.clear();
  return imp;
}

}  // namespace

TEST(MismatchedMean, AllOnesCase) {
  SystemConfig cfg = tiny(1, 2, 3);
  PilotBlock pb{CMat::Ones(2, 3), CMat::Ones(1, 2)};
  const CVec mu = mu_m2({0.4, 0.0, 1.0, 0.0}, cfg, pb, no_coupling());
  ASSERT_EQ(mu.size(), 6);
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(std::abs(mu[i] - cd(1.0)), 0.0, 1e-15);
}

TEST(MismatchedMean, HandExpansionTwoByTwo) {
  // G=1, K=2, N=2 with the reference coupling band truncated to c1
  SystemConfig cfg = tiny(2, 1, 2);
  ImpairmentConfig imp;
  imp.mc_coeffs = {cd(0.6, 0.5)};
  PilotBlock pb;
  pb.symbols.resize(1, 2);
  pb.symbols << cd(1.0, 1.0), cd(-2.0, 0.5);
  pb.combiners.resize(2, 1);
  pb.combiners << cd(0.6, 0.0), cd(0.0, 0.8);
  const double aoa = 0.3, tau = 2.5e-9, rho = 0.7, xi = 0.4;
  const double df = cfg.subcarrier_spacing();

  const cd a1 = std::exp(kJ * (kPi * std::sin(aoa)));
  const cd c1(0.6, 0.5);
  // w^T C a with C = [[1, c1], [c1, 1]]
  const cd s = pb.combiners(0, 0) * (1.0 + c1 * a1) + pb.combiners(1, 0) * (c1 + a1);
  const cd alpha = rho * std::exp(-kJ * xi);
  CVec want(2);
  for (int k = 1; k <= 2; ++k)
    want[k - 1] = alpha * s * std::exp(-kJ * (2.0 * kPi * k * df * tau)) * pb.symbols(0, k - 1);

  const CVec got = mu_m2({aoa, tau, rho, xi}, cfg, pb, imp);
  EXPECT_LT((got - want).norm(), 1e-14 * want.norm());
}

TEST(MismatchedMean, LinearInGainAndPilots) {
  SystemConfig cfg = tiny(4, 3, 8);
  const PilotBlock pb = make_pilot_block(cfg);
  const ImpairmentConfig imp = ImpairmentConfig::neutral();
  const ChannelParams th{0.2, 2e-8, 1e-4, 0.1};
  ChannelParams th2 = th;
  th2.gain_amplitude *= 2.0;
  EXPECT_LT((mu_m2(th2, cfg, pb, imp) - 2.0 * mu_m2(th, cfg, pb, imp)).norm(), 1e-18);

  PilotBlock scaled = pb;
  scaled.symbols(1, 5) *= cd(0.0, 3.0);
  const CVec base = mu_m2(th, cfg, pb, imp);
  const CVec changed = mu_m2(th, cfg, scaled, imp);
  for (int i = 0; i < base.size(); ++i) {
    const cd want = i == 1 * 8 + 5 ? base[i] * cd(0.0, 3.0) : base[i];
    EXPECT_LT(std::abs(changed[i] - want), 1e-18);
  }
}

TEST(MismatchedMean, NegativeDelayIsDomainError) {
  SystemConfig cfg = tiny(2, 1, 2);
  const PilotBlock pb = make_pilot_block(cfg);
  EXPECT_THROW(mu_m2({0.0, -1e-9, 1.0, 0.0}, cfg, pb, no_coupling()), DomainError);
}

TEST(ImpairedMean, NeutralChainEqualsMismatched) {
  SystemConfig cfg = tiny(6, 4, 16);
  const PilotBlock pb = make_pilot_block(cfg);
  const ImpairmentConfig imp = ImpairmentConfig::neutral();
  const ChannelParams th{-0.4, 1.3e-8, 2e-4, 1.1};
  const CVec m1 = mu_m1(th, cfg, pb, imp, ImpairmentRealization::zero({6, 4, 16}));
  const CVec m2 = mu_m2(th, cfg, pb, imp);
  EXPECT_LT((m1 - m2).cwiseAbs().maxCoeff(), 1e-10 * m2.cwiseAbs().maxCoeff());
}

TEST(ImpairedMean, PhaseNoiseOnlyPreservesEnergyPerTransmission) {
  SystemConfig cfg = tiny(4, 3, 16);
  const PilotBlock pb = make_pilot_block(cfg);
  ImpairmentConfig imp = ImpairmentConfig::neutral();
  imp.sigma_pn = 0.3;
  std::mt19937_64 rng(5);
  const auto r = sample_realization(imp, {4, 3, 16}, rng);
  const ChannelParams th{0.5, 1e-8, 1.0, 0.0};
  const CVec m1 = mu_m1(th, cfg, pb, imp, r);
  const CVec m2 = mu_m2(th, cfg, pb, imp);
  for (int g = 0; g < 3; ++g)
    EXPECT_NEAR(m1.segment(g * 16, 16).norm(), m2.segment(g * 16, 16).norm(), 1e-10 * m2.norm());
  EXPECT_GT((m1 - m2).norm(), 1e-3 * m2.norm());
}

TEST(ImpairedMean, HandExpansionWithCfo) {
  // G=1, K=2, N=1, linear PA: mu = F E_1 F^H (alpha s d .* x)
  SystemConfig cfg = tiny(1, 1, 2);
  cfg.cp_length = 3;
  ImpairmentConfig imp = no_coupling();
  PilotBlock pb;
  pb.symbols.resize(1, 2);
  pb.symbols << cd(2.0, -1.0), cd(0.5, 0.5);
  pb.combiners = CMat::Constant(1, 1, cd(0.0, 1.0));
  ImpairmentRealization r = ImpairmentRealization::zero({1, 1, 2});
  r.cfo = 0.1;
  const double tau = 3e-9, df = cfg.subcarrier_spacing();
  const ChannelParams th{0.0, tau, 1.0, 0.0};

  cd v[2];
  for (int k = 0; k < 2; ++k)
    v[k] = cd(0.0, 1.0) * std::exp(-kJ * (2.0 * kPi * (k + 1) * df * tau)) * pb.symbols(0, k);
  const double h = 1.0 / std::sqrt(2.0);
  const cd t0 = h * (v[0] + v[1]), t1 = h * (v[0] - v[1]);  // F^H v for K = 2
  const cd common = std::exp(kJ * (2.0 * kPi * 0.1 * 1.0 * 5.0 / 2.0));
  const cd e0 = common, e1 = common * std::exp(kJ * (2.0 * kPi * 0.1 / 2.0));
  const cd u0 = e0 * t0, u1 = e1 * t1;
  const cd want0 = h * (u0 + u1), want1 = h * (u0 - u1);

  const CVec got = mu_m1(th, cfg, pb, imp, r);
  EXPECT_NEAR(std::abs(got[0] - want0), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(got[1] - want1), 0.0, 1e-13);
}

TEST(ImpairedMean, MixingSandwichIsUnitary) {
  SystemConfig cfg = tiny(3, 2, 32);
  const PilotBlock pb = make_pilot_block(cfg);
  ImpairmentConfig imp = ImpairmentConfig::neutral();
  imp.sigma_pn = 0.5;
  imp.sigma_cfo = 0.05;
  std::mt19937_64 rng(6);
  const auto r = sample_realization(imp, {3, 2, 32}, rng);
  const ImpairedModel with(cfg, pb, imp, r);
  const ImpairedModel without(cfg, pb, imp, ImpairmentRealization::zero({3, 2, 32}));
  const CVec a = with.eta(0.2, 1e-8), b = without.eta(0.2, 1e-8);
  for (int g = 0; g < 2; ++g)
    EXPECT_NEAR(a.segment(g * 32, 32).norm(), b.segment(g * 32, 32).norm(), 1e-10 * b.norm());
}

TEST(ImpairedMean, PermutingTransmissionsPermutesBlocks) {
  SystemConfig cfg = tiny(4, 3, 8);
  PilotBlock pb = make_pilot_block(cfg);
  ImpairmentConfig imp = ImpairmentConfig::reference_profile();
  imp.sigma_cfo = 0.0;
  std::mt19937_64 rng(7);
  ImpairmentRealization r = sample_realization(imp, {4, 3, 8}, rng);
  const ChannelParams th{0.1, 1e-8, 1.0, 0.2};
  const CVec base = mu_m1(th, cfg, pb, imp, r);

  const int perm[3] = {2, 0, 1};
  PilotBlock pp = pb;
  ImpairmentRealization rp = r;
  for (int g = 0; g < 3; ++g) {
    pp.symbols.row(g) = pb.symbols.row(perm[g]);
    pp.combiners.col(g) = pb.combiners.col(perm[g]);
    rp.pn_phases.row(g) = r.pn_phases.row(perm[g]);
  }
  const CVec permuted = mu_m1(th, cfg, pp, imp, rp);
  for (int g = 0; g < 3; ++g)
    EXPECT_LT((permuted.segment(g * 8, 8) - base.segment(perm[g] * 8, 8)).norm(), 1e-13 * base.norm());
}

TEST(ImpairedMean, StackingIsTransmissionMajor) {
  SystemConfig cfg = tiny(2, 3, 4);
  const PilotBlock pb = make_pilot_block(cfg);
  const MismatchedModel m(cfg, pb, no_coupling());
  const CVec eta = m.eta(0.3, 1e-8);
  const CVec s = m.beam_gains(0.3);
  const CVec d = delay_vector(1e-8, 4, cfg.subcarrier_spacing());
  for (int g = 0; g < 3; ++g)
    for (int k = 0; k < 4; ++k)
      EXPECT_NEAR(std::abs(eta[g * 4 + k] - s[g] * d[k] * pb.symbols(g, k)), 0.0, 1e-14);
}

TEST(Observe, ZeroNoiseIsExact) {
  CVec mu = CVec::Random(20);
  std::mt19937_64 rng(1);
  EXPECT_EQ(observe(mu, 0.0, rng).y, mu);
}

TEST(Observe, PerElementVariance) {
  const CVec mu = CVec::Zero(100000);
  std::mt19937_64 rng(2);
  const double sigma = 0.3;
  const CVec y = observe(mu, sigma, rng).y;
  const double var = y.squaredNorm() / static_cast<double>(y.size());
  EXPECT_NEAR(var / (sigma * sigma), 1.0, 0.03);
  const double re = y.real().squaredNorm() / static_cast<double>(y.size());
  EXPECT_NEAR(re / (sigma * sigma / 2.0), 1.0, 0.03);
}

TEST(Observe, SameSeedSameNoise) {
  const CVec mu = CVec::Zero(50);
  std::mt19937_64 a(3), b(3);
  EXPECT_EQ(observe(mu, 1.0, a).y, observe(mu, 1.0, b).y);
}

TEST(Observe, NegativeSigmaIsDomainError) {
  std::mt19937_64 rng(4);
  EXPECT_THROW(observe(CVec::Zero(3), -1.0, rng), DomainError);
}
