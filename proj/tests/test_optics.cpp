#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "oam/optics.hpp"
#include "oam/witness.hpp"
#include "test_support.hpp"

namespace oam {
namespace {

const PathSet kAbcd{Path::A, Path::B, Path::C, Path::D};

BasisKet abcd(int a, int b, int c, int d) { return BasisKet{{Path::A, a}, {Path::B, b}, {Path::C, c}, {Path::D, d}}; }

PureState four_flat() { return four_photon_state(PairSpec::flat(Path::A, Path::B), PairSpec::flat(Path::C, Path::D)); }

std::set<BasisKet> support(const MixedState& s) {
  std::set<BasisKet> out;
  for (const auto& m : s.members())
    for (const auto& [ket, amp] : m.state.terms()) out.insert(ket);
  return out;
}

const std::set<BasisKet> kFiveTerms{abcd(1, -1, 1, -1), abcd(1, -1, -1, 1), abcd(0, 0, 0, 0), abcd(-1, 1, 1, -1),
                                    abcd(-1, 1, -1, 1)};

TEST(SpdcPair, FlatTriplet) {
  const PureState s = spdc_pair(PairSpec::flat(Path::A, Path::B));
  ASSERT_EQ(s.size(), 3u);
  for (int l : {-1, 0, 1})
    EXPECT_NEAR(std::abs(s.amplitude(BasisKet{{Path::A, l}, {Path::B, -l}}) - 1.0 / std::sqrt(3.0)), 0.0, 1e-15);
}

TEST(SpdcPair, SingleMode) {
  const PureState s = spdc_pair(PairSpec{Path::A, Path::B, {{0, 1.0}}});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(std::abs(s.amplitude(BasisKet{{Path::A, 0}, {Path::B, 0}})), 1.0, 1e-15);
}

TEST(SpdcPair, UnbalancedProbabilities) {
  const PureState s = spdc_pair(PairSpec{Path::A, Path::B, {{-1, 1.0}, {0, std::sqrt(2.0)}, {1, 1.0}}});
  EXPECT_NEAR(std::norm(s.amplitude(BasisKet{{Path::A, -1}, {Path::B, 1}})), 0.25, 1e-15);
  EXPECT_NEAR(std::norm(s.amplitude(BasisKet{{Path::A, 0}, {Path::B, 0}})), 0.5, 1e-15);
  EXPECT_NEAR(std::norm(s.amplitude(BasisKet{{Path::A, 1}, {Path::B, -1}})), 0.25, 1e-15);
}

TEST(SpdcPair, InvalidSpecsRejected) {
  EXPECT_THROW(spdc_pair(PairSpec{Path::A, Path::B, {{0, 1.0}, {1, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(spdc_pair(PairSpec{Path::A, Path::A, {{0, 1.0}}}), std::invalid_argument);
  EXPECT_THROW(spdc_pair(PairSpec{Path::A, Path::B, {{0, 0.0}}}), std::invalid_argument);
}

TEST(FourPhoton, NineEqualAmplitudes) {
  const PureState s = four_flat();
  ASSERT_EQ(s.size(), 9u);
  for (const auto& [ket, amp] : s.terms()) EXPECT_NEAR(std::abs(amp - 1.0 / 3.0), 0.0, 1e-15);
}

TEST(FourPhoton, VacuumModes) {
  const PureState s = four_photon_state(PairSpec{Path::A, Path::B, {{0, 1.0}}}, PairSpec{Path::C, Path::D, {{0, 1.0}}});
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(std::abs(s.amplitude(abcd(0, 0, 0, 0))), 1.0, 1e-15);
}

TEST(FourPhoton, TermCountIsProduct) {
  std::mt19937_64 rng(43);
  std::uniform_int_distribution<int> half(0, 2);
  std::uniform_real_distribution<double> amp(0.1, 1.0);
  for (int t = 0; t < 20; ++t) {
    auto random_spec = [&](Path s, Path i) {
      PairSpec p{s, i, {}};
      const int h = half(rng);
      for (int l = -h; l <= h; ++l) p.amplitudes[l] = amp(rng);
      return p;
    };
    const PairSpec p1 = random_spec(Path::A, Path::B);
    const PairSpec p2 = random_spec(Path::C, Path::D);
    EXPECT_EQ(four_photon_state(p1, p2).size(), p1.amplitudes.size() * p2.amplitudes.size());
  }
}

TEST(FourPhoton, PathCollisionRejected) {
  EXPECT_THROW(four_photon_state(PairSpec::flat(Path::A, Path::B), PairSpec::flat(Path::B, Path::D)),
               std::invalid_argument);
}

TEST(ParitySplit, FiveTermSupportForEveryLambda) {
  for (double lambda : {0.0, 0.3, 1.0}) {
    const CoincidenceResult r = parity_split_coincidence(four_flat(), SplitterConfig{}, lambda);
    EXPECT_EQ(support(r.state), kFiveTerms) << "lambda " << lambda;
  }
}

TEST(ParitySplit, CoherentStateIsTheFiveTermSuperposition) {
  const CoincidenceResult r = parity_split_coincidence(four_flat(), SplitterConfig{}, 1.0);
  ASSERT_EQ(r.state.members().size(), 1u);
  const PureState& s = r.state.members().front().state;
  for (const auto& k : kFiveTerms) EXPECT_NEAR(std::abs(s.amplitude(k) - 1.0 / std::sqrt(5.0)), 0.0, 1e-12);
}

TEST(ParitySplit, EvenEvenSingleTermPasses) {
  const PureState s(BasisKet{{Path::B, 0}, {Path::C, 0}});
  const CoincidenceResult r = parity_split_coincidence(s, SplitterConfig{}, 1.0);
  EXPECT_NEAR(r.success_probability, 1.0, 1e-15);
  EXPECT_EQ(support(r.state), (std::set<BasisKet>{BasisKet{{Path::B, 0}, {Path::C, 0}}}));
}

// Brute-force routing count: a term survives when the two input photons
// leave through different ports, i.e. when their parities agree.
TEST(ParitySplit, SuccessProbabilityMatchesRoutingEnumeration) {
  const PureState s = four_flat();
  double expected = 0.0;
  for (const auto& [ket, amp] : s.terms()) {
    const bool b_odd = (ket.oam(Path::B) % 2) != 0;
    const bool c_odd = (ket.oam(Path::C) % 2) != 0;
    const int port_b = b_odd ? 1 : 0;
    const int port_c = c_odd ? 0 : 1;
    if (port_b != port_c) expected += std::norm(amp);
  }
  EXPECT_NEAR(expected, 5.0 / 9.0, 1e-15);
  for (double lambda : {0.0, 0.5, 1.0})
    EXPECT_NEAR(parity_split_coincidence(s, SplitterConfig{}, lambda).success_probability, expected, 1e-12);
}

TEST(ParitySplit, RejectsMissingInputsAndBadLambda) {
  const PureState ab = spdc_pair(PairSpec::flat(Path::A, Path::B));
  EXPECT_THROW(parity_split_coincidence(ab, SplitterConfig{}, 1.0), std::invalid_argument);
  EXPECT_THROW(parity_split_coincidence(four_flat(), SplitterConfig{}, 1.5), std::invalid_argument);
}

TEST(Herald, BalancedTriggerGivesTarget) {
  const CoincidenceResult c = parity_split_coincidence(four_flat(), SplitterConfig{}, 1.0);
  const HeraldResult h = herald(c.state, HeraldSpec::balanced());
  EXPECT_NEAR(fidelity(h.state, target_332()), 1.0, 1e-12);
  EXPECT_NEAR(h.probability, 0.3, 1e-12);  // (|<P|1>|^2 * 2 + |<P|-1>|^2 * 2 + |<P|0>|^2) / 5
}

TEST(Herald, OrthogonalTriggerHasZeroProbability) {
  const CoincidenceResult c = parity_split_coincidence(four_flat(), SplitterConfig{}, 1.0);
  const HeraldResult h = herald(c.state, HeraldSpec{Path::D, {{2, 1.0}}});
  EXPECT_EQ(h.probability, 0.0);
}

TEST(Herald, MissingTriggerPathRejected) {
  EXPECT_THROW(herald(MixedState(target_332()), HeraldSpec::balanced()), std::invalid_argument);
}

// Symbolic amplitude bookkeeping for non-flat pairs (a0/a1 = sqrt2) with the
// trigger 0.51|0> + 0.86|-1>. The |0,0,0> branch carries a0^2 * h0 and each
// odd branch a1^2 * h_{-1}, so the heralded ratio is (a0^2 h0)/(a1^2 h1).
TEST(Herald, UnbalancedPairsWithCompensatingTrigger) {
  const double a0 = std::sqrt(2.0);
  const double a1 = 1.0;
  Experiment e;
  e.pair1 = PairSpec{Path::A, Path::B, {{-1, a1}, {0, a0}, {1, a1}}};
  e.pair2 = PairSpec{Path::C, Path::D, {{-1, a1}, {0, a0}, {1, a1}}};
  e.herald = HeraldSpec{};  // 0.51, 0.86
  const HeraldedSource src = heralded_state(e, 1.0);
  ASSERT_EQ(src.state.members().size(), 1u);
  const PureState& s = src.state.members().front().state;
  const Complex even = s.amplitude(BasisKet{{Path::A, 0}, {Path::B, 0}, {Path::C, 0}});
  const Complex odd = s.amplitude(BasisKet{{Path::A, 1}, {Path::B, -1}, {Path::C, 1}});
  const double expected_ratio = (a0 * a0 * 0.51) / (a1 * a1 * 0.86);
  EXPECT_NEAR(std::abs(even / odd), expected_ratio, 1e-12);
  EXPECT_NEAR(std::abs(s.amplitude(BasisKet{{Path::A, -1}, {Path::B, 1}, {Path::C, 1}}) / odd), 1.0, 1e-12);
  // Exact compensation needs a0^2/a1^2 = h1/h0.
  e.pair1.amplitudes[0] = e.pair2.amplitudes[0] = std::sqrt(0.86 / 0.51);
  EXPECT_NEAR(fidelity(heralded_state(e, 1.0).state, target_332()), 1.0, 1e-12);
}

TEST(HeraldedSource, FidelityFollowsLambda) {
  for (double lambda : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const HeraldedSource src = heralded_state(Experiment{}, lambda);
    EXPECT_NEAR(fidelity(src.state, target_332()), lambda + (1.0 - lambda) / 3.0, 1e-12) << lambda;
    EXPECT_EQ(rank_vector(src.state), (RankVector{{3, 3, 2}}));
  }
}

TEST(Signature, CoherentSourceSuppressesEqualOutcomes) {
  const auto p = bc_interference_signature(heralded_state(Experiment{}, 1.0).state);
  EXPECT_NEAR(p[0], 0.0, 1e-12);
  EXPECT_NEAR(p[3], 0.0, 1e-12);
  EXPECT_GT(p[1], 0.01);
  EXPECT_NEAR(p[1], p[2], 1e-12);
}

TEST(Signature, DistinguishableSourceIsFlat) {
  const auto p = bc_interference_signature(heralded_state(Experiment{}, 0.0).state);
  for (double x : p) EXPECT_NEAR(x, p[0], 1e-12);
  EXPECT_GT(p[0], 0.0);
}

TEST(Visibility, PaperParameters) {
  const SpectralParams p;
  const double v_prime = visibility_theory(p);
  EXPECT_NEAR(v_prime, 0.9675348419205102, 1e-14);  // mpmath, 30 digits
  EXPECT_NEAR(visibility_effective(v_prime, p.eta_oam, p.eta_sp), 0.6403952276396998, 1e-14);
  EXPECT_NEAR(visibility_effective(v_prime, p.eta_oam, p.eta_sp), 0.64, 0.005);
}

TEST(Visibility, IdealLimitApproachesOne) {
  SpectralParams p;
  p.tau_j_s = 0.0;
  p.sigma_t_hz = p.sigma_s_hz;
  p.sigma_p_hz = 1e20;
  EXPECT_NEAR(visibility_theory(p), 1.0, 1e-9);
}

TEST(Visibility, DecreasesWithSignalWidth) {
  SpectralParams p;
  double previous = 2.0;
  for (double s = 50e9; s <= 1000e9; s += 50e9) {
    p.sigma_s_hz = s;
    const double v = visibility_theory(p);
    EXPECT_LT(v, previous);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.0);
    previous = v;
  }
}

TEST(Visibility, EffectiveNeverExceedsTheory) {
  EXPECT_NEAR(visibility_effective(0.9, 1.0, 1.0), 0.9, 1e-15);
  for (double vp = 0.05; vp <= 1.0; vp += 0.05)
    for (double eta = 0.05; eta <= 1.0; eta += 0.05) EXPECT_LE(visibility_effective(vp, eta, 1.0), vp + 1e-15);
  EXPECT_THROW(visibility_effective(0.5, 0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(visibility_effective(1.5, 1.0, 1.0), std::invalid_argument);
}

TEST(Visibility, InvalidWidthsRejected) {
  SpectralParams p;
  p.sigma_p_hz = 0.0;
  EXPECT_THROW(visibility_theory(p), std::invalid_argument);
  EXPECT_THROW(dip_fwhm(p), std::invalid_argument);
}

TEST(DipWidth, PaperParametersDirectEvaluation) {
  // mpmath evaluation of the width formula at the published parameters.
  EXPECT_NEAR(dip_fwhm(SpectralParams{}), 621.6387480527512e-6, 1e-15);
}

TEST(DipWidth, SingleScaleLimit) {
  SpectralParams p;
  p.sigma_p_hz = 1e30;
  p.tau_j_s = 0.0;
  EXPECT_NEAR(dip_fwhm(p), kSpeedOfLight / std::numbers::pi * std::sqrt(2.0 * std::numbers::ln2) / p.sigma_s_hz,
              1e-15);
}

TEST(DipWidth, GrowsAsSignalWidthShrinks) {
  SpectralParams p;
  double previous = 0.0;
  for (double s = 1000e9; s >= 50e9; s -= 50e9) {
    p.sigma_s_hz = s;
    const double l = dip_fwhm(p);
    EXPECT_GT(l, previous);
    previous = l;
  }
}

TEST(DipCurve, HalfDepthAtHalfWidth) {
  const double fwhm = 473e-6;
  const std::vector<double> d{-236.5e-6, 0.0, 236.5e-6, 1.0};
  const auto r = dip_curve(d, 0.635, fwhm, 1.0);
  EXPECT_NEAR(r[1], 0.365, 1e-15);
  EXPECT_NEAR(r[0], 1.0 - 0.635 / 2.0, 1e-12);
  EXPECT_NEAR(r[2], 1.0 - 0.635 / 2.0, 1e-12);
  EXPECT_NEAR(r[3], 1.0, 1e-12);
}

TEST(DipCurve, ZeroVisibilityIsFlat) {
  const std::vector<double> d{-1e-3, -1e-4, 0.0, 5e-4};
  for (double r : dip_curve(d, 0.0, 600e-6, 7.0)) EXPECT_EQ(r, 7.0);
}

TEST(LambdaOfDelay, Schedule) {
  EXPECT_EQ(lambda_of_delay(0.0, 0.8, 600e-6), 0.8);
  EXPECT_NEAR(lambda_of_delay(300e-6, 0.8, 600e-6), 0.4, 1e-15);
  EXPECT_NEAR(lambda_of_delay(1.0, 0.8, 600e-6), 0.0, 1e-300);
}

// The projection sequence turns lambda(delay) into a Gaussian dip; a fit
// recovers the configured width and shows the observed depth equals lambda0.
TEST(SimulatedDip, FitRecoversWidthAndDepth) {
  const double fwhm = dip_fwhm(SpectralParams{});
  std::vector<double> delays;
  for (int i = -100; i <= 100; ++i) delays.push_back(i * 1.5e-3 / 100.0);
  for (double lambda0 : {0.3, 0.64, 1.0}) {
    const auto rates = simulate_dip(Experiment{}, delays, lambda0, fwhm, 10.0);
    EXPECT_NEAR(rates[100], 10.0 * (1.0 - lambda0), 1e-9);
    const DipFit fit = fit_dip(delays, rates);
    EXPECT_NEAR(fit.fwhm / fwhm, 1.0, 0.02);
    EXPECT_NEAR(fit.visibility, lambda0, 1e-6);
    EXPECT_NEAR(fit.base_rate, 10.0, 1e-6);
  }
}

TEST(FitDip, RecoversSyntheticCurve) {
  std::vector<double> delays;
  for (int i = -60; i <= 60; ++i) delays.push_back(i * 1e-5);
  const auto rates = dip_curve(delays, 0.635, 473e-6, 3.0);
  const DipFit fit = fit_dip(delays, rates);
  EXPECT_NEAR(fit.visibility, 0.635, 1e-8);
  EXPECT_NEAR(fit.fwhm, 473e-6, 1e-12);
  EXPECT_NEAR(fit.base_rate, 3.0, 1e-8);
}

}  // namespace
}  // namespace oam
