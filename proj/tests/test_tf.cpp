#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "vsgosc/small_signal.hpp"
#include "vsgosc/transfer_function.hpp"

using namespace vsgosc;
using namespace vsgosc::fixtures;
using cd = std::complex<double>;

namespace {

constexpr double kJ = 300.0;
constexpr double kD = 300.0;
constexpr double kK = 26128.5;

double zeta() { return kD / (2.0 * std::sqrt(kK * kJ)); }

// dP_i/dP_L straight from the per-unit branch admittances, no polynomials.
cd sa_share_oracle(const NetworkModel& m, std::size_t i, double w) {
  const cd s(0.0, w);
  cd total = 0.0;
  cd mine = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    const auto& u = m.units[k];
    const double K = u.V0 * m.V0 / m.base_reactance(k);
    const cd y = K / (u.J0 * s * s + u.D0 * s + K) * (u.J0 * s + u.D0);
    total += y;
    if (k == i) mine = y;
  }
  return mine / total;
}

}  // namespace

TEST(TfAlgebra, AddIdentity) {
  const RationalTF g(Polynomial::constant(5.0), Polynomial({1.0, 1.0}));
  const RationalTF sum = tf_add(g, RationalTF::gain(0.0));
  for (double w : {0.0, 0.3, 7.0, 100.0}) EXPECT_NEAR(std::abs(sum.at_frequency(w) - g.at_frequency(w)), 0.0, 1e-15);
}

TEST(TfAlgebra, MultiplyStaysUnreduced) {
  const RationalTF a(Polynomial::constant(1.0), Polynomial({1.0, 1.0}));
  const RationalTF b(Polynomial({1.0, 1.0}), Polynomial::constant(1.0));
  const RationalTF p = tf_mul(a, b);
  EXPECT_EQ(p.den().degree(), 1);
  EXPECT_EQ(p.num().degree(), 1);
  for (double w : {0.01, 1.0, 50.0}) EXPECT_NEAR(std::abs(p.at_frequency(w) - 1.0), 0.0, 1e-14);
}

TEST(TfAlgebra, FeedbackClosesSwingLoop) {
  const RationalTF g(Polynomial::constant(kK), Polynomial({0.0, kD, kJ}));
  const RationalTF cl = tf_feedback(g, RationalTF::gain(1.0));
  const RationalTF want = unit_tf(kJ, kD, kK);
  ASSERT_EQ(cl.den().degree(), 2);
  for (std::size_t k = 0; k <= 2; ++k) EXPECT_NEAR(cl.den()[k], want.den()[k], 1e-12 * want.den().max_abs_coeff());
  EXPECT_NEAR(cl.num()[0], want.num()[0], 1e-12 * want.num()[0]);
}

TEST(TfAlgebra, DenominatorNormalizedAndZeroRejected) {
  const RationalTF g(Polynomial({2.0}), Polynomial({4.0, 2.0}));
  EXPECT_EQ(g.den().leading(), 1.0);
  EXPECT_EQ(g.num()[0], 1.0);
  EXPECT_THROW(RationalTF(Polynomial::constant(1.0), Polynomial::constant(0.0)), std::invalid_argument);
}

TEST(DroopEquivalent, Examples) {
  auto a = droop_equivalent(1.0 / 300, 1.0);
  EXPECT_NEAR(a.J, 300, 1e-9);
  EXPECT_NEAR(a.D, 300, 1e-9);
  auto b = droop_equivalent(1.0 / 600, 1.0);
  EXPECT_NEAR(b.J, 600, 1e-9);
  EXPECT_NEAR(b.D, 600, 1e-9);
  auto c = droop_equivalent(1.0 / 300, 2.0);
  EXPECT_NEAR(c.J, 150, 1e-9);
  EXPECT_NEAR(c.D, 300, 1e-9);
  EXPECT_THROW(droop_equivalent(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(droop_equivalent(1.0, -1.0), std::invalid_argument);
}

TEST(UnitTf, DcGainNaturalFrequencyDamping) {
  const RationalTF g = unit_tf(kJ, kD, kK);
  EXPECT_DOUBLE_EQ(g.dc_gain(), 1.0);
  const auto p = poles(g);
  ASSERT_EQ(p.size(), 2u);
  EXPECT_NEAR(p[0].omega_n, 9.33, 0.005);
  EXPECT_NEAR(p[0].zeta, 0.0536, 5e-5);
  EXPECT_NEAR(p[0].zeta, zeta(), 1e-12);
  EXPECT_THROW(unit_tf(0.0, kD, kK), std::invalid_argument);
}

TEST(UnitTf, PowerCompanion) {
  const RationalTF h = unit_power_tf(kJ, kD, kK);
  EXPECT_NEAR(h.dc_gain(), -kD, 1e-9);
  const cd s(0.0, 3.0);
  const cd want = -kK * (kJ * s + kD) / (kJ * s * s + kD * s + kK);
  EXPECT_NEAR(std::abs(h.at_frequency(3.0) - want), 0.0, 1e-9 * std::abs(want));
}

TEST(SaLoadStep, DcSharesAndPccFrequency) {
  const auto tfs = sa_load_step_tfs(three_unit());
  ASSERT_EQ(tfs.power.size(), 3u);
  EXPECT_NEAR(tfs.power[0].dc_gain(), 1.0 / 6, 1e-12);
  EXPECT_NEAR(tfs.power[1].dc_gain(), 1.0 / 3, 1e-12);
  EXPECT_NEAR(tfs.power[2].dc_gain(), 1.0 / 2, 1e-12);
  EXPECT_NEAR(700 * tfs.power[0].dc_gain(), 116.7, 0.05);
  EXPECT_NEAR(700 * tfs.power[1].dc_gain(), 233.3, 0.05);
  EXPECT_NEAR(700 * tfs.power[2].dc_gain(), 350.0, 0.05);
  EXPECT_NEAR(tfs.pcc_frequency.dc_gain(), -1.0 / 1800, 1e-15);
  EXPECT_NEAR(700 * tfs.pcc_frequency.dc_gain(), -0.3889, 5e-5);
  for (const auto& f : tfs.frequency) EXPECT_NEAR(f.dc_gain(), -1.0 / 1800, 1e-15);
  for (const auto& p : tfs.power) EXPECT_TRUE(p.is_proper());
  EXPECT_THROW(sa_load_step_tfs(NetworkModel{}), std::invalid_argument);
}

TEST(SaLoadStep, MatchesBranchAdmittanceOracle) {
  for (const auto& m : {three_unit(), two_unit(4.4), two_unit(2.2)}) {
    const auto tfs = sa_load_step_tfs(m);
    for (double w : log_grid(0.01, 1000, 60)) {
      for (std::size_t i = 0; i < m.size(); ++i) {
        const cd want = sa_share_oracle(m, i, w);
        EXPECT_NEAR(std::abs(tfs.power[i].at_frequency(w) - want), 0.0, 1e-9 * std::max(1.0, std::abs(want)));
      }
    }
  }
}

TEST(SaLoadStepProperty, SharesSumToOne) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> JD(50, 2000), L(1, 20);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<UnitParams> us;
    const int n = 1 + trial % 4;
    for (int k = 0; k < n; ++k) us.push_back(unit("U" + std::to_string(k), JD(rng), JD(rng), 1000, L(rng)));
    const auto tfs = sa_load_step_tfs(base_model(us));
    for (double w : log_grid(0.01, 1000, 80)) {
      cd sum = 0.0;
      for (const auto& p : tfs.power) sum += p.at_frequency(w);
      EXPECT_LT(std::abs(sum - 1.0), 1e-9) << "trial " << trial << " w " << w;
    }
  }
}

TEST(GcRefStep, StiffGrid) {
  const auto m = stiff_grid(two_unit(4.4));
  const auto tfs = gc_ref_step_tfs(m, "DG1");
  EXPECT_DOUBLE_EQ(tfs.power[0].dc_gain(), 1.0);
  EXPECT_TRUE(tfs.power[1].num().is_zero());
  EXPECT_TRUE(tfs.pcc_frequency.num().is_zero());
  const auto p = poles(tfs.power[0]);
  ASSERT_EQ(p.size(), 2u);
  const double K = 190.0 * 190.0 / (314.0 * 4.4e-3);
  const double im = std::sqrt(K / 300.0 - 0.25);
  EXPECT_NEAR(p[0].value.real(), -0.5, 1e-12);
  EXPECT_NEAR(std::abs(p[0].value.imag()), im, 1e-9);
  EXPECT_NEAR(std::abs(p[0].value.imag()), 9.319, 5e-4);
  EXPECT_THROW(gc_ref_step_tfs(m, "DG7"), std::invalid_argument);
}

TEST(GcRefStep, WeakGrid) {
  const auto m = weak_grid(three_unit());
  const auto tfs = gc_ref_step_tfs(m, "DG1");
  EXPECT_EQ(std::abs(tfs.pcc_frequency.dc_gain()), 0.0);
  // Source unit tracks the reference; the others return to zero.
  EXPECT_NEAR(tfs.power[0].dc_gain(), 1.0, 1e-12);
  EXPECT_NEAR(tfs.power[1].dc_gain(), 0.0, 1e-12);
  EXPECT_NEAR(tfs.power[2].dc_gain(), 0.0, 1e-12);
  for (const auto& p : poles(tfs.power[0])) EXPECT_LT(p.value.real(), 0.0);
}

// Oracle: Kirchhoff balance at the PCC written directly in phasor form.
TEST(GcRefStep, MatchesNodalOracle) {
  const auto m = weak_grid(three_unit());
  const auto tfs = gc_ref_step_tfs(m, "DG2");
  const double Kg = m.grid.Vg * m.V0 / (m.omega0 * m.grid.Lg);
  for (double w : log_grid(0.05, 500, 40)) {
    const cd s(0.0, w);
    // Unit i: (J s^2 + D s + K) dtheta_i = dPr_i + K dtheta_p (per unit angle).
    // Balance: sum K_i (dtheta_i - dtheta_p) - Kg dtheta_p = 0.
    cd a = -Kg;
    cd b = 0.0;
    std::vector<cd> g(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto& u = m.units[i];
      const double K = u.V0 * m.V0 / m.base_reactance(i);
      const cd d = u.J0 * s * s + u.D0 * s + K;
      g[i] = 1.0 / d;
      a += K * (K / d - 1.0);
      if (i == 1) b += K / d;
    }
    const cd thp = -b / a;
    EXPECT_NEAR(std::abs(tfs.pcc_frequency.at_frequency(w) - s * thp), 0.0, 1e-9 * std::abs(s * thp) + 1e-15);
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double K = m.units[i].V0 * m.V0 / m.base_reactance(i);
      const cd thi = g[i] * ((i == 1 ? 1.0 : 0.0) + K * thp);
      const cd dP = K * (thi - thp);
      EXPECT_NEAR(std::abs(tfs.power[i].at_frequency(w) - dP), 0.0, 1e-9 * std::max(1.0, std::abs(dP)));
    }
  }
}

TEST(Bode, UnityGain) {
  const auto fr = bode(RationalTF::gain(1.0));
  ASSERT_EQ(fr.omegas.size(), 400u);
  EXPECT_DOUBLE_EQ(fr.omegas.front(), 0.01);
  EXPECT_NEAR(fr.omegas.back(), 1000.0, 1e-9);
  for (std::size_t k = 0; k < fr.omegas.size(); ++k) {
    EXPECT_EQ(fr.magnitude_db[k], 0.0);
    EXPECT_EQ(fr.phase_deg[k], 0.0);
    if (k > 0) EXPECT_GT(fr.omegas[k], fr.omegas[k - 1]);
  }
}

TEST(Bode, UnitPeakHeight) {
  const double z = zeta();
  const double want_db = 20.0 * std::log10(1.0 / (2.0 * z * std::sqrt(1.0 - z * z)));
  EXPECT_NEAR(want_db, 19.4, 0.05);
  const auto peak = resonance_peak(bode(unit_tf(kJ, kD, kK)));
  ASSERT_TRUE(peak);
  EXPECT_NEAR(peak->peak_db_above_dc, want_db, 0.05);
}

TEST(Bode, ProportionalCaseIsFlat) {
  const auto tfs = sa_load_step_tfs(two_unit(2.2));
  const auto fr = bode(tfs.power[0], 0.01, 100, 400);
  const double want = 20.0 * std::log10(1.0 / 3.0);
  EXPECT_NEAR(want, -9.54, 0.005);
  for (double m : fr.magnitude_db) EXPECT_LT(std::abs(m - want), 0.01);
}

TEST(Bode, PoleOnAxisReported) {
  const RationalTF g(Polynomial::constant(1.0), Polynomial({1.0, 0.0, 1.0}));
  try {
    bode(g, 0.1, 10, 3);  // grid 0.1, 1, 10 hits the pole at 1
    FAIL() << "expected PoleOnAxisError";
  } catch (const PoleOnAxisError& e) {
    EXPECT_NEAR(e.omega(), 1.0, 1e-12);
  }
  EXPECT_THROW(bode(g, 0.0, 10, 3), std::invalid_argument);
  EXPECT_THROW(bode(g, 0.1, 10, 1), std::invalid_argument);
}

TEST(Poles, Examples) {
  const auto a = poles(RationalTF(Polynomial::constant(1), Polynomial({26128.5, 300, 300})));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_NEAR(a[0].value.real(), -0.5, 1e-12);
  EXPECT_NEAR(std::abs(a[0].value.imag()), 9.319, 5e-4);
  EXPECT_NEAR(a[0].value.imag(), -a[1].value.imag(), 1e-12);

  const auto b = poles(RationalTF(Polynomial::constant(1), Polynomial({2, 3, 1})));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_NEAR(b[0].value.real(), -1.0, 1e-12);
  EXPECT_NEAR(b[1].value.real(), -2.0, 1e-12);
  EXPECT_EQ(b[0].value.imag(), 0.0);
  EXPECT_NEAR(b[0].zeta, 1.0, 1e-12);

  const auto c = poles(RationalTF(Polynomial::constant(1), Polynomial({1, 0, 1})));
  ASSERT_EQ(c.size(), 2u);
  EXPECT_NEAR(std::abs(c[0].value.imag()), 1.0, 1e-12);
  EXPECT_NEAR(c[0].zeta, 0.0, 1e-12);

  EXPECT_THROW(poles(RationalTF::gain(2.0)), std::invalid_argument);
}

TEST(PolesProperty, RootsSatisfyDenominator) {
  std::vector<RationalTF> dens;
  for (const auto& m : {three_unit(), two_unit(4.4), two_unit(2.2)}) {
    for (const auto& p : sa_load_step_tfs(m).power) dens.push_back(p);
  }
  for (const auto& p : gc_ref_step_tfs(weak_grid(three_unit()), "DG1").power) dens.push_back(p);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> c(-5, 5);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> co(1 + k % 7);
    for (auto& x : co) x = c(rng);
    co.push_back(1.0);
    dens.emplace_back(Polynomial::constant(1), Polynomial(co));
  }
  for (const auto& tf : dens) {
    const Polynomial& d = tf.den();
    const auto ps = poles(tf);
    EXPECT_EQ(static_cast<int>(ps.size()), d.degree());
    for (const auto& p : ps) EXPECT_LT(std::abs(d(p.value)), 1e-6 * d.max_abs_coeff());
  }
}

TEST(Resonance, MismatchedTwoUnitPeak) {
  const auto peak = resonance_peak(bode(sa_load_step_tfs(two_unit(4.4)).power[0]));
  ASSERT_TRUE(peak);
  EXPECT_GE(peak->omega, 8.0);
  EXPECT_LE(peak->omega, 12.0);
}

TEST(Resonance, ProportionalHasNoPeak) {
  EXPECT_FALSE(resonance_peak(bode(sa_load_step_tfs(two_unit(2.2)).power[0])));
}

TEST(Resonance, SingleUnitPeakFrequency) {
  const double z = zeta();
  const double want = std::sqrt(kK / kJ) * std::sqrt(1.0 - 2.0 * z * z);
  EXPECT_NEAR(want, 9.306, 5e-4);
  const auto peak = resonance_peak(bode(unit_tf(kJ, kD, kK)));
  ASSERT_TRUE(peak);
  EXPECT_NEAR(peak->omega, want, 0.005 * want);
}

TEST(Resonance, MonotoneResponse) {
  EXPECT_FALSE(resonance_peak(bode(RationalTF(Polynomial::constant(1), Polynomial({1, 1})))));
}

TEST(StepResponse, FirstOrder) {
  const auto r = step_response(RationalTF(Polynomial::constant(1), Polynomial({1, 1})), 5, 1e-3);
  EXPECT_FALSE(r.unstable);
  EXPECT_NEAR(r.t[1000], 1.0, 1e-12);
  EXPECT_NEAR(r.y[1000], 1.0 - std::exp(-1.0), 1e-9);
  EXPECT_NEAR(r.y[1000], 0.6321, 5e-5);
}

TEST(StepResponse, UnitOvershoot) {
  const auto r = step_response(unit_tf(kJ, kD, kK), 30, 1e-3);
  const double peak = *std::max_element(r.y.begin(), r.y.end());
  const double z = zeta();
  const double want = std::exp(-std::numbers::pi * z / std::sqrt(1 - z * z));
  EXPECT_NEAR(want, 0.845, 5e-4);
  EXPECT_NEAR(peak - 1.0, want, 1e-3);
}

TEST(StepResponse, StaticGainAndMagnitude) {
  const auto r = step_response(RationalTF::gain(1.0), 1, 0.1);
  for (double y : r.y) EXPECT_EQ(y, 1.0);
  const auto s = step_response(RationalTF(Polynomial::constant(2), Polynomial({2, 1})), 20, 1e-3, 10.0);
  EXPECT_NEAR(s.y.back(), 10.0, 1e-6);
}

TEST(StepResponse, Errors) {
  EXPECT_THROW(step_response(RationalTF(Polynomial({0, 1}), Polynomial::constant(1)), 1, 1e-3), std::invalid_argument);
  EXPECT_THROW(step_response(unit_tf(kJ, kD, kK), 1, 0.1), std::invalid_argument);
  const auto r = step_response(RationalTF(Polynomial::constant(1), Polynomial({-1, 1})), 1, 1e-3);
  EXPECT_TRUE(r.unstable);
  EXPECT_NEAR(r.y.back(), std::exp(1.0) - 1.0, 1e-9);
}

TEST(StepResponseProperty, FinalValueMatchesDcGain) {
  std::vector<RationalTF> tfs;
  for (const auto& m : {three_unit(), two_unit(4.4), two_unit(2.2)}) {
    for (const auto& p : sa_load_step_tfs(m).power) tfs.push_back(p);
  }
  tfs.push_back(unit_tf(kJ, kD, kK));
  for (const auto& tf : tfs) {
    double slowest = std::numeric_limits<double>::infinity();
    for (const auto& p : poles(tf)) slowest = std::min(slowest, -p.value.real());
    ASSERT_GT(slowest, 0.0);
    const auto r = step_response(tf, 10.0 / slowest, 1e-3);
    EXPECT_NEAR(r.y.back(), tf.dc_gain(), 1e-3 * std::abs(tf.dc_gain()));
  }
}
