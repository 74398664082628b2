#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "invis/expansion.hpp"
#include "invis/presets.hpp"

using namespace invis;

namespace {

const PhysicalParams kGaAs{0.067};

double max_expansion_error(const PotentialProfile& p, const PoleSet& set, int N, const std::vector<double>& E) {
  double worst = 0.0;
  for (double e : E) {
    const double k = k_of_E(e, p.params());
    worst = std::max(worst, std::abs(std::norm(t_expansion(set, k, N)) - amplitudes(p, e).T));
  }
  return worst;
}

}  // namespace

TEST(Expansion, SinglePoleLimits) {
  const auto m = OnePoleModel::from_gamma(-3e-3, kGaAs);
  EXPECT_NEAR(std::abs(t_single_pole(m, 1e6).t - 1.0), 0.0, 1e-8);
  EXPECT_NEAR(t_single_pole(m, 1e6).theta_approx, 0.0, 1e-8);
  EXPECT_NEAR(std::norm(t_single_pole(m, 3e-3).t), 0.5, 1e-15);
  EXPECT_EQ(t_single_pole(m, 0.0).t, cplx{0.0});
  EXPECT_THROW(t_single_pole(m, -1.0), DomainError);
}

TEST(Expansion, SinglePoleTransmission) {
  EXPECT_DOUBLE_EQ(T_single_pole(2e-5, 2e-5), 0.5);
  for (double E : {1e-9, 0.1, 10.0}) EXPECT_EQ(T_single_pole(E, 0.0), 1.0);
  // 1 / (1 + 8.68e-6 / 0.06)
  EXPECT_NEAR(T_single_pole(0.06, 8.68e-6), 0.999855, 1e-6);
  EXPECT_THROW(T_single_pole(0.0, 1e-3), DomainError);
  EXPECT_THROW(T_single_pole(0.1, -1e-3), DomainError);
}

TEST(Expansion, EqOfPole) {
  Pole p;
  p.kind = PoleKind::antibound;
  p.k = cplx{0.0, 0.0};
  p.gamma = 0.0;
  EXPECT_EQ(E_q_of_pole(p, kGaAs), 0.0);
  p.k = cplx{0.5, -0.1};
  p.kind = PoleKind::resonant;
  EXPECT_THROW(E_q_of_pole(p, kGaAs), DomainError);
  for (const auto& [name, want] : {std::pair{"2bwb", 8.68e-6}, std::pair{"5bwb", 1.67e-7}}) {
    const auto q = threshold_pole(presets::by_name(name));
    ASSERT_TRUE(q);
    EXPECT_NEAR(E_q_of_pole(*q, kGaAs), want, 0.05 * want) << name;
  }
}

TEST(Expansion, OnePoleModelMatchesInvisibleSystems) {
  const auto E = make_grid(1e-7, 0.24, 600, true);
  for (const char* name : {"2bwb", "5bwb"}) {
    const auto p = presets::by_name(name);
    const double Eq = E_q_of_pole(*threshold_pole(p), kGaAs);
    double worst = 0.0;
    for (const auto& r : model_comparison(p, E, Eq)) worst = std::max(worst, std::abs(r.T_exact - r.T_single_pole));
    EXPECT_LT(worst, 1e-2) << name;
  }
}

TEST(Expansion, OnePoleModelFailsForSquareBarriers) {
  const auto p = presets::two_bsb();
  const double Eq = E_q_of_pole(*threshold_pole(p), kGaAs);
  double worst = 0.0;
  for (const auto& r : model_comparison(p, make_grid(1e-4, 0.12, 400, true), Eq))
    worst = std::max(worst, std::abs(r.T_exact - r.T_single_pole));
  EXPECT_GT(worst, 0.1);
}

TEST(Expansion, OnePolePhase) {
  for (const char* name : {"2bwb", "5bwb", "pt4"}) {
    const auto p = presets::by_name(name);
    const auto q = threshold_pole(p);
    ASSERT_TRUE(q);
    const double Eq = E_q_of_pole(*q, kGaAs);
    for (double E : make_grid(100.0 * Eq, 0.24, 200, true)) {
      const double th = amplitudes(p, E).theta;
      EXPECT_LT(std::abs(th - q->gamma / k_of_E(E, kGaAs)), 0.02) << name << " E=" << E;
    }
  }
}

TEST(Expansion, PoschlTellerReflectionlessWell) {
  // (1 + eta) = 9 for a well: eta = -8
  const double d = 0.5;
  const double s = -8.0 * kGaAs.hbar2_over_2m() / (4.0 * d * d);
  EXPECT_NEAR(pt_eta(s, d, kGaAs), -8.0, 1e-12);
  const auto sliced = build_pt_composite({PTTerm{0.0, s, d}}, 1e-10, 8000, kGaAs);
  for (double E : make_grid(1e-3, 0.36, 100, true)) {
    const double k = k_of_E(E, kGaAs);
    EXPECT_NEAR(T_pt_analytic(s, d, kGaAs, k), 1.0, 1e-10) << E;
    EXPECT_NEAR(amplitudes(sliced, E).T, 1.0, 1e-8) << E;
  }
}

TEST(Expansion, PoschlTellerLargeKIsTransparent) {
  EXPECT_NEAR(T_pt_analytic(0.12, 0.0709, kGaAs, 200.0), 1.0, 1e-12);
}

TEST(Expansion, PoschlTellerSlicedMatchesAnalytic) {
  const double V0 = 0.12, d = 0.0709;
  const auto sliced = build_pt_composite({PTTerm{0.0, V0, d}}, 1e-8, 4000, kGaAs);
  for (double E : make_grid(0.01 * V0, 3.0 * V0, 200, true)) {
    const double k = k_of_E(E, kGaAs);
    EXPECT_NEAR(amplitudes(sliced, E).T, T_pt_analytic(V0, d, kGaAs, k), 1e-4) << E;
    EXPECT_NEAR(std::norm(t_pt_analytic(V0, d, kGaAs, cplx{k})), T_pt_analytic(V0, d, kGaAs, k), 1e-12);
  }
}

TEST(Expansion, PoschlTellerAnalyticPoles) {
  // zeros of sinh(pi k d) + i c lie at sinh(pi k d) = -i c
  const double V0 = 0.12, d = 0.0709;
  const double eta = pt_eta(V0, d, kGaAs);
  const double c = std::cos((kPi / 2.0) * std::sqrt(std::complex<double>(1.0 - eta))).real();
  const cplx k = std::asinh(cplx{0.0, -c}) / (kPi * d);
  EXPECT_GT(std::abs(t_pt_analytic(V0, d, kGaAs, k * (1.0 + 1e-9))), 1e6);
}

TEST(Expansion, TermsNeedEnoughPoles) {
  const auto set = find_poles(presets::two_bwb(), 4);
  EXPECT_THROW(t_expansion(set, 0.3, 50), ValidationError);
  EXPECT_THROW(t_expansion(set, 0.3, -1), ValidationError);
  EXPECT_THROW(t_expansion(set, 0.0, 2), DomainError);
}

TEST(Expansion, LorentzianNearIsolatedResonance) {
  const auto p = presets::fig1_double_barrier(4.0);
  const auto set = find_poles(p, 4);
  const auto it = std::find_if(set.poles.begin(), set.poles.end(), [](const Pole& x) { return x.kind == PoleKind::resonant; });
  ASSERT_NE(it, set.poles.end());
  const double Er = it->E.real(), G = -2.0 * it->E.imag();
  const double peak = std::norm(t_expansion(set, k_of_E(Er, kGaAs), 2));
  EXPECT_GT(peak, 0.95);
  // half height one half-width away, as for a Breit-Wigner line
  for (double s : {-1.0, 1.0}) {
    const double half = std::norm(t_expansion(set, k_of_E(Er + s * 0.5 * G, kGaAs), 2));
    EXPECT_NEAR(half / peak, 0.5, 0.05) << s;
  }
}

TEST(Expansion, ConvergesWithPoleCount) {
  const auto p = presets::fig1_double_barrier(4.0);
  const auto set = find_poles(p, 500);
  ASSERT_TRUE(set.complete) << set.diagnostics;
  const auto E = make_grid(1e-4, 0.4, 400, false);
  double prev = INFINITY;
  for (int N : {50, 100, 200, 500}) {
    const double err = max_expansion_error(p, set, N, E);
    EXPECT_LT(err, prev) << N;
    prev = err;
  }
  // the acceptance bound; the truncated sum is first order in 1/N
  EXPECT_LT(prev, 1e-3);
}

TEST(Expansion, SubtractedSumConvergesFaster) {
  const auto p = presets::fig1_double_barrier(4.0);
  const auto set = find_poles(p, 200);
  const cplx g0 = zero_energy_green(p);
  double worst = 0.0;
  for (double e : make_grid(1e-4, 0.4, 200, false)) {
    const double k = k_of_E(e, kGaAs);
    worst = std::max(worst, std::abs(std::norm(t_expansion_subtracted(set, k, 200, g0)) - amplitudes(p, e).T));
  }
  EXPECT_LT(worst, 1e-5);
}

TEST(Expansion, ResiduesReproduceInvisibleSystems) {
  for (const char* name : {"2bwb", "5bwb"}) {
    const auto p = presets::by_name(name);
    const auto set = find_poles(p, 200);
    ASSERT_TRUE(set.complete) << name;
    const cplx g0 = zero_energy_green(p);
    for (double e : make_grid(1e-3, 0.24, 40, true)) {
      const double k = k_of_E(e, kGaAs);
      EXPECT_NEAR(std::abs(t_expansion_subtracted(set, k, 200, g0) - amplitudes(p, e).t), 0.0, 1e-3) << name << " " << e;
    }
  }
}
