#include "interf/estimation.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace interf {
namespace {

using std::numbers::pi;

TEST(Povm, PhaseStateGivesCertainOutcome) {
  const int m = 5;
  const auto rho = DensityMatrix::pure(pegg_barnett_vector(m, pegg_barnett_phase(m, 3)));
  const auto p = povm_distribution(rho, m);
  for (int l = 0; l <= m; ++l) EXPECT_NEAR(p[l], l == 3 ? 1.0 : 0.0, 1e-12);
}

TEST(Povm, MaximallyMixedIsUniform) {
  const auto p = povm_distribution(DensityMatrix::maximally_mixed(7), 6);
  for (int l = 0; l <= 6; ++l) EXPECT_NEAR(p[l], 1.0 / 7, 1e-14);
}

TEST(Povm, TwoLevelHandComputation) {
  for (double phi : {0.0, 0.4, 2.5}) {
    const auto psi = apply_phase(optimal_phase_state(1), phi);
    const auto p = povm_distribution(DensityMatrix::pure(psi), 1);
    for (int l = 0; l <= 1; ++l) EXPECT_NEAR(p[l], 0.5 * (1 + std::cos(phi - pegg_barnett_phase(1, l))), 1e-14);
  }
}

TEST(Povm, DimensionTooSmall) {
  EXPECT_THROW(povm_distribution(DensityMatrix::maximally_mixed(3), 3), std::invalid_argument);
}

TEST(OutcomeDistribution, RejectsBadProbabilities) {
  EXPECT_THROW(OutcomeDistribution(1, {0.5, 0.6}, 0.0), std::domain_error);
  EXPECT_THROW(OutcomeDistribution(1, {1.1, -0.1}, 0.0), std::domain_error);
  EXPECT_THROW(OutcomeDistribution(2, {1.0, 0.0}, 0.0), std::invalid_argument);
  const OutcomeDistribution ok(1, {1.0 + 1e-13, -1e-13}, 0.0);
  EXPECT_EQ(ok[1], 0.0);
}

TEST(ClosedFormP, LosslessMatchesNoiselessOverlap) {
  const int m = 6;
  const double phi = 0.9;
  const auto p = closed_form_p(m, 1.0, phi);
  const auto psi = PermutationUnitary(m, m + 1).apply(apply_phase(optimal_phase_state(m), phi));
  for (int l = 0; l <= m; ++l) {
    const double overlap = std::norm(pegg_barnett_vector(m, pegg_barnett_phase(m, l)).amps().dot(psi.amps()));
    EXPECT_NEAR(p[l], overlap, 1e-13);
  }
}

TEST(ClosedFormP, MatchesPovmOnClosedFormRho) {
  const auto p = closed_form_p(4, 0.9, 0.2);
  const auto q = povm_distribution(closed_form_rho(4, 0.9, 0.2), 4);
  double s = 0.0;
  for (int l = 0; l <= 4; ++l) {
    EXPECT_NEAR(p[l], q[l], 1e-10);
    s += p[l];
  }
  EXPECT_NEAR(s, 1.0, 1e-10);
}

TEST(PovmResponse, MatchesFullEvaluation) {
  for (int m : {1, 5, 16}) {
    for (double eta : {0.6, 0.95}) {
      const PovmResponse fast(PhaseFamily(closed_form_rho(m, eta, 0.0), 1), m);
      for (double phi : {0.0, 0.31, 2.2, 5.9}) {
        const auto a = fast.at(phi);
        const auto b = povm_distribution(closed_form_rho(m, eta, phi), m);
        for (int l = 0; l <= m; ++l) EXPECT_NEAR(a[l], b[l], 1e-12);
      }
    }
  }
}

TEST(CircularRms, ConcentratedAtTruth) {
  // outcome 2 of M=5 estimates -2*2pi/6
  const double phi = wrap_phase(-pegg_barnett_phase(5, 2));
  EXPECT_NEAR(circular_rms(OutcomeDistribution(5, {0, 0, 1, 0, 0, 0}, phi)), 0.0, 1e-15);
}

TEST(CircularRms, UniformApproachesCircleMoment) {
  const int m = 4000;
  const OutcomeDistribution u(m, std::vector<double>(m + 1, 1.0 / (m + 1)), 0.3);
  EXPECT_NEAR(circular_rms(u), pi / std::sqrt(3.0), 1e-3);
}

TEST(CircularRms, SymmetricPair) {
  // M=7: outcomes 1 and 7 estimate 7pi/4 and pi/4.
  std::vector<double> p(8, 0.0);
  p[1] = p[7] = 0.5;
  EXPECT_NEAR(circular_rms(OutcomeDistribution(7, p, 0.0)), pi / 4, 1e-14);
  EXPECT_NEAR(circular_rms_about_mean(OutcomeDistribution(7, p, 0.0)), pi / 4, 1e-14);
  EXPECT_NEAR(circular_rms_about_mean(OutcomeDistribution(7, p, 1.0)), pi / 4, 1e-14);
}

TEST(Holevo, MaximallyMixedIsInfinite) {
  EXPECT_TRUE(std::isinf(holevo_variance(DensityMatrix::maximally_mixed(5))));
}

TEST(Holevo, PhaseStatesSharpen) {
  double prev = kInf;
  for (int m : {2, 8, 32, 128}) {
    const double h = holevo_variance(DensityMatrix::pure(pegg_barnett_vector(m, 1.1)));
    EXPECT_NEAR(h, std::sqrt(2.0 * m + 1) / m, 1e-12);
    EXPECT_LT(h, prev);
    prev = h;
  }
}

// Trapezoid quadrature of the continuous phase distribution (M+1)/(2pi) <Phi|rho|Phi>.
TEST(Holevo, SubDiagonalSumMatchesQuadrature) {
  const int m = 4;
  const auto rho = closed_form_rho(m, 0.9, 0.3);
  const int pts = 2048;
  Complex mean = 0.0;
  double total = 0.0;
  for (int k = 0; k < pts; ++k) {
    const double ph = kTwoPi * k / pts;
    const CVector v = pegg_barnett_vector(m, ph).amps();
    const double dens = (m + 1) / kTwoPi * (v.adjoint() * rho.elems() * v)(0, 0).real();
    mean += dens * std::polar(1.0, ph) * (kTwoPi / pts);
    total += dens * (kTwoPi / pts);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(std::abs(mean), phase_sharpness(rho), 1e-8);
}

TEST(ObservableA, SmallCases) {
  const CMatrix a = observable_a(2, 0, 3);
  CMatrix expect = CMatrix::Zero(3, 3);
  expect(2, 0) = expect(0, 2) = 1.0;
  EXPECT_EQ(a, expect);
  EXPECT_THROW(observable_a(3, 1, 3), std::invalid_argument);
  EXPECT_THROW(observable_a(3, 3, 5), std::invalid_argument);
}

TEST(ObservableA, SymmetricZeroOne) {
  for (auto [m, mp] : {std::pair{5, 2}, std::pair{9, 3}, std::pair{30, 10}, std::pair{6, 4}}) {
    const CMatrix a = observable_a(m, mp, m + 1);
    EXPECT_EQ(a, a.transpose());
    for (int r = 0; r <= m; ++r)
      for (int c = 0; c <= m; ++c) EXPECT_TRUE(a(r, c) == 0.0 || a(r, c) == 1.0);
  }
  const CMatrix a = observable_a(30, 10, 31);
  EXPECT_EQ((a.array() != Complex(0.0)).count(), 22);
  EXPECT_FALSE(observable_a_overlaps(30, 10));
  EXPECT_TRUE(observable_a_overlaps(6, 4));
}

TEST(MmError, NoiselessIsOneOverDelta) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (auto [m, mp] : {std::pair{7, 2}, std::pair{30, 10}, std::pair{4, 0}}) {
    const MmStateSpec spec(m, mp);
    const auto in = mm_error_inputs(spec, 1.0);
    EXPECT_NEAR(in.gamma_sum, 1.0, 1e-15);
    EXPECT_NEAR(in.theta_sum, 1.0, 1e-15);
    for (int k = 0; k < 5; ++k) {
      const double phi = u(rng);
      if (std::abs(std::sin(spec.delta() * phi)) < 0.05) continue;
      EXPECT_NEAR(mm_error_closed(in, phi), 1.0 / spec.delta(), 1e-12);
      EXPECT_NEAR(mm_error(closed_form_sigma(spec, 1.0, phi), spec), 1.0 / spec.delta(), 1e-12);
    }
  }
}

TEST(MmError, StationaryPointsAreInfinite) {
  const MmStateSpec spec(6, 2);
  const auto in = mm_error_inputs(spec, 0.9);
  EXPECT_TRUE(std::isinf(mm_error_closed(in, 0.0)));
  EXPECT_TRUE(std::isinf(mm_error_closed(in, pi / spec.delta())));
  EXPECT_TRUE(std::isinf(mm_error(closed_form_sigma(spec, 0.9, 0.0), spec)));
  EXPECT_GT(mm_error_closed(in, 1e-6), 1e4);
}

TEST(MmErrorProperty, MatrixAndClosedRoutesAgree) {
  for (int m = 1; m <= 12; ++m) {
    for (int mp = 0; mp < m; ++mp) {
      const MmStateSpec spec(m, mp);
      for (double eta : {0.7, 0.9, 1.0}) {
        const auto in = mm_error_inputs(spec, eta);
        for (double phi : {0.11, 0.5, 1.3, 2.9}) {
          const double closed = mm_error_closed(in, phi);
          const double matrix = mm_error(closed_form_sigma(spec, eta, phi), spec);
          if (!std::isfinite(closed) || !std::isfinite(matrix)) continue;
          EXPECT_NEAR(matrix / closed, 1.0, 1e-8) << m << " " << mp << " " << eta << " " << phi;
        }
      }
    }
  }
}

TEST(MmErrorProperty, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const int m = 2 + static_cast<int>(rng() % 11);
    const int mp = static_cast<int>(rng() % m);
    const MmStateSpec spec(m, mp);
    const double eta = 0.5 + 0.5 * u(rng);
    const double phi = kTwoPi * u(rng);
    const CMatrix a = observable_a(m, mp, m + 1);
    const auto mean = [&](double x) { return expectation(closed_form_sigma(spec, eta, x), a); };
    const double h = 1e-6;
    const double fd = (mean(phi + h) - mean(phi - h)) / (2 * h);
    const double analytic = phase_derivative(closed_form_sigma(spec, eta, phi), a);
    const auto in = mm_error_inputs(spec, eta);
    const double formula = -spec.delta() * in.gamma_sum * std::sin(spec.delta() * phi);
    EXPECT_NEAR(analytic, formula, 1e-12 * std::max(1.0, std::abs(formula)));
    if (std::abs(formula) > 1e-3) {
      EXPECT_NEAR(fd / analytic, 1.0, 1e-6) << m << " " << mp << " " << eta << " " << phi;
    }
    EXPECT_NEAR(mean(phi), in.gamma_sum * std::cos(spec.delta() * phi), 1e-12);
  }
}

TEST(MmError, NoStateReachesHalfHeisenberg) {
  for (int n = 1; n <= 6; ++n) {
    const auto spec = MmStateSpec::no_state(n);
    const auto in = mm_error_inputs(spec, 1.0);
    const auto best = minimize_over_phase([&](double x) { return mm_error_closed(in, x); }, kTwoPi / spec.delta());
    EXPECT_NEAR(best.value, 1.0 / (2 * n), 1e-12);
  }
}

TEST(Minimize, ShiftedSine) {
  const auto best = minimize_over_phase([](double x) { return 1.0 + std::sin(x); }, kTwoPi);
  EXPECT_NEAR(best.value, 0.0, 1e-10);
  EXPECT_NEAR(best.phi, 1.5 * pi, 1e-5);
}

TEST(Minimize, Constant) {
  const auto f = [](double) { return 0.25; };
  EXPECT_EQ(minimize_over_phase(f, 1.0).value, 0.25);
  EXPECT_EQ(average_over_phase(f, 1.0).mean, 0.25);
  EXPECT_EQ(average_over_phase(f, 1.0).excluded, 0);
}

TEST(Minimize, AllInfiniteIsAnError) {
  const auto f = [](double) { return kInf; };
  EXPECT_THROW(minimize_over_phase(f, 1.0), std::domain_error);
  EXPECT_THROW(average_over_phase(f, 1.0), std::domain_error);
}

TEST(Minimize, AverageSkipsSentinels) {
  const auto f = [](double x) { return x < 0.5 ? kInf : 2.0; };
  const auto avg = average_over_phase(f, 1.0, 10);
  EXPECT_EQ(avg.excluded, 5);
  EXPECT_EQ(avg.mean, 2.0);
}

TEST(MinimizeProperty, NeverAboveGrid) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    double c[6];
    for (double& v : c) v = g(rng);
    const auto f = [&](double x) {
      return 5.0 + c[0] * std::sin(x) + c[1] * std::cos(3 * x) + c[2] * std::sin(7 * x) + c[3] * std::cos(11 * x) +
             c[4] * std::sin(17 * x) + c[5] * std::cos(29 * x);
    };
    const auto best = minimize_over_phase(f, kTwoPi, 720);
    for (int k = 0; k < 720; ++k) EXPECT_LE(best.value, f(kTwoPi * k / 720));
    EXPECT_GE(best.phi, 0.0);
    EXPECT_LT(best.phi, kTwoPi);
  }
}

TEST(MinRmsProperty, MoreLossNeverHelps) {
  for (int m : {2, 6, 12, 20, 40}) {
    double prev = 0.0;
    for (double eta : {1.0, 0.9, 0.5}) {
      const PovmResponse povm(PhaseFamily(closed_form_rho(m, eta, 0.0), 1), m);
      const double v = minimize_over_phase([&](double x) { return circular_rms(povm.at(x)); }, kTwoPi).value;
      EXPECT_GE(v, prev) << m << " " << eta;
      prev = v;
    }
  }
}

TEST(Baselines, ClosedForms) {
  const auto b = baselines(20, 0.9);
  EXPECT_NEAR(b.shot_noise, 1.0 / std::sqrt(18.0), 1e-15);
  EXPECT_NEAR(b.shot_noise, 0.2357, 1e-4);
  EXPECT_EQ(b.heisenberg, 1.0 / 20);
  for (int n = 1; n <= 10; ++n) EXPECT_NEAR(baselines(n, 1.0).noon_error, 1.0 / n, 1e-15);
  EXPECT_NEAR(noon_error_closed(1, 0.64), 1.25, 1e-15);
  EXPECT_THROW(baselines(0.5, 0.9), std::invalid_argument);
  EXPECT_THROW(baselines(3, 0.0), std::invalid_argument);
}

TEST(Baselines, NoonBruteForceMatchesClosedForm) {
  for (int n = 1; n <= 6; ++n) {
    for (double eta : {0.7, 0.9, 1.0}) {
      const auto best = noon_error_bruteforce(n, eta);
      EXPECT_NEAR(best.value / noon_error_closed(n, eta), 1.0, 1e-8) << n << " " << eta;
    }
  }
}

// Kraus evolution applied after the phase, for every phi, without using
// the phase/loss commutation.
TEST(Baselines, NoonPhaseBeforeLossGivesSameError) {
  const int n = 3;
  const double eta = 0.8;
  const int d = n + 1;
  const auto lossy = lossy_noon(n, eta);
  const auto loss = loss_channel(eta, d);
  for (double phi : {0.1, 0.52, 1.9}) {
    DensityMatrix rho = apply_phase_arm0(two_mode_density(noon_state(n)), d, d, phi);
    rho = apply_channel(rho, lift_to_arm(loss, 0, d, d));
    rho = apply_channel(rho, lift_to_arm(loss, 1, d, d));
    EXPECT_LT(max_abs_difference(rho, apply_phase_arm0(lossy, d, d, phi)), 1e-14);
    const CMatrix a = noon_observable(n);
    EXPECT_NEAR(expectation(rho, a), std::pow(eta, n) * std::cos(n * phi), 1e-14);
    EXPECT_NEAR(expectation(rho, a * a), std::pow(eta, n), 1e-14);
  }
}

}  // namespace
}  // namespace interf
