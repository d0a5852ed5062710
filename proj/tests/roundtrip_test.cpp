#include "interf/roundtrip.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <numbers>

namespace interf {
namespace {

using std::numbers::pi;

TEST(Oracle, LosslessIsPurePermutedPhase) {
  const int m = 5;
  const auto psi = optimal_phase_state(m);
  const RoundTripConfig cfg{0.4, 0.0, 1.0, 1.0, m, 1};
  const auto out = roundtrip_oracle(psi, cfg);
  const auto expect = DensityMatrix::pure(PermutationUnitary(m, m + 1).apply(apply_phase(psi, 0.4)));
  EXPECT_LT(max_abs_difference(out, expect), 1e-14);
  EXPECT_NEAR(out.elems().squaredNorm(), 1.0, 1e-12);  // tr rho^2 = 1
}

TEST(Oracle, AbsolutePhaseCancels) {
  const auto psi = optimal_phase_state(6);
  RoundTripConfig cfg{0.9, 0.0, 0.7, 0.8, 6, 1};
  const auto ref = roundtrip_oracle(psi, cfg);
  for (double theta : {0.7, pi}) {
    cfg.theta = theta;
    EXPECT_LT(max_abs_difference(roundtrip_oracle(psi, cfg), ref), 1e-12);
  }
}

TEST(Oracle, VacuumIsInvariant) {
  for (double eta : {0.2, 1.0}) {
    const RoundTripConfig cfg{1.3, 0.2, eta, eta, 0, 1};
    const auto out = roundtrip_oracle(FockVector::basis(0, 1), cfg);
    EXPECT_NEAR(std::abs(out(0, 0) - Complex(1.0)), 0.0, 1e-15);
  }
}

TEST(Oracle, RejectsBadInputs) {
  EXPECT_THROW(roundtrip_oracle(optimal_phase_state(3), RoundTripConfig{0, 0, 0.9, 0.9, 4, 1}),
               std::invalid_argument);
  EXPECT_THROW(roundtrip_oracle(optimal_phase_state(3), RoundTripConfig{0, 0, 0.0, 0.9, 3, 1}),
               std::invalid_argument);
  EXPECT_THROW(roundtrip_oracle(optimal_phase_state(3), RoundTripConfig{0, 0, 0.9, 0.9, 3, 0}),
               std::invalid_argument);
}

TEST(OracleProperty, ThetaInvarianceRandomInputs) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = static_cast<int>(rng() % 11);
    const FockVector psi(test::random_vector(m + 1, rng));
    const double phi = 2 * pi * u(rng);
    const double eta1 = 0.05 + 0.95 * u(rng);
    const double eta2 = 0.05 + 0.95 * u(rng);
    RoundTripConfig cfg{phi, 2 * pi * u(rng), eta1, eta2, m, 1};
    const auto a = roundtrip_oracle(psi, cfg);
    cfg.theta = 2 * pi * u(rng);
    const auto b = roundtrip_oracle(psi, cfg);
    EXPECT_LT(max_abs_difference(a, b), 1e-12);
    EXPECT_TRUE(a.diagnose().ok());
  }
}

TEST(OracleProperty, RoundsCompose) {
  std::mt19937_64 rng(12);
  for (int rounds = 1; rounds <= 4; ++rounds) {
    const int m = 4;
    const auto rho = test::random_density(m + 1, rng);
    RoundTripConfig cfg{0.37, 1.1, 0.85, 0.6, m, rounds};
    const auto composed = roundtrip_oracle(rho, cfg);
    cfg.rounds = 1;
    const RoundTrip single(cfg);
    DensityMatrix step = rho;
    for (int r = 0; r < rounds; ++r) step = single.one_round(step);
    EXPECT_LT(max_abs_difference(composed, step), 1e-12);
  }
}

TEST(PhaseFamily, MatchesOracleForAnyRoundCount) {
  const auto psi = optimal_phase_state(5);
  for (int rounds = 1; rounds <= 3; ++rounds) {
    RoundTripConfig cfg{0.0, 0.3, 0.9, 0.75, 5, rounds};
    const auto fam = PhaseFamily::from_oracle(psi, cfg);
    EXPECT_EQ(fam.phase_weight(), rounds % 2);
    for (double phi : {0.2, 1.7, 4.0}) {
      cfg.phi = phi;
      EXPECT_LT(max_abs_difference(fam.at(phi), roundtrip_oracle(psi, cfg)), 1e-12) << rounds << " " << phi;
    }
  }
}

TEST(ClosedFormRho, LosslessIsPureState) {
  for (int m : {1, 4, 9}) {
    const double phi = 0.8;
    const auto expect = DensityMatrix::pure(PermutationUnitary(m, m + 1).apply(apply_phase(optimal_phase_state(m), phi)));
    EXPECT_LT(max_abs_difference(closed_form_rho(m, 1.0, phi), expect), 1e-14);
  }
}

TEST(ClosedFormRho, MatchesOracleSmallCase) {
  const RoundTripConfig cfg{0.3, 0.0, 0.9, 0.9, 2, 1};
  EXPECT_LT(max_abs_difference(closed_form_rho(2, 0.9, 0.3), roundtrip_oracle(optimal_phase_state(2), cfg)), 1e-10);
}

TEST(ClosedFormRho, UnitTraceAndValid) {
  for (int m = 1; m <= 20; ++m) {
    for (double eta : {0.5, 0.9}) {
      const auto rho = closed_form_rho(m, eta, 0.3);
      EXPECT_LT(std::abs(rho.trace() - 1.0), 1e-10) << m;
      EXPECT_TRUE(rho.diagnose().ok()) << m;
    }
  }
}

TEST(ClosedFormRho, Rejects) {
  EXPECT_THROW(closed_form_rho(0, 0.9, 0.0), std::invalid_argument);
  EXPECT_THROW(closed_form_rho(3, 1.5, 0.0), std::invalid_argument);
}

TEST(ClosedFormSigma, LosslessTwoLevel) {
  const MmStateSpec spec(5, 2);
  const double phi = 0.45;
  const int delta = 3;
  const auto s = closed_form_sigma(spec, 1.0, phi);
  CMatrix expect = CMatrix::Zero(6, 6);
  expect(0, 0) = 0.5;
  expect(delta, delta) = 0.5;
  expect(delta, 0) = 0.5 * std::polar(1.0, -delta * phi);
  expect(0, delta) = 0.5 * std::polar(1.0, delta * phi);
  EXPECT_LT((s.elems() - expect).cwiseAbs().maxCoeff(), 1e-15);
  const RoundTripConfig cfg{phi, 0.0, 1.0, 1.0, 5, 1};
  EXPECT_LT(max_abs_difference(s, roundtrip_oracle(mm_state(spec), cfg)), 1e-14);
}

TEST(ClosedFormSigma, MatchesOracleSmallCase) {
  const MmStateSpec spec(3, 1);
  const RoundTripConfig cfg{0.5, 0.0, 0.8, 0.8, 3, 1};
  const auto s = closed_form_sigma(spec, 0.8, 0.5);
  EXPECT_LT(max_abs_difference(s, roundtrip_oracle(mm_state(spec), cfg)), 1e-10);
  for (int n = 0; n < s.dim(); ++n) {
    EXPECT_EQ(s(n, n).imag(), 0.0);
    EXPECT_GE(s(n, n).real(), -1e-12);
  }
}

TEST(ClosedFormSigma, ValidForLargerStates) {
  for (auto [m, mp] : {std::pair{30, 10}, std::pair{57, 3}, std::pair{12, 11}}) {
    for (double eta : {0.5, 0.9}) {
      const auto s = closed_form_sigma(MmStateSpec(m, mp), eta, 0.2);
      EXPECT_TRUE(s.diagnose().ok()) << m << " " << mp << " " << eta;
    }
  }
}

TEST(ValidateClosedForms, GridPasses) {
  const auto rep = validate_closed_forms(8, {0.5, 0.9, 1.0}, {0.0, 0.3, 1.2});
  EXPECT_TRUE(rep.passed()) << rep.to_table();
  EXPECT_LT(rep.max_dev(), 1e-10);
  // 8 M values x 9 (eta, phi) cells x (1 rho + M sigma cells)
  EXPECT_EQ(rep.cells.size(), 9u * (8 + 36));
}

TEST(ValidateClosedForms, SinglePhotonLosslessExact) {
  const auto rep = validate_closed_forms(1, {1.0}, {0.0, 0.3, 1.2});
  EXPECT_TRUE(rep.passed());
  EXPECT_LT(rep.max_dev(), 1e-15);
}

TEST(ValidateClosedForms, ReportFormats) {
  auto rep = validate_closed_forms(2, {0.9}, {0.3});
  const auto table = rep.to_table();
  EXPECT_NE(table.find("rho"), std::string::npos);
  EXPECT_NE(table.find("sigma"), std::string::npos);
  EXPECT_NE(table.find("worst:"), std::string::npos);
  const auto kv = rep.to_key_value();
  for (const char* key : {"max_dev=", "argmax_m=", "argmax_eta=", "argmax_phi=", "status=pass"})
    EXPECT_NE(kv.find(key), std::string::npos) << key;
  rep.tolerance = 0.0;
  EXPECT_NE(rep.to_key_value().find("status=fail"), std::string::npos);
}

}  // namespace
}  // namespace interf
