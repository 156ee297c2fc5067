#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "friedrichs/error.hpp"
#include "friedrichs/lattice_oracle.hpp"
#include "friedrichs/spectral.hpp"

using namespace friedrichs;

namespace {

const double kTorusVolume = std::pow(kTwoPi, 3);

// pi^-3 int_{[0,pi]^3} dq / (3 - sum cos q_i).
double watson_w3() {
  return std::sqrt(6.0) / (96.0 * std::pow(kPi, 3)) * std::tgamma(1.0 / 24) * std::tgamma(5.0 / 24) *
         std::tgamma(7.0 / 24) * std::tgamma(11.0 / 24);
}
constexpr double kW3Lattice = 0.5054626974738318;

ModelConfig scaled_phi(ModelConfig c, double s) {
  c.phi.a0 *= s;
  for (auto* arr : {&c.phi.cos1, &c.phi.sin1, &c.phi.cos2, &c.phi.sin2}) {
    for (auto& v : *arr) v *= s;
  }
  return c;
}

class CubicProblem : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    model_ = new DispersionModel(model_from_config(builtin_cubic()));
    problem_ = new SpectralProblem(*model_, TorusVector(0, 0, 0));
  }
  static void TearDownTestSuite() {
    delete problem_;
    delete model_;
  }
  static DispersionModel* model_;
  static SpectralProblem* problem_;
};
DispersionModel* CubicProblem::model_ = nullptr;
SpectralProblem* CubicProblem::problem_ = nullptr;

}  // namespace

TEST_F(CubicProblem, CouplingThresholdMatchesWatson) {
  const double mu = problem_->mu_threshold();
  EXPECT_NEAR(mu * 0.5 * kTorusVolume * watson_w3(), 1.0, 1e-8);
  EXPECT_NEAR(mu * 0.5 * kTorusVolume * kW3Lattice, 1.0, 1e-4);
  EXPECT_NEAR(mu, 0.01595, 1e-5);
}

TEST(CouplingThreshold, QuarterUnderDoubledPhi) {
  const TorusVector p(0.3, 0.2, -0.1);
  const auto m1 = model_from_config(builtin_cubic());
  const auto m2 = model_from_config(scaled_phi(builtin_cubic(), 2.0));
  const double a = coupling_threshold(m1, p, find_maximizer(m1, p));
  const double b = coupling_threshold(m2, p, find_maximizer(m2, p));
  EXPECT_NEAR(b / a, 0.25, 1e-14);
}

TEST(CouplingThreshold, PositiveAtRandomMomenta) {
  const auto m = model_from_config(builtin_cubic());
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int n = 0; n < 20; ++n) {
    const TorusVector p(u(rng), u(rng), u(rng));
    EXPECT_GT(coupling_threshold(m, p, find_maximizer(m, p)), 0.0);
  }
}

TEST_F(CubicProblem, FredholmDeterminantValues) {
  const double mu = problem_->mu_threshold();
  const double M = problem_->critical_point().M;
  EXPECT_NEAR(problem_->fredholm_det(mu, M), 0.0, 2e-10);
  EXPECT_NEAR(problem_->fredholm_det(mu, 1e6), 1.0, 1e-4);
  EXPECT_NEAR(problem_->fredholm_det(2 * mu, M), -1.0, 1e-8);
  EXPECT_THROW(problem_->fredholm_det(-1.0, M), Error);
}

TEST_F(CubicProblem, SignBridge) {
  const double mu_p = problem_->mu_threshold();
  const double M = problem_->critical_point().M;
  for (int k = 1; k <= 10; ++k) {
    const double ratio = 0.3 * k;
    EXPECT_NEAR(problem_->fredholm_det(ratio * mu_p, M), 1.0 - ratio, 1e-8);
  }
}

TEST_F(CubicProblem, NoEigenvalueAtOrBelowThreshold) {
  const double mu_p = problem_->mu_threshold();
  EXPECT_FALSE(problem_->solve_eigenvalue(mu_p).has_value());
  EXPECT_FALSE(problem_->solve_eigenvalue(0.5 * mu_p).has_value());
}

TEST_F(CubicProblem, EigenvalueMatchesLattice) {
  const double mu = 2 * problem_->mu_threshold();
  const auto E = problem_->solve_eigenvalue(mu);
  ASSERT_TRUE(E.has_value());
  EXPECT_GT(*E, problem_->critical_point().M);
  EXPECT_LE(std::abs(problem_->fredholm_det(mu, *E)), 1e-12);
  const auto r16 = secular_root(*model_, {0, 0, 0}, mu, 16).secular_root;
  const auto r64 = secular_root(*model_, {0, 0, 0}, mu, 64).secular_root;
  ASSERT_TRUE(r16 && r64);
  EXPECT_LE(std::abs(*r64 - *E) / *E, 3e-3);
  EXPECT_LE(std::abs(*r64 - *E), std::abs(*r16 - *E));
}

TEST_F(CubicProblem, StrongCouplingLimit) {
  const double mu = 1e4;
  const auto E = problem_->solve_eigenvalue(mu);
  ASSERT_TRUE(E.has_value());
  EXPECT_LE(std::abs(*E / mu - kTorusVolume) / kTorusVolume, 1e-3);
  EXPECT_LE(std::abs(problem_->fredholm_det(mu, *E)), 1e-12);
}

TEST_F(CubicProblem, DeterminantIncreasingInZ) {
  const double mu = 3 * problem_->mu_threshold();
  const double M = problem_->critical_point().M;
  const double E = *problem_->solve_eigenvalue(mu);
  double prev = problem_->fredholm_det(mu, M);
  for (int k = -6; k <= 3; ++k) {
    const double v = problem_->fredholm_det(mu, M + (E - M) * std::ldexp(1.0, k));
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST_F(CubicProblem, EigenvalueIncreasingInMu) {
  const double mu_p = problem_->mu_threshold();
  double prev = problem_->critical_point().M;
  for (double r : {1.05, 1.3, 2.0, 4.0, 8.0}) {
    const double E = *problem_->solve_eigenvalue(r * mu_p);
    EXPECT_GT(E, prev);
    prev = E;
  }
}

TEST_F(CubicProblem, EigenfunctionResidualAndNorm) {
  const double mu = 2 * problem_->mu_threshold();
  const double E = *problem_->solve_eigenvalue(mu);
  const EigenfunctionEval ef = problem_->eigenfunction(mu, E);
  EXPECT_GT(ef.C, 0.0);
  EXPECT_NEAR(ef.norm, 1.0, 1e-8);
  EXPECT_LE(ef.residual_sup, 1e-8 * ef.norm);
  // Evaluator is finite everywhere, largest at q0.
  const Vec3 q0 = problem_->critical_point().q0.vec();
  EXPECT_TRUE(std::isfinite(ef(q0)));
  EXPECT_GT(ef(q0), ef(Vec3(0.1, 0.2, 0.3)));
  EXPECT_THROW(problem_->eigenfunction(mu, 12.0), Error);
}

TEST(Eigenfunction, NormalizationStableUnderRefinement) {
  const auto m = model_from_config(builtin_cubic());
  const TorusVector p(0, 0, 0);
  const auto cp = find_maximizer(m, p);
  QuadratureSpec fine;
  fine.grid = 128;
  SpectralProblem a(m, p, cp), b(m, p, cp, fine);
  const double mu = 2 * a.mu_threshold();
  const double E = *a.solve_eigenvalue(mu);
  const double Ca = a.eigenfunction(mu, E).C;
  const double Cb = b.eigenfunction(mu, E).C;
  EXPECT_LE(std::abs(Ca - Cb) / Ca, 1e-8);
}

TEST(Eigenfunction, ScalingLaw) {
  const TorusVector p(0.2, -0.4, 0.1);
  const auto m1 = model_from_config(builtin_cubic());
  const auto m2 = model_from_config(scaled_phi(builtin_cubic(), 2.0));
  SpectralProblem a(m1, p), b(m2, p);
  const double mu = 2.5 * a.mu_threshold();
  const double Ea = *a.solve_eigenvalue(mu);
  const double Eb = *b.solve_eigenvalue(mu / 4);
  EXPECT_NEAR(Ea, Eb, 1e-12 * Ea);
  const auto fa = a.eigenfunction(mu, Ea);
  const auto fb = b.eigenfunction(mu / 4, Eb);
  for (const Vec3& q : {Vec3(0, 0, 0), Vec3(1, 2, 3), Vec3(-2.5, 0.4, 1.0)}) {
    EXPECT_NEAR(std::abs(fa(q)), std::abs(fb(q)), 1e-12 * std::abs(fa(q)));
  }
}

TEST_F(CubicProblem, ClassificationTruthTable) {
  const double mu_p = problem_->mu_threshold();
  const auto at = problem_->classify(mu_p);
  EXPECT_EQ(at.label, Classification::Resonance);
  ASSERT_TRUE(at.l2_exponent.has_value());
  EXPECT_GE(*at.l2_exponent, 0.8);
  EXPECT_LE(*at.l2_exponent, 1.2);
  EXPECT_EQ(problem_->classify(0.5 * mu_p).label, Classification::Regular);
  EXPECT_FALSE(problem_->classify(0.5 * mu_p).l2_exponent.has_value());
  EXPECT_EQ(problem_->classify(2 * mu_p).label, Classification::BoundState);
  // Inside the relative tolerance band counts as mu = mu(p).
  EXPECT_EQ(problem_->classify(mu_p * (1 + 1e-10)).label, Classification::Resonance);
}

TEST(Classification, ThresholdEigenvalueWhenPhiVanishes) {
  const auto m = model_from_config(builtin_cubic_vanishing());
  SpectralProblem sp(m, {0, 0, 0});
  const auto c = sp.classify(sp.mu_threshold());
  EXPECT_EQ(c.label, Classification::ThresholdEigenvalue);
  ASSERT_TRUE(c.l2_exponent.has_value());
  EXPECT_LE(*c.l2_exponent, 0.1);
  EXPECT_EQ(sp.classify(0.5 * sp.mu_threshold()).label, Classification::Regular);
}

TEST(Classification, ExactlyOneLabel) {
  const auto m = model_from_config(builtin_cubic());
  SpectralProblem sp(m, {0.7, -0.3, 0.2});
  const double mu_p = sp.mu_threshold();
  for (double r : {0.1, 0.9, 0.999, 1.0, 1.001, 1.5, 20.0}) {
    const Classification c = sp.classify(r * mu_p).label;
    EXPECT_EQ(c == Classification::BoundState, sp.solve_eigenvalue(r * mu_p).has_value());
    const int count = (c == Classification::Regular) + (c == Classification::Resonance) +
                      (c == Classification::ThresholdEigenvalue) + (c == Classification::BoundState);
    EXPECT_EQ(count, 1);
  }
  EXPECT_EQ(classification_from_string("Resonance"), Classification::Resonance);
  EXPECT_THROW(classification_from_string("resonant"), Error);
}

TEST_F(CubicProblem, ExpansionFitRecoversTau0) {
  const ExpansionFit f = problem_->expansion_fit();
  EXPECT_NEAR(f.tau0_closed, 1.0, 1e-14);
  EXPECT_GE(f.tau0_fit, 0.99);
  EXPECT_LE(f.tau0_fit, 1.01);
  EXPECT_LE(f.residual, 1e-3 * f.sample_scale);
}

TEST(ExpansionFit, SquareRootTermVanishesWithPhi) {
  const auto m = model_from_config(builtin_cubic_vanishing());
  SpectralProblem sp(m, {0, 0, 0});
  const ExpansionFit f = sp.expansion_fit();
  EXPECT_NEAR(f.tau0_closed, 0.0, 1e-28);
  EXPECT_LE(f.sqrt_term_ratio, 1e-3);
}

TEST(ExpansionFit, ClosedFormScalesWithPhiSquared) {
  const TorusVector p(0.3, 0.0, -0.5);
  ModelConfig c = builtin_cubic();
  c.phi.cos1 = {0.2, 0.0, 0.1};
  const auto m1 = model_from_config(c);
  const auto m2 = model_from_config(scaled_phi(c, 2.0));
  const auto cp = find_maximizer(m1, p);
  EXPECT_NEAR(tau0_closed_form(m2, cp) / tau0_closed_form(m1, cp), 4.0, 1e-13);
}

TEST(ExpansionFit, AnisotropicClosedForm) {
  ModelConfig c = builtin_cubic();
  c.hopping = {0.6, 1.0, 1.7};
  const auto m = model_from_config(c);
  const TorusVector p(0.8, -0.4, 0.3);
  SpectralProblem sp(m, p);
  const ExpansionFit f = sp.expansion_fit();
  EXPECT_NEAR(f.tau0_fit / f.tau0_closed, 1.0, 1e-2);
}

TEST_F(CubicProblem, ReportJson) {
  const SpectralReport r = problem_->report(2 * problem_->mu_threshold());
  const auto j = to_json(r);
  for (const char* k : {"mu_threshold", "E", "delta_at_threshold", "classification", "tau0_fit", "tau0_closed",
                        "eigenfunction_norm"}) {
    EXPECT_TRUE(j.contains(k)) << k;
  }
  EXPECT_EQ(j["classification"], "BoundState");
  EXPECT_NEAR(j["delta_at_threshold"].get<double>(), -1.0, 1e-12);
  EXPECT_TRUE(j["tau0_fit"].is_null());
  const SpectralReport low = problem_->report(0.5 * problem_->mu_threshold());
  EXPECT_FALSE(low.E.has_value());
  EXPECT_TRUE(to_json(low)["E"].is_null());
}
