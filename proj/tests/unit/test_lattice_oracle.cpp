#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "friedrichs/error.hpp"
#include "friedrichs/lattice_oracle.hpp"
#include "friedrichs/spectral.hpp"

using namespace friedrichs;

namespace {

const double kTorusVolume = std::pow(kTwoPi, 3);
constexpr double kW3Lattice = 0.5054626974738318;

struct Cubic {
  DispersionModel model = model_from_config(builtin_cubic());
  SpectralProblem problem{model, TorusVector(0, 0, 0)};
};

Cubic& cubic() {
  static Cubic c;
  return c;
}

}  // namespace

TEST(SecularRoot, ConvergesToContinuumAtTwiceThreshold) {
  const double mu = 2 * cubic().problem.mu_threshold();
  const double E = *cubic().problem.solve_eigenvalue(mu);
  const auto r16 = secular_root(cubic().model, {0, 0, 0}, mu, 16);
  const auto r64 = secular_root(cubic().model, {0, 0, 0}, mu, 64);
  ASSERT_TRUE(r16.secular_root && r64.secular_root);
  EXPECT_GT(*r64.secular_root, r64.max_diag);
  EXPECT_LT(std::abs(*r64.secular_root - E), std::abs(*r16.secular_root - E));
}

TEST(SecularRoot, WeakCouplingBound) {
  // A midpoint node with phi != 0 at max_diag keeps a pole there, so a root
  // exists for every mu > 0; it sits below max_diag + mu h^3 sum phi^2.
  const double mu = 1e-6;
  for (int N : {8, 16, 32}) {
    const auto r = secular_root(cubic().model, {0, 0, 0}, mu, N);
    ASSERT_TRUE(r.secular_root.has_value());
    EXPECT_GT(*r.secular_root, r.max_diag);
    EXPECT_LE(*r.secular_root - r.max_diag, mu * kTorusVolume * (1 + 1e-12));
  }
}

TEST(SecularRoot, NoneWhenPhiVanishesOnTopNodes) {
  // Vertex grid: (pi, pi, pi) is a node, w attains M there and phi = 0.
  const auto m = model_from_config(builtin_cubic_vanishing());
  for (int N : {8, 16}) {
    const auto r = secular_root(m, {0, 0, 0}, 1e-6, LatticeGrid{N, 0.0});
    EXPECT_FALSE(r.secular_root.has_value());
    EXPECT_NEAR(r.max_diag, 12.0, 1e-12);
  }
  // Strong enough coupling restores the root.
  EXPECT_TRUE(secular_root(m, {0, 0, 0}, 1.0, LatticeGrid{8, 0.0}).secular_root.has_value());
}

TEST(SecularRoot, StrongCouplingAgreesWithDense) {
  const double mu = 1e4;
  const auto r = secular_root(cubic().model, {0, 0, 0}, mu, 16);
  ASSERT_TRUE(r.secular_root);
  EXPECT_NEAR(*r.secular_root / (mu * kTorusVolume), 1.0, 1e-3);
  const auto s = secular_root(cubic().model, {0, 0, 0}, mu, 10);
  const auto d = dense_spectrum(cubic().model, {0, 0, 0}, mu, 10);
  ASSERT_TRUE(s.secular_root && d.max_eig);
  EXPECT_NEAR(*s.secular_root, *d.max_eig, 1e-10 * *d.max_eig);
}

TEST(DenseSpectrum, InterlacingAndPositivity) {
  ModelConfig c = builtin_cubic();
  c.phi.cos1 = {0.4, -0.3, 0.2};
  c.phi.sin1 = {0.1, 0.0, 0.3};
  const auto m = model_from_config(c);
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> u(-kPi, kPi), lmu(-4.0, 0.0);
  for (int n = 0; n < 50; ++n) {
    const TorusVector p(u(rng), u(rng), u(rng));
    const double mu = std::pow(10.0, lmu(rng));
    const auto d = dense_spectrum(m, p, mu, 6);
    EXPECT_GE(d.above_max_diag, 0);
    EXPECT_LE(d.above_max_diag, 1);
    EXPECT_GE(*d.min_eig, d.min_diag - 1e-12);
    if (d.above_max_diag == 1) {
      const auto s = secular_root(m, p, mu, 6);
      ASSERT_TRUE(s.secular_root.has_value());
      EXPECT_NEAR(*s.secular_root, *d.max_eig, 1e-10);
    }
  }
}

TEST(DenseSpectrum, SizeLimit) {
  try {
    dense_spectrum(cubic().model, {0, 0, 0}, 1.0, 13);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SizeError);
  }
}

TEST(ConvergenceReport, DecreasingAtTwiceThreshold) {
  const double mu = 2 * cubic().problem.mu_threshold();
  const double E = *cubic().problem.solve_eigenvalue(mu);
  const auto rep = convergence_report(cubic().model, {0, 0, 0}, mu, {16, 32, 64}, E);
  EXPECT_TRUE(rep.decreasing_in_trend());
  std::ostringstream os;
  write_csv(os, rep);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "N,root,abs_dev,rel_dev");
  int lines = 0;
  for (std::string line; std::getline(is, line);) ++lines;
  EXPECT_EQ(lines, 3);
}

TEST(ConvergenceReport, SlowNearThreshold) {
  const double mu_p = cubic().problem.mu_threshold();
  const double mu = 1.01 * mu_p;
  const double E = *cubic().problem.solve_eigenvalue(mu);
  const auto near = convergence_report(cubic().model, {0, 0, 0}, mu, {16, 32, 64, 128}, E);
  EXPECT_TRUE(near.decreasing_in_trend());
  const double mu2 = 2 * mu_p;
  const auto far = convergence_report(cubic().model, {0, 0, 0}, mu2, {16},
                                      *cubic().problem.solve_eigenvalue(mu2));
  EXPECT_GT(near.rows[0].rel_dev, far.rows[0].rel_dev);
}

TEST(ConvergenceReport, FastFarFromThreshold) {
  const double mu = 10 * cubic().problem.mu_threshold();
  const double E = *cubic().problem.solve_eigenvalue(mu);
  const auto rep = convergence_report(cubic().model, {0, 0, 0}, mu, {32}, E);
  EXPECT_LE(rep.rows[0].rel_dev, 1e-4);
}

TEST(DiscreteOmega, MatchesQuadratureAboveEdge) {
  const double z = cubic().problem.critical_point().M + 1.0;
  const double lattice = discrete_omega(cubic().model, {0, 0, 0}, z, LatticeGrid{64, 0.5});
  const double quad = cubic().problem.integrator().omega(z).value;
  EXPECT_NEAR(lattice / quad, 1.0, 1e-4);
  EXPECT_THROW(discrete_omega(cubic().model, {0, 0, 0}, 11.0, LatticeGrid{16, 0.5}), Error);
}

TEST(DiscreteOmega, ShiftInvariance) {
  const double mu = 2 * cubic().problem.mu_threshold();
  std::mt19937_64 rng(52);
  std::uniform_real_distribution<double> off(0.05, 0.95);
  const double ref = *secular_root(cubic().model, {0, 0, 0}, mu, LatticeGrid{32, 0.5}).secular_root;
  for (int n = 0; n < 3; ++n) {
    const double o = off(rng);
    const auto r = secular_root(cubic().model, {0, 0, 0}, mu, LatticeGrid{32, o});
    ASSERT_TRUE(r.secular_root.has_value());
    EXPECT_NEAR(*r.secular_root / ref, 1.0, 1e-6) << "offset " << o;
  }
}

TEST(RichardsonThreshold, ReproducesFrozenOracle) {
  const auto t = richardson_threshold_sum(cubic().model, {0, 0, 0}, 12.0, 64);
  EXPECT_NEAR(t.extrapolated / (0.5 * kTorusVolume * kW3Lattice), 1.0, 1e-12);
  EXPECT_LT(t.coarse, t.fine);
}
