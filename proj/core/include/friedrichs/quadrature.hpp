#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "friedrichs/critical_point.hpp"
#include "friedrichs/model.hpp"
#include "friedrichs/torus.hpp"

namespace friedrichs {

struct QuadratureSpec {
  int grid = 64;                   // trapezoid nodes per torus axis (far field)
  double rho = 0.0;                // ball radius; <= 0 picks min(1, half distance to other maxima)
  int radial_nodes = 48;           // Gauss nodes on the bump annulus; graded panels use half
  int angular_nodes = 26;          // Gauss nodes in cos(theta); azimuth uses twice as many
  int bump_order = 0;              // 0: C-infinity bump, k > 0: C^k polynomial smoothstep
  double plateau_fraction = 0.25;  // chi == 1 for r <= plateau_fraction * rho
  double rel_tol = 1e-5;           // accepted |refined - coarse| / |refined|
  int max_refinements = 1;         // highest refinement level (doublings) the estimator may reach

  bool operator==(const QuadratureSpec&) const = default;
};

// Throws InvalidInput when N < 16, rho >= pi/2 or node counts are not positive.
void validate(const QuadratureSpec& spec);

// All node counts doubled `times` times.
QuadratureSpec refined(const QuadratureSpec& spec, int times = 1);

// Partition-of-unity weight chi(r): 1 on the plateau, 0 beyond rho.
double partition_bump(double r, double rho, double plateau_fraction, int order);

struct OmegaValue {
  double value = 0.0;
  double estimated_error = 0.0;
  double near = 0.0;  // chi part, integrated in polar coordinates about q0
  double far = 0.0;   // (1 - chi) part, periodic trapezoid rule
  int level = 0;      // number of doublings in the accepted value
};

// Omega(p; z) = int phi^2(s) / (z - w_p(s)) ds for z >= M(p).
//
// The node sets depend only on (model, p, q0, spec); for every z the sum is
// sum_i weight_i / ((z - M) + drop_i) with drop_i = M - w_p(s_i) >= 0, so all
// nodes are cached once and reused. Near q0 the polar volume element r^2
// cancels the 1/r^2 singularity; for z slightly above M the inner radial
// range is split into dyadic panels around the pole scale sqrt((z - M)/kappa).
//
// Not safe for concurrent use from several threads; give each task its own.
class OmegaIntegrator {
 public:
  OmegaIntegrator(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                  const QuadratureSpec& spec = {});
  ~OmegaIntegrator();
  OmegaIntegrator(OmegaIntegrator&&) noexcept;
  OmegaIntegrator& operator=(OmegaIntegrator&&) noexcept;

  double edge() const { return cp_.M; }
  double rho() const { return rho_; }
  const QuadratureSpec& spec() const { return spec_; }
  const DispersionModel& model() const { return model_; }
  const TorusVector& p() const { return p_; }
  const CriticalPointInfo& critical_point() const { return cp_; }

  // Throws BelowThreshold for z < M - tol and QuadratureNotConverged.
  OmegaValue omega(double z) const;
  OmegaValue omega_offset(double delta) const;

  // Omega at offset delta from one refinement level alone, no error control.
  double level_omega(double delta, int level) const;

  // int phi^2 / (z - w)^2 = -dOmega/dz on the same nodes; needs delta > 0.
  OmegaValue omega_derivative(double delta) const;

  // The radial integrand r^2 phi^2 / (z - w) of the near field along nu at
  // offset delta = z - M, with the removable r = 0 value 2 phi^2(q0) / (nu^T (-A) nu).
  double near_integrand(double r, const Vec3& nu, double delta) const;

  // Integrals of |f| and f^2, f = phi / (z - w), outside balls about q0 of
  // radius r_c / 2^k, k = 0..levels, where r_c = plateau_fraction * rho.
  struct NormLevels {
    std::vector<double> radius;
    std::vector<double> l1;
    std::vector<double> l2;
  };
  NormLevels norm_levels(double delta, int levels) const;

 private:
  struct Block {
    std::vector<double> weight;
    std::vector<double> drop;
  };
  struct Level;

  const Level& level(int index) const;
  double level_value(const Level& lvl, double delta, int power, double* near, double* far) const;
  OmegaValue refine(double delta, int power) const;
  int grading_depth(double delta) const;

  DispersionModel model_;
  TorusVector p_;
  CriticalPointInfo cp_;
  QuadratureSpec spec_;
  double rho_ = 1.0;
  double kappa_ = 1.0;  // largest curvature of M - w_p near q0: max eig(-A) / 2

  mutable std::mutex mutex_;
  mutable std::vector<std::unique_ptr<Level>> levels_;
};

double choose_ball_radius(const CriticalPointInfo& cp, const QuadratureSpec& spec);

OmegaValue omega(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp, double z,
                 const QuadratureSpec& spec = {});
OmegaValue omega_threshold(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                           const QuadratureSpec& spec = {});

struct NormDiagnostics {
  double l1 = 0.0;           // integral of |f| outside the smallest ball
  double l2 = 0.0;           // integral of f^2 outside the smallest ball
  double growth_rate = 0.0;  // fitted exponent of the L2 integral in 1/rho_k (clamped at 0)
  double l1_growth_rate = 0.0;
  std::vector<double> radius;
  std::vector<double> l1_levels;
  std::vector<double> l2_levels;
};

// Divergence diagnostics for f(q) = phi(q) / (z - w_p(q)).
NormDiagnostics state_norm_diagnostics(const OmegaIntegrator& integrator, double z, int levels = 12);
NormDiagnostics state_norm_diagnostics(const DispersionModel& model, const TorusVector& p,
                                       const CriticalPointInfo& cp, double z, const QuadratureSpec& spec = {});

}  // namespace friedrichs
