#pragma once

#include <limits>
#include <optional>

#include "friedrichs/linalg.hpp"
#include "friedrichs/model.hpp"
#include "friedrichs/torus.hpp"

namespace friedrichs {

struct CriticalSearchOptions {
  int grid = 24;                     // coarse scan resolution per axis
  double gradient_tol = 1e-12;       // Newton stops at |grad| <= tol * max(1, |w| scale)
  int max_newton_iterations = 50;
  double nondegeneracy_rel = 1e-8;   // largest Hessian eigenvalue <= -rel * (M - m)
  double uniqueness_rel = 1e-9;      // competing maxima within rel * (M - m) are a violation
  int max_candidates = 8;            // grid-local maxima that get polished
  bool throw_on_degenerate = true;
};

// Maximizer q0(p) of w_p, band edges M(p) = w_p(q0) and m(p) = min w_p,
// the Hessian A(p) at q0 and its certification.
struct CriticalPointInfo {
  TorusVector q0;
  double M = 0.0;
  double m = 0.0;
  Mat3 hessian = Mat3::Zero();
  Vec3 hessian_eigenvalues = Vec3::Zero();  // ascending
  double det_neg_hessian = 0.0;
  Vec3 gradient = Vec3::Zero();
  bool nondegenerate = false;
  int newton_iterations = 0;
  // Torus distance to the nearest other grid-local maximum (infinity if none).
  double other_maximum_distance = std::numeric_limits<double>::infinity();
};

// Coarse grid scan, Newton polish, negativity and uniqueness certification.
// Throws DegenerateMaximum, NonUniqueMaximum or NoConvergence.
CriticalPointInfo find_maximizer(const DispersionModel& model, const TorusVector& p,
                                 std::optional<TorusVector> seed = std::nullopt,
                                 const CriticalSearchOptions& options = {});

// Global minimum value m(p); degeneracy of the minimizer is tolerated.
double find_minimum(const DispersionModel& model, const TorusVector& p,
                    const CriticalSearchOptions& options = {});

struct ClosedFormComparison {
  TorusVector q0_numeric;
  TorusVector q0_closed;
  double M_numeric = 0.0;
  double M_closed = 0.0;
  double q0_error = 0.0;  // torus distance
  double M_error = 0.0;
};

// Closed-form maximizer of the two_particle family:
// q0_i = p_i / 2 + pi, M = sum_i c_i (2 + 2 cos(p_i / 2)).
TorusVector two_particle_maximizer(const std::array<double, 3>& hopping, const TorusVector& p);
double two_particle_edge(const std::array<double, 3>& hopping, const TorusVector& p);
double two_particle_floor(const std::array<double, 3>& hopping, const TorusVector& p);

// Throws FamilyMismatch for trig_poly models; propagates find_maximizer errors.
ClosedFormComparison closed_form_check(const DispersionModel& model, const TorusVector& p);

}  // namespace friedrichs
