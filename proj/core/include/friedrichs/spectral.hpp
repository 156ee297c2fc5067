#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string_view>

#include "friedrichs/critical_point.hpp"
#include "friedrichs/model.hpp"
#include "friedrichs/quadrature.hpp"

namespace friedrichs {

enum class Classification { Regular, Resonance, ThresholdEigenvalue, BoundState };

std::string_view to_string(Classification c);
Classification classification_from_string(std::string_view s);

struct SpectralOptions {
  double tol_mu = 1e-9;    // |mu - mu(p)| <= tol_mu * mu(p) counts as mu = mu(p)
  double tol_phi = 1e-8;   // phi(q0) = 0 when |phi(q0)| <= tol_phi * max |phi|
  double root_tol = 1e-12; // |Delta(E)| at the accepted root
  int max_bracket_doublings = 200;
  int max_root_iterations = 300;
  int norm_levels = 12;          // shells used by the divergence diagnostics
  double fit_window_lo = 1e-5;   // expansion window, in units of M - m
  double fit_window_hi = 1e-3;
  int fit_points = 8;
};

struct EigenfunctionEval {
  double C = 0.0;       // Psi(q) = C mu phi(q) / (E - w_p(q))
  double mu = 0.0;
  double E = 0.0;
  double norm = 0.0;    // L2 norm of Psi by the trapezoid rule on the fine grid
  double overlap = 0.0; // (Psi, phi), trapezoid rule
  double residual_sup = 0.0;  // sup |(w - E) Psi + mu phi (Psi, phi)| over grid nodes and q0

  double operator()(const Vec3& q) const;

  std::shared_ptr<const DispersionModel> model;
  Vec3 p = Vec3::Zero();
};

struct ClassificationResult {
  Classification label = Classification::Regular;
  double mu_threshold = 0.0;
  double phi_at_q0 = 0.0;
  double phi_sup = 0.0;
  // Only when mu = mu(p): L2 / L1 divergence exponents of phi / (M - w) near q0.
  std::optional<double> l2_exponent;
  std::optional<double> l1_exponent;
};

struct ExpansionFit {
  double a = 0.0;  // Omega(p) - Omega(p, M + d) ~ a sqrt(d) + b d + c d^{3/2}
  double b = 0.0;
  double c = 0.0;
  double tau0_fit = 0.0;
  double tau0_closed = 0.0;
  double residual = 0.0;        // rms misfit
  double sample_scale = 0.0;    // max |Omega(p) - Omega(p, M + d_k)|
  double sqrt_term_ratio = 0.0; // |a| sqrt(d_max) / (|b| d_max)
  double window_lo = 0.0;       // absolute offsets d
  double window_hi = 0.0;
};

struct SpectralReport {
  TorusVector p;
  TorusVector q0;
  double M = 0.0;
  double m = 0.0;
  double mu = 0.0;
  double mu_threshold = 0.0;
  double omega_threshold = 0.0;
  double omega_threshold_error = 0.0;
  std::optional<double> E;
  double delta_at_threshold = 0.0;
  Classification classification = Classification::Regular;
  std::optional<double> eigenfunction_norm;
  std::optional<double> eigenfunction_residual;
  std::optional<double> l2_exponent;
  std::optional<double> tau0_fit;
  double tau0_closed = 0.0;
};

nlohmann::json to_json(const SpectralReport& r);

// Fixes (model, p) and reuses one Omega integrator, so repeated Delta
// evaluations along a root solve or a mu ladder share the cached nodes.
class SpectralProblem {
 public:
  SpectralProblem(const DispersionModel& model, const TorusVector& p, const QuadratureSpec& spec = {},
                  const SpectralOptions& options = {});
  SpectralProblem(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                  const QuadratureSpec& spec = {}, const SpectralOptions& options = {});

  const CriticalPointInfo& critical_point() const { return integrator_.critical_point(); }
  const OmegaIntegrator& integrator() const { return integrator_; }
  const DispersionModel& model() const { return integrator_.model(); }
  const SpectralOptions& options() const { return options_; }

  OmegaValue threshold_omega() const;
  double mu_threshold() const;

  // Delta(mu, p; z) = 1 - mu Omega(p; z).
  double fredholm_det(double mu, double z) const;

  // The eigenvalue above M(p), none for mu <= mu(p) (1 + tol_mu).
  std::optional<double> solve_eigenvalue(double mu) const;

  EigenfunctionEval eigenfunction(double mu, double E) const;
  ClassificationResult classify(double mu) const;
  ExpansionFit expansion_fit() const;

  // Threshold, eigenvalue, classification and eigenfunction norm for one mu.
  SpectralReport report(double mu, bool with_expansion = false) const;

 private:
  double delta_at(double mu, double s) const;  // Delta at z = M + s^2

  OmegaIntegrator integrator_;
  SpectralOptions options_;
  mutable std::optional<OmegaValue> threshold_;
};

// phi^2(q0) 2^{3/2} / sqrt(det(-A)).
double tau0_closed_form(const DispersionModel& model, const CriticalPointInfo& cp);

double coupling_threshold(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                          const QuadratureSpec& spec = {});
double fredholm_det(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp, double mu,
                    double z, const QuadratureSpec& spec = {});
std::optional<double> solve_eigenvalue(const DispersionModel& model, const TorusVector& p,
                                       const CriticalPointInfo& cp, double mu, const QuadratureSpec& spec = {},
                                       const SpectralOptions& options = {});
EigenfunctionEval eigenfunction(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                                double mu, double E, const QuadratureSpec& spec = {});
ClassificationResult classify_threshold(const DispersionModel& model, const TorusVector& p,
                                        const CriticalPointInfo& cp, double mu, const QuadratureSpec& spec = {},
                                        const SpectralOptions& options = {});
ExpansionFit expansion_fit(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                           const QuadratureSpec& spec = {}, const SpectralOptions& options = {});

}  // namespace friedrichs
