#pragma once

#include <array>
#include <vector>

#include "friedrichs/linalg.hpp"
#include "friedrichs/torus.hpp"

namespace friedrichs {

enum class Family { TwoParticle, TrigPoly };

enum class TermKind { Cos, Sin };

// value * cos(k.q + l.p) or value * sin(k.q + l.p). The p-index l is only
// meaningful for dispersion terms; form-factor terms must leave it zero.
struct FourierTerm {
  std::array<int, 3> q_index{0, 0, 0};
  std::array<int, 3> p_index{0, 0, 0};
  double value = 0.0;
  TermKind kind = TermKind::Cos;

  bool operator==(const FourierTerm&) const = default;
};

// phi(q) = a0 + sum_i [cos1_i cos q_i + sin1_i sin q_i + cos2_i cos 2q_i + sin2_i sin 2q_i]
struct FormFactorHarmonics {
  double a0 = 1.0;
  std::array<double, 3> cos1{0.0, 0.0, 0.0};
  std::array<double, 3> sin1{0.0, 0.0, 0.0};
  std::array<double, 3> cos2{0.0, 0.0, 0.0};
  std::array<double, 3> sin2{0.0, 0.0, 0.0};

  bool operator==(const FormFactorHarmonics&) const = default;
};

// two_particle: w_p(q) = eps(q) + eps(p - q), eps(q) = sum_i c_i (1 - cos q_i),
//               phi from `phi` harmonics.
// trig_poly:    w and phi given as explicit Fourier tables.
struct ModelConfig {
  Family family = Family::TwoParticle;
  std::array<double, 3> hopping{1.0, 1.0, 1.0};
  FormFactorHarmonics phi;
  std::vector<FourierTerm> w_terms;
  std::vector<FourierTerm> phi_terms;

  bool operator==(const ModelConfig&) const = default;
};

// Simple cubic two-particle model with phi = 1.
ModelConfig builtin_cubic();
// Same dispersion, phi(q) = sum_i (1 + cos q_i), which vanishes at (pi, pi, pi).
ModelConfig builtin_cubic_vanishing();
// Fourier table reproducing builtin_cubic()'s dispersion through the trig_poly family.
ModelConfig cubic_as_trig_poly();

// Immutable evaluator bundle for w(p, q), phi(q) and their exact derivatives.
// Arguments are raw coordinates: every function is 2*pi periodic, so no
// wrapping is required. Safe to share between threads.
class DispersionModel {
 public:
  Family family() const { return cfg_.family; }
  const ModelConfig& config() const { return cfg_; }

  double w(const Vec3& p, const Vec3& q) const;
  Vec3 grad_w(const Vec3& p, const Vec3& q) const;
  Mat3 hess_w(const Vec3& p, const Vec3& q) const;

  // w_p(q0) - w_p(q0 + d) without the catastrophic cancellation of the
  // naive difference; accurate to O(eps * |d|) absolute as d -> 0.
  double w_drop(const Vec3& p, const Vec3& q0, const Vec3& d) const;

  double phi(const Vec3& q) const;
  Vec3 grad_phi(const Vec3& q) const;

  // Exact integral of phi^2 over the torus.
  double phi_norm_squared() const { return phi_norm2_; }
  // Highest |index| among the phi terms.
  int phi_degree() const { return phi_degree_; }
  // Max |phi| over a uniform grid of `grid`^3 points.
  double phi_sup_on_grid(int grid = 24) const;

  const std::vector<FourierTerm>& phi_terms() const { return phi_terms_; }
  const std::vector<FourierTerm>& w_terms() const { return w_terms_; }

 private:
  friend DispersionModel model_from_config(const ModelConfig& cfg);
  DispersionModel() = default;

  ModelConfig cfg_;
  std::vector<FourierTerm> w_terms_;
  std::vector<FourierTerm> phi_terms_;
  double phi_norm2_ = 0.0;
  int phi_degree_ = 0;
};

// Throws Error(TrivialFormFactor) when phi vanishes identically and
// Error(InvalidDispersion) for non-positive hopping or an empty/constant w table.
DispersionModel model_from_config(const ModelConfig& cfg);

double eval_w(const DispersionModel& model, const TorusVector& p, const TorusVector& q);
Vec3 eval_grad_w(const DispersionModel& model, const TorusVector& p, const TorusVector& q);
Mat3 eval_hess_w(const DispersionModel& model, const TorusVector& p, const TorusVector& q);
double eval_phi(const DispersionModel& model, const TorusVector& q);
Vec3 eval_grad_phi(const DispersionModel& model, const TorusVector& q);

}  // namespace friedrichs
