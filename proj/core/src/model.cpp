#include "friedrichs/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

#include "friedrichs/error.hpp"

namespace friedrichs {
namespace {

constexpr int kMaxHarmonic = 32;

// sin(u) - u, series below 0.1 where the direct form cancels.
double sin_minus_arg(double u) {
  if (std::abs(u) < 0.1) {
    const double u2 = u * u;
    return -u * u2 * (1.0 / 6.0 - u2 * (1.0 / 120.0 - u2 * (1.0 / 5040.0 - u2 / 362880.0)));
  }
  return std::sin(u) - u;
}

// cos(t + u) - cos(t) + u sin(t): the increment of cos with its linear part removed.
double curved_cos(double t, double u) {
  const double s = std::sin(0.5 * u);
  return -2.0 * std::cos(t) * s * s - std::sin(t) * sin_minus_arg(u);
}

// sin(t + u) - sin(t) - u cos(t).
double curved_sin(double t, double u) {
  const double s = std::sin(0.5 * u);
  return -2.0 * std::sin(t) * s * s + std::cos(t) * sin_minus_arg(u);
}

Vec3 to_vec(const std::array<int, 3>& k) { return {double(k[0]), double(k[1]), double(k[2])}; }

double phase(const FourierTerm& t, const Vec3& p, const Vec3& q) {
  double th = 0.0;
  for (int i = 0; i < 3; ++i) {
    th += t.q_index[static_cast<std::size_t>(i)] * q[i] + t.p_index[static_cast<std::size_t>(i)] * p[i];
  }
  return th;
}

double term_value(const FourierTerm& t, double th) {
  return t.kind == TermKind::Cos ? t.value * std::cos(th) : t.value * std::sin(th);
}

// d/dtheta of the term.
double term_slope(const FourierTerm& t, double th) {
  return t.kind == TermKind::Cos ? -t.value * std::sin(th) : t.value * std::cos(th);
}

double sum_terms(const std::vector<FourierTerm>& terms, const Vec3& p, const Vec3& q) {
  double acc = 0.0;
  for (const auto& t : terms) acc += term_value(t, phase(t, p, q));
  return acc;
}

Vec3 grad_terms(const std::vector<FourierTerm>& terms, const Vec3& p, const Vec3& q) {
  Vec3 g = Vec3::Zero();
  for (const auto& t : terms) g += term_slope(t, phase(t, p, q)) * to_vec(t.q_index);
  return g;
}

Mat3 hess_terms(const std::vector<FourierTerm>& terms, const Vec3& p, const Vec3& q) {
  Mat3 h = Mat3::Zero();
  for (const auto& t : terms) {
    const Vec3 k = to_vec(t.q_index);
    // second derivative of value*cos / value*sin is -term_value
    h -= term_value(t, phase(t, p, q)) * (k * k.transpose());
  }
  return h;
}

int max_abs_index(const std::vector<FourierTerm>& terms) {
  int deg = 0;
  for (const auto& t : terms) {
    for (int k : t.q_index) deg = std::max(deg, std::abs(k));
  }
  return deg;
}

std::vector<FourierTerm> harmonics_to_terms(const FormFactorHarmonics& h) {
  std::vector<FourierTerm> out;
  auto push = [&out](std::array<int, 3> k, double v, TermKind kind) {
    if (v != 0.0) out.push_back({k, {0, 0, 0}, v, kind});
  };
  push({0, 0, 0}, h.a0, TermKind::Cos);
  for (std::size_t i = 0; i < 3; ++i) {
    std::array<int, 3> e{0, 0, 0};
    e[i] = 1;
    push(e, h.cos1[i], TermKind::Cos);
    push(e, h.sin1[i], TermKind::Sin);
    e[i] = 2;
    push(e, h.cos2[i], TermKind::Cos);
    push(e, h.sin2[i], TermKind::Sin);
  }
  return out;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidInput, std::string(what) + " is not finite");
}

void validate_terms(const std::vector<FourierTerm>& terms, const char* what) {
  for (const auto& t : terms) {
    require_finite(t.value, what);
    for (std::size_t i = 0; i < 3; ++i) {
      if (std::abs(t.q_index[i]) > kMaxHarmonic || std::abs(t.p_index[i]) > kMaxHarmonic) {
        throw Error(ErrorCode::InvalidInput, std::string(what) + " harmonic index exceeds " +
                                                 std::to_string(kMaxHarmonic));
      }
    }
  }
}

}  // namespace

ModelConfig builtin_cubic() { return ModelConfig{}; }

ModelConfig builtin_cubic_vanishing() {
  ModelConfig cfg;
  cfg.phi.a0 = 3.0;
  cfg.phi.cos1 = {1.0, 1.0, 1.0};
  return cfg;
}

ModelConfig cubic_as_trig_poly() {
  ModelConfig cfg;
  cfg.family = Family::TrigPoly;
  // sum_i [2 - cos q_i - cos(p_i - q_i)]
  cfg.w_terms.push_back({{0, 0, 0}, {0, 0, 0}, 6.0, TermKind::Cos});
  for (std::size_t i = 0; i < 3; ++i) {
    std::array<int, 3> e{0, 0, 0};
    e[i] = 1;
    std::array<int, 3> minus_e{0, 0, 0};
    minus_e[i] = -1;
    cfg.w_terms.push_back({e, {0, 0, 0}, -1.0, TermKind::Cos});
    cfg.w_terms.push_back({minus_e, e, -1.0, TermKind::Cos});
  }
  cfg.phi_terms.push_back({{0, 0, 0}, {0, 0, 0}, 1.0, TermKind::Cos});
  return cfg;
}

DispersionModel model_from_config(const ModelConfig& cfg) {
  DispersionModel m;
  m.cfg_ = cfg;
  if (cfg.family == Family::TwoParticle) {
    for (double c : cfg.hopping) {
      require_finite(c, "hopping weight");
      if (c <= 0.0) throw Error(ErrorCode::InvalidDispersion, "hopping weights must be positive");
    }
    const auto& h = cfg.phi;
    require_finite(h.a0, "phi coefficient");
    for (std::size_t i = 0; i < 3; ++i) {
      for (double v : {h.cos1[i], h.sin1[i], h.cos2[i], h.sin2[i]}) require_finite(v, "phi coefficient");
    }
    m.phi_terms_ = harmonics_to_terms(cfg.phi);
  } else {
    validate_terms(cfg.w_terms, "w term");
    validate_terms(cfg.phi_terms, "phi term");
    for (const auto& t : cfg.phi_terms) {
      if (t.p_index != std::array<int, 3>{0, 0, 0}) {
        throw Error(ErrorCode::InvalidInput, "phi terms cannot depend on p");
      }
    }
    const bool varies = std::any_of(cfg.w_terms.begin(), cfg.w_terms.end(), [](const FourierTerm& t) {
      return t.value != 0.0 && t.q_index != std::array<int, 3>{0, 0, 0};
    });
    if (!varies) throw Error(ErrorCode::InvalidDispersion, "w table has no q-dependent term");
    m.w_terms_ = cfg.w_terms;
    m.phi_terms_ = cfg.phi_terms;
  }
  m.phi_terms_.erase(std::remove_if(m.phi_terms_.begin(), m.phi_terms_.end(),
                                    [](const FourierTerm& t) { return t.value == 0.0; }),
                     m.phi_terms_.end());
  if (m.phi_terms_.empty()) throw Error(ErrorCode::TrivialFormFactor, "all phi coefficients are zero");

  m.phi_degree_ = max_abs_index(m.phi_terms_);
  // The midpoint rule with N > 2 * degree integrates phi^2 exactly.
  const int n = std::max(8, 2 * m.phi_degree_ + 2);
  const double h = kTwoPi / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double f = m.phi(Vec3(-kPi + h * (i + 0.5), -kPi + h * (j + 0.5), -kPi + h * (k + 0.5)));
        acc += f * f;
      }
    }
  }
  m.phi_norm2_ = acc * h * h * h;
  if (!(m.phi_norm2_ > 1e-300)) throw Error(ErrorCode::TrivialFormFactor, "phi vanishes identically");
  return m;
}

double DispersionModel::w(const Vec3& p, const Vec3& q) const {
  if (cfg_.family == Family::TrigPoly) return sum_terms(w_terms_, p, q);
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    acc += cfg_.hopping[static_cast<std::size_t>(i)] * (2.0 - std::cos(q[i]) - std::cos(p[i] - q[i]));
  }
  return acc;
}

Vec3 DispersionModel::grad_w(const Vec3& p, const Vec3& q) const {
  if (cfg_.family == Family::TrigPoly) return grad_terms(w_terms_, p, q);
  Vec3 g;
  for (int i = 0; i < 3; ++i) {
    g[i] = cfg_.hopping[static_cast<std::size_t>(i)] * (std::sin(q[i]) - std::sin(p[i] - q[i]));
  }
  return g;
}

Mat3 DispersionModel::hess_w(const Vec3& p, const Vec3& q) const {
  if (cfg_.family == Family::TrigPoly) return hess_terms(w_terms_, p, q);
  Mat3 h = Mat3::Zero();
  for (int i = 0; i < 3; ++i) {
    h(i, i) = cfg_.hopping[static_cast<std::size_t>(i)] * (std::cos(q[i]) + std::cos(p[i] - q[i]));
  }
  return h;
}

double DispersionModel::w_drop(const Vec3& p, const Vec3& q0, const Vec3& d) const {
  // w(q0 + d) - w(q0) = curved part + grad w(q0) . d, with the linear part
  // taken from the exact gradient so that its O(|d|) pieces cancel before
  // rounding rather than after.
  double curved = 0.0;
  if (cfg_.family == Family::TrigPoly) {
    for (const auto& t : w_terms_) {
      const double th = phase(t, p, q0);
      const double u = to_vec(t.q_index).dot(d);
      curved += t.value * (t.kind == TermKind::Cos ? curved_cos(th, u) : curved_sin(th, u));
    }
  } else {
    for (int i = 0; i < 3; ++i) {
      const double c = cfg_.hopping[static_cast<std::size_t>(i)];
      curved -= c * (curved_cos(q0[i], d[i]) + curved_cos(p[i] - q0[i], -d[i]));
    }
  }
  return -(curved + grad_w(p, q0).dot(d));
}

double DispersionModel::phi(const Vec3& q) const { return sum_terms(phi_terms_, Vec3::Zero(), q); }

Vec3 DispersionModel::grad_phi(const Vec3& q) const { return grad_terms(phi_terms_, Vec3::Zero(), q); }

double DispersionModel::phi_sup_on_grid(int grid) const {
  const double h = kTwoPi / grid;
  double best = 0.0;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      for (int k = 0; k < grid; ++k) {
        best = std::max(best, std::abs(phi(Vec3(-kPi + h * i, -kPi + h * j, -kPi + h * k))));
      }
    }
  }
  return best;
}

double eval_w(const DispersionModel& model, const TorusVector& p, const TorusVector& q) {
  return model.w(p.vec(), q.vec());
}

Vec3 eval_grad_w(const DispersionModel& model, const TorusVector& p, const TorusVector& q) {
  return model.grad_w(p.vec(), q.vec());
}

Mat3 eval_hess_w(const DispersionModel& model, const TorusVector& p, const TorusVector& q) {
  return model.hess_w(p.vec(), q.vec());
}

double eval_phi(const DispersionModel& model, const TorusVector& q) { return model.phi(q.vec()); }

Vec3 eval_grad_phi(const DispersionModel& model, const TorusVector& q) {
  return model.grad_phi(q.vec());
}

}  // namespace friedrichs
