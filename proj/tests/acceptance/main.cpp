// Acceptance suite: each criterion prints one PASS/FAIL line; the exit
// status is the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "friedrichs/error.hpp"
#include "friedrichs/lattice_oracle.hpp"
#include "friedrichs/spectral.hpp"

using namespace friedrichs;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int run_criterion(int id, const char* name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("[%s] criterion %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str(), secs);
  std::fflush(stdout);
  return o.pass ? 0 : 1;
}

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

ModelConfig phi_scaled(ModelConfig c, double s) {
  c.phi.a0 *= s;
  for (auto* arr : {&c.phi.cos1, &c.phi.sin1, &c.phi.cos2, &c.phi.sin2}) {
    for (auto& v : *arr) v *= s;
  }
  for (auto& t : c.phi_terms) t.value *= s;
  return c;
}

// Random momentum whose maximizer passes certification.
TorusVector certified_momentum(const DispersionModel& m, std::mt19937_64& rng, double span = 2.5) {
  std::uniform_real_distribution<double> u(-span, span);
  for (;;) {
    const TorusVector p(u(rng), u(rng), u(rng));
    try {
      find_maximizer(m, p);
      return p;
    } catch (const Error& e) {
      if (!e.is_model_validity()) throw;
    }
  }
}

// Random model from the config space: two_particle with random hopping and
// harmonics, or the cubic Fourier table plus small extra harmonics.
ModelConfig random_model(std::mt19937_64& rng, int index) {
  std::uniform_real_distribution<double> hop(0.4, 2.0), a(-0.6, 0.6), small(-0.08, 0.08);
  ModelConfig c;
  if (index % 4 != 3) {
    c.hopping = {hop(rng), hop(rng), hop(rng)};
    FormFactorHarmonics h;
    h.a0 = 1.0 + a(rng);
    for (std::size_t i = 0; i < 3; ++i) {
      h.cos1[i] = a(rng);
      h.sin1[i] = a(rng);
      h.cos2[i] = 0.3 * a(rng);
      h.sin2[i] = 0.3 * a(rng);
    }
    c.phi = h;
  } else {
    c = cubic_as_trig_poly();
    c.w_terms.push_back({{1, 1, 0}, {0, 0, 0}, small(rng), TermKind::Cos});
    c.w_terms.push_back({{0, 1, -1}, {0, 0, 0}, small(rng), TermKind::Cos});
    c.w_terms.push_back({{1, 0, 1}, {0, 0, 0}, small(rng), TermKind::Sin});
    c.phi_terms = {{{0, 0, 0}, {0, 0, 0}, 1.0 + a(rng), TermKind::Cos},
                   {{1, 0, 0}, {0, 0, 0}, a(rng), TermKind::Cos},
                   {{0, 1, 1}, {0, 0, 0}, a(rng), TermKind::Sin}};
  }
  return c;
}

Outcome threshold_value() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = model_from_config(builtin_cubic());
  const TorusVector p(0, 0, 0);
  const auto cp = find_maximizer(m, p);
  const double omega0 = omega_threshold(m, p, cp).value;
  const double oracle = richardson_threshold_sum(m, p, cp.M, 64).extrapolated;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double rel = std::abs(omega0 - oracle) / oracle;
  return {rel <= 1e-4 && secs < 30.0,
          "Omega(0) = " + fmt("%.12g", omega0) + ", lattice Richardson = " + fmt("%.12g", oracle) +
              ", rel dev " + fmt("%.2e", rel) + " (tol 1e-4), runtime " + fmt("%.1f", secs) + " s (limit 30 s)"};
}

Outcome sign_bridge() {
  const auto m = model_from_config(builtin_cubic());
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    SpectralProblem sp(m, certified_momentum(m, rng));
    const double mu_p = sp.mu_threshold();
    for (double r : {0.25, 0.5, 1.0, 2.0, 4.0}) {
      worst = std::max(worst, std::abs(sp.fredholm_det(r * mu_p, sp.critical_point().M) - (1.0 - r)));
    }
  }
  return {worst <= 1e-8, "max |Delta(mu,p;M) - (1 - mu/mu(p))| = " + fmt("%.2e", worst) + " over 25 cases (tol 1e-8)"};
}

Outcome dichotomy() {
  const auto m = model_from_config(builtin_cubic());
  int mismatches = 0, trend_failures = 0;
  double worst_rel = 0.0;
  std::ostringstream notes;
  for (int k = 0; k < 9; ++k) {
    const TorusVector p(kPi / 2 * k / 8.0, 0, 0);
    SpectralProblem sp(m, p);
    const double mu_p = sp.mu_threshold();
    for (double r : {0.5, 1.0, 2.0}) {
      const double mu = r * mu_p;
      const auto E = sp.solve_eigenvalue(mu);
      if (E.has_value() != (r > 1.0)) ++mismatches;
      if (!E) continue;
      const auto rep = convergence_report(m, p, mu, {16, 32, 64}, *E);
      worst_rel = std::max(worst_rel, rep.rows.back().rel_dev);
      if (!rep.decreasing_in_trend()) {
        ++trend_failures;
        notes << " [p1=" << p[0] << ": dev16 " << rep.rows[0].abs_dev << ", dev64 " << rep.rows[2].abs_dev << "]";
      }
    }
  }
  const bool pass = mismatches == 0 && worst_rel <= 3e-3 && trend_failures == 0;
  return {pass, "27 rows: E-existence mismatches " + std::to_string(mismatches) + ", max N=64 rel dev " +
                    fmt("%.2e", worst_rel) + " (tol 3e-3), trend failures " + std::to_string(trend_failures) +
                    notes.str()};
}

Outcome truth_table() {
  const TorusVector p(0, 0, 0);
  const auto one = model_from_config(builtin_cubic());
  const auto van = model_from_config(builtin_cubic_vanishing());
  SpectralProblem a(one, p), b(van, p);
  const auto ra = a.classify(a.mu_threshold());
  const auto rb = b.classify(b.mu_threshold());
  const auto half = a.classify(0.5 * a.mu_threshold()).label;
  const auto twice = a.classify(2.0 * a.mu_threshold()).label;
  const double ea = ra.l2_exponent.value_or(-1.0), eb = rb.l2_exponent.value_or(99.0);
  const bool pass = ra.label == Classification::Resonance && ea >= 0.8 && ea <= 1.2 &&
                    rb.label == Classification::ThresholdEigenvalue && eb <= 0.1 &&
                    half == Classification::Regular && twice == Classification::BoundState;
  return {pass, std::string("phi=1: ") + std::string(to_string(ra.label)) + " exponent " + fmt("%.3f", ea) +
                    "; vanishing phi: " + std::string(to_string(rb.label)) + " exponent " + fmt("%.3f", eb) +
                    "; 0.5 mu(p): " + std::string(to_string(half)) + "; 2 mu(p): " + std::string(to_string(twice))};
}

Outcome expansion() {
  const TorusVector p(0, 0, 0);
  SpectralProblem a(model_from_config(builtin_cubic()), p);
  SpectralProblem b(model_from_config(builtin_cubic_vanishing()), p);
  const ExpansionFit fa = a.expansion_fit();
  const ExpansionFit fb = b.expansion_fit();
  const bool pass = fa.tau0_fit >= 0.99 && fa.tau0_fit <= 1.01 && std::abs(fa.tau0_closed - 1.0) < 1e-12 &&
                    fb.sqrt_term_ratio <= 1e-3;
  return {pass, "tau0_fit " + fmt("%.6f", fa.tau0_fit) + " vs closed " + fmt("%.6f", fa.tau0_closed) +
                    " (window [0.99, 1.01]); phi(q0)=0: sqrt-term / linear-term " + fmt("%.2e", fb.sqrt_term_ratio) +
                    " (tol 1e-3)"};
}

Outcome monotonicity() {
  std::mt19937_64 rng(777);
  int violations = 0, models = 0, rejected = 0;
  while (models < 20) {
    const ModelConfig cfg = random_model(rng, models);
    DispersionModel m = model_from_config(cfg);
    std::optional<SpectralProblem> sp;
    try {
      std::uniform_real_distribution<double> u(-2.0, 2.0);
      sp.emplace(m, TorusVector(u(rng), u(rng), u(rng)));
    } catch (const Error& e) {
      if (!e.is_model_validity()) throw;
      ++rejected;
      continue;
    }
    ++models;
    const double M = sp->critical_point().M;
    const double mu_p = sp->mu_threshold();

    const double mu = 2.0 * mu_p;
    const double E = *sp->solve_eigenvalue(mu);
    double prev = -1e300;
    for (int k = -5; k <= 4; ++k) {
      const double d = sp->fredholm_det(mu, M + (E - M) * std::ldexp(1.0, k));
      if (!(d > prev)) ++violations;
      prev = d;
    }
    prev = M;
    for (double r : {1.1, 1.5, 2.0, 4.0, 8.0}) {
      const double e = *sp->solve_eigenvalue(r * mu_p);
      if (!(e > prev)) ++violations;
      prev = e;
    }
    prev = 1e300;
    for (double d : {0.0, 1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
      const double w = sp->integrator().omega_offset(d).value;
      if (!(w < prev)) ++violations;
      prev = w;
    }
  }
  return {violations == 0, std::to_string(violations) + " violations over " + std::to_string(models) +
                               " models (10-point Delta ladder, 5-point E ladder, 10-point Omega ladder; " +
                               std::to_string(rejected) + " draws rejected as non-certified)"};
}

Outcome positivity() {
  ModelConfig c = builtin_cubic();
  c.hopping = {1.0, 0.7, 1.4};
  c.phi.cos1 = {0.5, -0.2, 0.3};
  c.phi.sin1 = {0.0, 0.4, -0.1};
  const auto m = model_from_config(c);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-kPi, kPi), lmu(-4.0, 1.0);
  int below = 0, multi = 0;
  double min_gap = 1e300;
  for (int n = 0; n < 50; ++n) {
    const TorusVector p(u(rng), u(rng), u(rng));
    const double mu = std::pow(10.0, lmu(rng));
    const OracleResult r = dense_spectrum(m, p, mu, 10);
    const double tol = 1e-12 * std::max(1.0, std::abs(r.max_diag));
    if (*r.min_eig < r.min_diag - tol) ++below;
    if (r.above_max_diag > 1) ++multi;
    min_gap = std::min(min_gap, *r.min_eig - r.min_diag);
  }
  return {below == 0 && multi == 0, "50 dense N=10 spectra: " + std::to_string(below) +
                                        " below min diag (smallest min_eig - min_diag " + fmt("%.2e", min_gap) +
                                        "), " + std::to_string(multi) + " with more than one eigenvalue above max diag"};
}

Outcome residual() {
  const auto m = model_from_config(builtin_cubic());
  std::mt19937_64 rng(31337);
  std::uniform_real_distribution<double> ratio(1.2, 10.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    SpectralProblem sp(m, certified_momentum(m, rng, 2.0));
    const double mu = ratio(rng) * sp.mu_threshold();
    const double E = *sp.solve_eigenvalue(mu);
    const EigenfunctionEval ef = sp.eigenfunction(mu, E);
    worst = std::max(worst, ef.residual_sup / ef.norm);
  }
  return {worst <= 1e-8, "max sup|(H - E) Psi| / |Psi| = " + fmt("%.2e", worst) + " over 10 pairs (tol 1e-8)"};
}

Outcome scaling() {
  const TorusVector p(0.4, -0.2, 0.7);
  ModelConfig base = builtin_cubic();
  base.phi.cos1 = {0.3, 0.2, -0.1};
  const auto m1 = model_from_config(base);
  SpectralProblem a(m1, p);
  double worst_det = 0.0, worst_E = 0.0;
  int class_changes = 0;
  const double M = a.critical_point().M;
  for (double c : {2.0, 10.0}) {
    const auto mc = model_from_config(phi_scaled(base, c));
    SpectralProblem b(mc, p);
    for (double r : {0.5, 1.0, 2.0, 5.0}) {
      const double mu = r * a.mu_threshold();
      for (double d : {0.0, 1e-4, 0.1, 1.0, 10.0}) {
        worst_det = std::max(worst_det, std::abs(a.fredholm_det(mu, M + d) - b.fredholm_det(mu / (c * c), M + d)));
      }
      const auto Ea = a.solve_eigenvalue(mu);
      const auto Eb = b.solve_eigenvalue(mu / (c * c));
      if (Ea.has_value() != Eb.has_value()) {
        worst_E = 1e300;
      } else if (Ea) {
        worst_E = std::max(worst_E, std::abs(*Ea - *Eb) / *Ea);
      }
      if (r != 1.0 && a.classify(mu).label != b.classify(mu / (c * c)).label) ++class_changes;
    }
    // At mu = mu(p) both sides use their own computed threshold.
    if (a.classify(a.mu_threshold()).label != b.classify(b.mu_threshold()).label) ++class_changes;
  }
  const bool pass = worst_det <= 1e-12 && worst_E <= 1e-10 && class_changes == 0;
  return {pass, "max |Delta change| " + fmt("%.2e", worst_det) + " (tol 1e-12), max rel E change " +
                    fmt("%.2e", worst_E) + ", classification changes " + std::to_string(class_changes)};
}

}  // namespace

int main() {
  int failures = 0;
  failures += run_criterion(1, "threshold value", threshold_value);
  failures += run_criterion(2, "sign bridge", sign_bridge);
  failures += run_criterion(3, "eigenvalue dichotomy", dichotomy);
  failures += run_criterion(4, "classification truth table", truth_table);
  failures += run_criterion(5, "expansion coefficient", expansion);
  failures += run_criterion(6, "monotonicity suites", monotonicity);
  failures += run_criterion(7, "positivity shadow", positivity);
  failures += run_criterion(8, "eigenfunction residual", residual);
  failures += run_criterion(9, "scaling covariance", scaling);
  std::printf("%d of 9 criteria failed\n", failures);
  return failures;
}
