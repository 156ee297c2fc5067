#include "friedrichs/spectral.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "friedrichs/error.hpp"

namespace friedrichs {

std::string_view to_string(Classification c) {
  switch (c) {
    case Classification::Regular:
      return "Regular";
    case Classification::Resonance:
      return "Resonance";
    case Classification::ThresholdEigenvalue:
      return "ThresholdEigenvalue";
    case Classification::BoundState:
      return "BoundState";
  }
  return "Regular";
}

Classification classification_from_string(std::string_view s) {
  for (auto c : {Classification::Regular, Classification::Resonance, Classification::ThresholdEigenvalue,
                 Classification::BoundState}) {
    if (to_string(c) == s) return c;
  }
  throw Error(ErrorCode::InvalidInput, "unknown classification '" + std::string(s) + "'");
}

double EigenfunctionEval::operator()(const Vec3& q) const {
  return C * mu * model->phi(q) / (E - model->w(p, q));
}

namespace {

void check_mu(double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw Error(ErrorCode::InvalidInput, "coupling mu must be positive");
}

nlohmann::json opt(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

SpectralProblem::SpectralProblem(const DispersionModel& model, const TorusVector& p, const QuadratureSpec& spec,
                                 const SpectralOptions& options)
    : SpectralProblem(model, p, find_maximizer(model, p), spec, options) {}

SpectralProblem::SpectralProblem(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                                 const QuadratureSpec& spec, const SpectralOptions& options)
    : integrator_(model, p, cp, spec), options_(options) {}

OmegaValue SpectralProblem::threshold_omega() const {
  if (!threshold_) threshold_ = integrator_.omega_offset(0.0);
  return *threshold_;
}

double SpectralProblem::mu_threshold() const { return 1.0 / threshold_omega().value; }

double SpectralProblem::fredholm_det(double mu, double z) const {
  check_mu(mu);
  const double M = integrator_.edge();
  if (z == M) return 1.0 - mu * threshold_omega().value;
  return 1.0 - mu * integrator_.omega(z).value;
}

double SpectralProblem::delta_at(double mu, double s) const {
  if (s == 0.0) return 1.0 - mu * threshold_omega().value;
  return 1.0 - mu * integrator_.omega_offset(s * s).value;
}

std::optional<double> SpectralProblem::solve_eigenvalue(double mu) const {
  check_mu(mu);
  const double mu_p = mu_threshold();
  if (mu <= mu_p * (1.0 + options_.tol_mu)) return std::nullopt;

  // Delta is smooth in s = sqrt(z - M) (the threshold branch point is a
  // square root), so the secant steps below converge well in s.
  const double M = integrator_.edge();
  double a = 0.0;
  double fa = delta_at(mu, a);
  double b = std::sqrt(mu * model().phi_norm_squared());
  double fb = delta_at(mu, b);
  for (int i = 0; fb <= 0.0; ++i) {
    if (i >= options_.max_bracket_doublings) {
      throw Error(ErrorCode::Internal, "could not bracket the eigenvalue above M(p)");
    }
    a = b;
    fa = fb;
    b *= std::sqrt(2.0);
    fb = delta_at(mu, b);
  }
  if (std::abs(fb) <= options_.root_tol) return M + b * b;

  // Illinois regula falsi with a bisection fallback.
  int side = 0;
  double best = b, best_f = fb;
  for (int it = 0; it < options_.max_root_iterations; ++it) {
    double s = (a * fb - b * fa) / (fb - fa);
    if (!(s > a && s < b) || it % 8 == 7) s = 0.5 * (a + b);
    const double fs = delta_at(mu, s);
    if (std::abs(fs) < std::abs(best_f)) {
      best = s;
      best_f = fs;
    }
    if (std::abs(fs) <= options_.root_tol) return M + s * s;
    if (fs > 0.0) {
      b = s;
      fb = fs;
      if (side == -1) fa *= 0.5;
      side = -1;
    } else {
      a = s;
      fa = fs;
      if (side == +1) fb *= 0.5;
      side = +1;
    }
    if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * b) break;
  }
  std::ostringstream os;
  os << "root of Delta not resolved to " << options_.root_tol << "; best |Delta| = " << std::abs(best_f)
     << " at z = " << M + best * best;
  throw Error(ErrorCode::NoConvergence, os.str());
}

EigenfunctionEval SpectralProblem::eigenfunction(double mu, double E) const {
  check_mu(mu);
  const auto& cp = critical_point();
  const double delta = E - cp.M;
  if (!(delta > 0.0)) throw Error(ErrorCode::Precondition, "eigenfunction needs E > M(p)");

  EigenfunctionEval ef;
  ef.model = std::make_shared<const DispersionModel>(model());
  ef.p = integrator_.p().vec();
  ef.mu = mu;
  ef.E = E;
  const double moment = integrator_.omega_derivative(delta).value;
  ef.C = 1.0 / (mu * std::sqrt(moment));

  const DispersionModel& md = model();
  const int n = 2 * integrator_.spec().grid;
  const double h = kTwoPi / n;
  const double cell = h * h * h;
  std::vector<double> psi, phi, gap;
  psi.reserve(static_cast<std::size_t>(n) * n * n);
  phi.reserve(psi.capacity());
  gap.reserve(psi.capacity());
  double norm2 = 0.0, overlap = 0.0;
  for (int i = 0; i < n; ++i) {
    double n_i = 0.0, o_i = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Vec3 q(-kPi + h * i, -kPi + h * j, -kPi + h * k);
        const double f = md.phi(q);
        const double g = E - md.w(ef.p, q);
        const double v = ef.C * mu * f / g;
        n_i += v * v;
        o_i += v * f;
        psi.push_back(v);
        phi.push_back(f);
        gap.push_back(g);
      }
    }
    norm2 += n_i;
    overlap += o_i;
  }
  ef.norm = std::sqrt(cell * norm2);
  ef.overlap = cell * overlap;

  double sup = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    sup = std::max(sup, std::abs(-gap[i] * psi[i] + mu * phi[i] * ef.overlap));
  }
  const Vec3 q0 = cp.q0.vec();
  const double f0 = md.phi(q0);
  const double psi0 = ef(q0);
  sup = std::max(sup, std::abs((md.w(ef.p, q0) - E) * psi0 + mu * f0 * ef.overlap));
  ef.residual_sup = sup;
  return ef;
}

ClassificationResult SpectralProblem::classify(double mu) const {
  check_mu(mu);
  ClassificationResult out;
  out.mu_threshold = mu_threshold();
  const auto& cp = critical_point();
  out.phi_at_q0 = model().phi(cp.q0.vec());
  out.phi_sup = model().phi_sup_on_grid(24);
  if (mu > out.mu_threshold * (1.0 + options_.tol_mu)) {
    out.label = Classification::BoundState;
    return out;
  }
  if (mu < out.mu_threshold * (1.0 - options_.tol_mu)) {
    out.label = Classification::Regular;
    return out;
  }
  out.label = std::abs(out.phi_at_q0) > options_.tol_phi * out.phi_sup ? Classification::Resonance
                                                                        : Classification::ThresholdEigenvalue;
  const NormDiagnostics diag = state_norm_diagnostics(integrator_, cp.M, options_.norm_levels);
  out.l2_exponent = diag.growth_rate;
  out.l1_exponent = diag.l1_growth_rate;
  return out;
}

ExpansionFit SpectralProblem::expansion_fit() const {
  const auto& cp = critical_point();
  const SpectralOptions& o = options_;
  if (!(o.fit_window_lo > 0.0 && o.fit_window_hi > o.fit_window_lo) || o.fit_points < 4) {
    throw Error(ErrorCode::InvalidInput, "expansion window needs 0 < lo < hi and at least 4 points");
  }
  ExpansionFit fit;
  const double width = cp.M - cp.m;
  fit.window_lo = o.fit_window_lo * width;
  fit.window_hi = o.fit_window_hi * width;
  const double omega0 = threshold_omega().value;

  const int n = o.fit_points;
  Eigen::MatrixXd X(n, 3);
  Eigen::VectorXd y(n);
  const double ratio = std::log(fit.window_hi / fit.window_lo);
  for (int k = 0; k < n; ++k) {
    const double d = fit.window_lo * std::exp(ratio * k / (n - 1));
    const double sd = std::sqrt(d);
    // Columns scaled to O(1) at the top of the window.
    X(k, 0) = sd / std::sqrt(fit.window_hi);
    X(k, 1) = d / fit.window_hi;
    X(k, 2) = d * sd / (fit.window_hi * std::sqrt(fit.window_hi));
    y(k) = omega0 - integrator_.omega_offset(d).value;
  }
  const Eigen::Vector3d coef = X.colPivHouseholderQr().solve(y);
  fit.a = coef(0) / std::sqrt(fit.window_hi);
  fit.b = coef(1) / fit.window_hi;
  fit.c = coef(2) / (fit.window_hi * std::sqrt(fit.window_hi));
  fit.residual = std::sqrt((X * coef - y).squaredNorm() / n);
  fit.sample_scale = y.cwiseAbs().maxCoeff();
  // Omega(p) - Omega(p, M + d) = 2 pi^2 tau0 sqrt(d) + O(d) with the
  // spherical mean normalized to 1.
  fit.tau0_fit = fit.a / (2.0 * kPi * kPi);
  fit.tau0_closed = tau0_closed_form(model(), cp);
  const double b_term = std::abs(fit.b) * fit.window_hi;
  fit.sqrt_term_ratio = b_term > 0.0 ? std::abs(fit.a) * std::sqrt(fit.window_hi) / b_term
                                     : std::numeric_limits<double>::infinity();
  if (!(fit.residual <= 1e-3 * fit.sample_scale)) {
    std::ostringstream os;
    os << "rms misfit " << fit.residual << " exceeds 1e-3 of the sample scale " << fit.sample_scale;
    throw Error(ErrorCode::ExpansionFitFailed, os.str());
  }
  return fit;
}

SpectralReport SpectralProblem::report(double mu, bool with_expansion) const {
  check_mu(mu);
  const auto& cp = critical_point();
  SpectralReport r;
  r.p = integrator_.p();
  r.q0 = cp.q0;
  r.M = cp.M;
  r.m = cp.m;
  r.mu = mu;
  const OmegaValue th = threshold_omega();
  r.omega_threshold = th.value;
  r.omega_threshold_error = th.estimated_error;
  r.mu_threshold = 1.0 / th.value;
  r.delta_at_threshold = 1.0 - mu * th.value;
  r.E = solve_eigenvalue(mu);
  if (r.E) {
    const EigenfunctionEval ef = eigenfunction(mu, *r.E);
    r.eigenfunction_norm = ef.norm;
    r.eigenfunction_residual = ef.residual_sup;
  }
  const ClassificationResult cls = classify(mu);
  r.classification = cls.label;
  r.l2_exponent = cls.l2_exponent;
  r.tau0_closed = tau0_closed_form(model(), cp);
  if (with_expansion) r.tau0_fit = expansion_fit().tau0_fit;
  return r;
}

nlohmann::json to_json(const SpectralReport& r) {
  nlohmann::json j;
  j["p"] = r.p.components();
  j["q0"] = r.q0.components();
  j["M"] = r.M;
  j["m"] = r.m;
  j["mu"] = r.mu;
  j["mu_threshold"] = r.mu_threshold;
  j["omega_threshold"] = r.omega_threshold;
  j["omega_threshold_error"] = r.omega_threshold_error;
  j["E"] = opt(r.E);
  j["delta_at_threshold"] = r.delta_at_threshold;
  j["classification"] = std::string(to_string(r.classification));
  j["eigenfunction_norm"] = opt(r.eigenfunction_norm);
  j["eigenfunction_residual"] = opt(r.eigenfunction_residual);
  j["l2_divergence_exponent"] = opt(r.l2_exponent);
  j["tau0_fit"] = opt(r.tau0_fit);
  j["tau0_closed"] = r.tau0_closed;
  return j;
}

double tau0_closed_form(const DispersionModel& model, const CriticalPointInfo& cp) {
  if (!(cp.det_neg_hessian > 0.0)) throw Error(ErrorCode::Precondition, "det(-A) must be positive");
  const double f0 = model.phi(cp.q0.vec());
  return f0 * f0 * std::pow(2.0, 1.5) / std::sqrt(cp.det_neg_hessian);
}

double coupling_threshold(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                          const QuadratureSpec& spec) {
  return SpectralProblem(model, p, cp, spec).mu_threshold();
}

double fredholm_det(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp, double mu,
                    double z, const QuadratureSpec& spec) {
  return SpectralProblem(model, p, cp, spec).fredholm_det(mu, z);
}

std::optional<double> solve_eigenvalue(const DispersionModel& model, const TorusVector& p,
                                       const CriticalPointInfo& cp, double mu, const QuadratureSpec& spec,
                                       const SpectralOptions& options) {
  return SpectralProblem(model, p, cp, spec, options).solve_eigenvalue(mu);
}

EigenfunctionEval eigenfunction(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                                double mu, double E, const QuadratureSpec& spec) {
  return SpectralProblem(model, p, cp, spec).eigenfunction(mu, E);
}

ClassificationResult classify_threshold(const DispersionModel& model, const TorusVector& p,
                                        const CriticalPointInfo& cp, double mu, const QuadratureSpec& spec,
                                        const SpectralOptions& options) {
  return SpectralProblem(model, p, cp, spec, options).classify(mu);
}

ExpansionFit expansion_fit(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                           const QuadratureSpec& spec, const SpectralOptions& options) {
  return SpectralProblem(model, p, cp, spec, options).expansion_fit();
}

}  // namespace friedrichs
