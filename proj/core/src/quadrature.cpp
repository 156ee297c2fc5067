#include "friedrichs/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

#include "friedrichs/error.hpp"
#include "friedrichs/gauss_legendre.hpp"

namespace friedrichs {
namespace {

constexpr int kMaxGrading = 48;

// Blocked summation of sum_i w_i / (delta + d_i)^power; fixed order, so
// deterministic, and far less rounding than one running sum.
double resolvent_sum(const std::vector<double>& w, const std::vector<double>& d, double delta, int power) {
  constexpr std::size_t kBlock = 512;
  double total = 0.0;
  for (std::size_t start = 0; start < w.size(); start += kBlock) {
    const std::size_t stop = std::min(w.size(), start + kBlock);
    double part = 0.0;
    if (power == 1) {
      for (std::size_t i = start; i < stop; ++i) part += w[i] / (delta + d[i]);
    } else {
      for (std::size_t i = start; i < stop; ++i) {
        const double g = 1.0 / (delta + d[i]);
        part += w[i] * g * g;
      }
    }
    total += part;
  }
  return total;
}

double smoothstep(double t, int order) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  if (order <= 0) {
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
  }
  // C^order polynomial: t^(k+1) sum_j binom(k + j, j) (1 - t)^j
  double acc = 0.0, binom = 1.0, pow1mt = 1.0;
  for (int j = 0; j <= order; ++j) {
    if (j > 0) binom = binom * (order + j) / j;
    acc += binom * pow1mt;
    pow1mt *= 1.0 - t;
  }
  return std::pow(t, order + 1) * acc;
}

struct SphereRule {
  std::vector<Vec3> nu;
  std::vector<double> weight;
};

SphereRule sphere_rule(int n_theta) {
  SphereRule s;
  const QuadratureRule ct = gauss_legendre(n_theta);
  const int n_phi = 2 * n_theta;
  const double dphi = kTwoPi / n_phi;
  for (int i = 0; i < n_theta; ++i) {
    const double c = ct.nodes[static_cast<std::size_t>(i)];
    const double st = std::sqrt(std::max(0.0, 1.0 - c * c));
    for (int j = 0; j < n_phi; ++j) {
      const double ph = dphi * (j + 0.5);
      s.nu.emplace_back(st * std::cos(ph), st * std::sin(ph), c);
      s.weight.push_back(ct.weights[static_cast<std::size_t>(i)] * dphi);
    }
  }
  return s;
}

}  // namespace

void validate(const QuadratureSpec& spec) {
  if (spec.grid < 16) throw Error(ErrorCode::InvalidInput, "quadrature grid must be >= 16");
  if (spec.radial_nodes < 4 || spec.angular_nodes < 2) {
    throw Error(ErrorCode::InvalidInput, "quadrature node counts too small");
  }
  if (!(spec.rho < kPi / 2.0)) throw Error(ErrorCode::InvalidInput, "ball radius must be < pi/2");
  if (!(spec.plateau_fraction > 0.0 && spec.plateau_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidInput, "plateau fraction must lie in (0, 1)");
  }
  if (!(spec.rel_tol > 0.0)) throw Error(ErrorCode::InvalidInput, "quadrature tolerance must be positive");
  if (spec.max_refinements < 1) throw Error(ErrorCode::InvalidInput, "max_refinements must be >= 1");
  if (spec.bump_order < 0) throw Error(ErrorCode::InvalidInput, "bump order must be >= 0");
}

QuadratureSpec refined(const QuadratureSpec& spec, int times) {
  QuadratureSpec out = spec;
  for (int i = 0; i < times; ++i) {
    out.grid *= 2;
    out.radial_nodes *= 2;
    out.angular_nodes *= 2;
  }
  return out;
}

double partition_bump(double r, double rho, double plateau_fraction, int order) {
  const double inner = plateau_fraction * rho;
  if (r <= inner) return 1.0;
  if (r >= rho) return 0.0;
  return smoothstep((rho - r) / (rho - inner), order);
}

double choose_ball_radius(const CriticalPointInfo& cp, const QuadratureSpec& spec) {
  if (spec.rho > 0.0) return spec.rho;
  return std::min(1.0, 0.5 * cp.other_maximum_distance);
}

struct OmegaIntegrator::Level {
  QuadratureSpec spec;
  SphereRule sphere;
  Block far;
  Block bump;                   // [r_c, rho] with the chi transition
  std::vector<Block> annuli;    // k: [r_c 2^-(k+1), r_c 2^-k]
  std::map<int, Block> cores;   // K: [0, r_c 2^-K]
};

OmegaIntegrator::OmegaIntegrator(const DispersionModel& model, const TorusVector& p,
                                 const CriticalPointInfo& cp, const QuadratureSpec& spec)
    : model_(model), p_(p), cp_(cp), spec_(spec) {
  if (!cp.nondegenerate) throw Error(ErrorCode::Precondition, "critical point is not certified non-degenerate");
  rho_ = choose_ball_radius(cp, spec);
  QuadratureSpec checked = spec;
  checked.rho = rho_;
  validate(checked);
  if (!(rho_ > 0.0)) throw Error(ErrorCode::InvalidInput, "ball radius must be positive");
  Eigen::SelfAdjointEigenSolver<Mat3> es(-cp.hessian, Eigen::EigenvaluesOnly);
  kappa_ = 0.5 * es.eigenvalues()[2];
}

OmegaIntegrator::~OmegaIntegrator() = default;
OmegaIntegrator::OmegaIntegrator(OmegaIntegrator&& o) noexcept
    : model_(std::move(o.model_)),
      p_(o.p_),
      cp_(o.cp_),
      spec_(o.spec_),
      rho_(o.rho_),
      kappa_(o.kappa_),
      levels_(std::move(o.levels_)) {}
OmegaIntegrator& OmegaIntegrator::operator=(OmegaIntegrator&& o) noexcept {
  if (this != &o) {
    model_ = std::move(o.model_);
    p_ = o.p_;
    cp_ = o.cp_;
    spec_ = o.spec_;
    rho_ = o.rho_;
    kappa_ = o.kappa_;
    levels_ = std::move(o.levels_);
  }
  return *this;
}

const OmegaIntegrator::Level& OmegaIntegrator::level(int index) const {
  while (static_cast<int>(levels_.size()) <= index) {
    auto lvl = std::make_unique<Level>();
    lvl->spec = refined(spec_, static_cast<int>(levels_.size()));
    lvl->sphere = sphere_rule(lvl->spec.angular_nodes);

    const Vec3 pv = p_.vec();
    const int n = lvl->spec.grid;
    const double h = kTwoPi / n;
    const double cell = h * h * h;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const Vec3 s(-kPi + h * i, -kPi + h * j, -kPi + h * k);
          const double r = torus_displacement(cp_.q0, TorusVector(s)).norm();
          const double outer = 1.0 - partition_bump(r, rho_, spec_.plateau_fraction, spec_.bump_order);
          if (outer <= 0.0) continue;
          const double f = model_.phi(s);
          const double wgt = cell * outer * f * f;
          if (wgt == 0.0) continue;
          const double drop = cp_.M - model_.w(pv, s);
          if (!(drop > 0.0)) {
            std::ostringstream os;
            os << "w_p reaches M(p) away from q0 near " << TorusVector(s);
            throw Error(ErrorCode::NonUniqueMaximum, os.str());
          }
          lvl->far.weight.push_back(wgt);
          lvl->far.drop.push_back(drop);
        }
      }
    }
    levels_.push_back(std::move(lvl));
  }
  return *levels_[static_cast<std::size_t>(index)];
}

namespace {

struct RadialBuild {
  const DispersionModel& model;
  const Vec3& p;
  const Vec3& q0;
  const SphereRule& sphere;

  // Polar nodes on [a, b] x S^2 with weight r^2 chi(r) phi^2 and drop M - w.
  void operator()(double a, double b, int n, const std::function<double(double)>& chi,
                  std::vector<double>& weight, std::vector<double>& drop) const {
    const QuadratureRule rr = gauss_legendre(n, a, b);
    for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
      const double r = rr.nodes[i];
      const double radial = rr.weights[i] * r * r * chi(r);
      if (radial == 0.0) continue;
      for (std::size_t d = 0; d < sphere.nu.size(); ++d) {
        const Vec3 disp = r * sphere.nu[d];
        const double f = model.phi(q0 + disp);
        const double wgt = radial * sphere.weight[d] * f * f;
        if (wgt == 0.0) continue;
        const double dr = model.w_drop(p, q0, disp);
        if (!(dr > 0.0)) throw Error(ErrorCode::Internal, "non-positive w drop inside the ball about q0");
        weight.push_back(wgt);
        drop.push_back(dr);
      }
    }
  }
};

}  // namespace

int OmegaIntegrator::grading_depth(double delta) const {
  if (!(delta > 0.0)) return 0;
  const double ell = std::sqrt(delta / kappa_);
  const double core = spec_.plateau_fraction * rho_;
  if (4.0 * ell >= core) return 0;
  const int k = static_cast<int>(std::ceil(std::log2(core / (4.0 * ell))));
  return std::clamp(k, 0, kMaxGrading);
}

double OmegaIntegrator::level_value(const Level& lvl_const, double delta, int power, double* near,
                                    double* far) const {
  // Lazily extends the graded panels; callers hold mutex_.
  Level& lvl = const_cast<Level&>(lvl_const);
  const Vec3 pv = p_.vec();
  const Vec3 q0 = cp_.q0.vec();
  const RadialBuild build{model_, pv, q0, lvl.sphere};
  const double rc = spec_.plateau_fraction * rho_;
  const int n_bump = lvl.spec.radial_nodes;
  const int n_graded = std::max(8, lvl.spec.radial_nodes / 2);
  auto one = [](double) { return 1.0; };

  if (lvl.bump.weight.empty()) {
    auto chi = [this](double r) { return partition_bump(r, rho_, spec_.plateau_fraction, spec_.bump_order); };
    build(rc, rho_, n_bump, chi, lvl.bump.weight, lvl.bump.drop);
  }
  const int depth = grading_depth(delta);
  while (static_cast<int>(lvl.annuli.size()) < depth) {
    const int k = static_cast<int>(lvl.annuli.size());
    Block b;
    build(rc * std::ldexp(1.0, -(k + 1)), rc * std::ldexp(1.0, -k), n_graded, one, b.weight, b.drop);
    lvl.annuli.push_back(std::move(b));
  }
  auto core_it = lvl.cores.find(depth);
  if (core_it == lvl.cores.end()) {
    Block b;
    build(0.0, rc * std::ldexp(1.0, -depth), depth == 0 ? n_bump : n_graded, one, b.weight, b.drop);
    core_it = lvl.cores.emplace(depth, std::move(b)).first;
  }

  double near_sum = resolvent_sum(lvl.bump.weight, lvl.bump.drop, delta, power);
  for (int k = 0; k < depth; ++k) {
    const Block& b = lvl.annuli[static_cast<std::size_t>(k)];
    near_sum += resolvent_sum(b.weight, b.drop, delta, power);
  }
  near_sum += resolvent_sum(core_it->second.weight, core_it->second.drop, delta, power);
  const double far_sum = resolvent_sum(lvl.far.weight, lvl.far.drop, delta, power);
  if (near) *near = near_sum;
  if (far) *far = far_sum;
  return near_sum + far_sum;
}

OmegaValue OmegaIntegrator::omega(double z) const {
  const double tol = 1e-12 * std::max(1.0, std::abs(cp_.M));
  if (!std::isfinite(z)) throw Error(ErrorCode::InvalidInput, "energy is not finite");
  if (z < cp_.M - tol) {
    std::ostringstream os;
    os << "z = " << z << " lies below the band edge M(p) = " << cp_.M;
    throw Error(ErrorCode::BelowThreshold, os.str());
  }
  return omega_offset(std::max(0.0, z - cp_.M));
}

OmegaValue OmegaIntegrator::omega_offset(double delta) const {
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::BelowThreshold, "energy offset from M(p) must be >= 0");
  }
  return refine(delta, 1);
}

OmegaValue OmegaIntegrator::omega_derivative(double delta) const {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorCode::Precondition, "the second resolvent moment needs z > M(p)");
  }
  return refine(delta, 2);
}

double OmegaIntegrator::level_omega(double delta, int lv) const {
  if (!(delta >= 0.0)) throw Error(ErrorCode::BelowThreshold, "energy offset from M(p) must be >= 0");
  if (lv < 0) throw Error(ErrorCode::InvalidInput, "refinement level must be >= 0");
  std::lock_guard<std::mutex> lock(mutex_);
  return level_value(level(lv), delta, 1, nullptr, nullptr);
}

OmegaValue OmegaIntegrator::refine(double delta, int power) const {
  std::lock_guard<std::mutex> lock(mutex_);
  OmegaValue out;
  double coarse = level_value(level(0), delta, power, nullptr, nullptr);
  for (int lv = 1; lv <= spec_.max_refinements; ++lv) {
    double near = 0.0, far = 0.0;
    const double fine = level_value(level(lv), delta, power, &near, &far);
    out.value = fine;
    out.near = near;
    out.far = far;
    out.level = lv;
    out.estimated_error = std::abs(fine - coarse);
    if (out.estimated_error <= spec_.rel_tol * std::abs(fine)) return out;
    coarse = fine;
  }
  std::ostringstream os;
  os << "estimated error " << out.estimated_error << " exceeds " << spec_.rel_tol << " * |value| = "
     << spec_.rel_tol * std::abs(out.value) << " after " << spec_.max_refinements << " refinement(s)";
  throw Error(ErrorCode::QuadratureNotConverged, os.str());
}

double OmegaIntegrator::near_integrand(double r, const Vec3& nu, double delta) const {
  const Vec3 q0 = cp_.q0.vec();
  if (r == 0.0) {
    if (delta > 0.0) return 0.0;
    const double f0 = model_.phi(q0);
    return 2.0 * f0 * f0 / nu.dot(-cp_.hessian * nu);
  }
  const Vec3 disp = r * nu;
  const double f = model_.phi(q0 + disp);
  return r * r * f * f / (delta + model_.w_drop(p_.vec(), q0, disp));
}

OmegaIntegrator::NormLevels OmegaIntegrator::norm_levels(double delta, int levels) const {
  std::lock_guard<std::mutex> lock(mutex_);
  const Level& lvl = level(0);
  const Vec3 pv = p_.vec();
  const Vec3 q0 = cp_.q0.vec();
  const double rc = spec_.plateau_fraction * rho_;

  double far1 = 0.0, far2 = 0.0;
  {
    const int n = lvl.spec.grid;
    const double h = kTwoPi / n;
    const double cell = h * h * h;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const Vec3 s(-kPi + h * i, -kPi + h * j, -kPi + h * k);
          const double r = torus_displacement(cp_.q0, TorusVector(s)).norm();
          const double outer = 1.0 - partition_bump(r, rho_, spec_.plateau_fraction, spec_.bump_order);
          if (outer <= 0.0) continue;
          const double f = model_.phi(s) / (delta + cp_.M - model_.w(pv, s));
          far1 += cell * outer * std::abs(f);
          far2 += cell * outer * f * f;
        }
  }

  auto panel = [&](double a, double b, int n, bool with_bump, double& s1, double& s2) {
    const QuadratureRule rr = gauss_legendre(n, a, b);
    s1 = s2 = 0.0;
    for (std::size_t i = 0; i < rr.nodes.size(); ++i) {
      const double r = rr.nodes[i];
      const double chi = with_bump ? partition_bump(r, rho_, spec_.plateau_fraction, spec_.bump_order) : 1.0;
      const double radial = rr.weights[i] * r * r * chi;
      for (std::size_t d = 0; d < lvl.sphere.nu.size(); ++d) {
        const Vec3 disp = r * lvl.sphere.nu[d];
        const double f = model_.phi(q0 + disp) / (delta + model_.w_drop(pv, q0, disp));
        s1 += radial * lvl.sphere.weight[d] * std::abs(f);
        s2 += radial * lvl.sphere.weight[d] * f * f;
      }
    }
  };

  NormLevels out;
  double b1 = 0.0, b2 = 0.0;
  panel(rc, rho_, spec_.radial_nodes, true, b1, b2);
  double acc1 = far1 + b1, acc2 = far2 + b2;
  out.radius.push_back(rc);
  out.l1.push_back(acc1);
  out.l2.push_back(acc2);
  for (int k = 0; k < levels; ++k) {
    double s1 = 0.0, s2 = 0.0;
    panel(rc * std::ldexp(1.0, -(k + 1)), rc * std::ldexp(1.0, -k), spec_.radial_nodes, false, s1, s2);
    acc1 += s1;
    acc2 += s2;
    out.radius.push_back(rc * std::ldexp(1.0, -(k + 1)));
    out.l1.push_back(acc1);
    out.l2.push_back(acc2);
  }
  return out;
}

OmegaValue omega(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp, double z,
                 const QuadratureSpec& spec) {
  return OmegaIntegrator(model, p, cp, spec).omega(z);
}

OmegaValue omega_threshold(const DispersionModel& model, const TorusVector& p, const CriticalPointInfo& cp,
                           const QuadratureSpec& spec) {
  return OmegaIntegrator(model, p, cp, spec).omega_offset(0.0);
}

namespace {

// Mean log2 ratio of successive shell increments over the last three shells.
double growth_exponent(const std::vector<double>& cumulative) {
  std::vector<double> inc;
  for (std::size_t i = 1; i < cumulative.size(); ++i) inc.push_back(cumulative[i] - cumulative[i - 1]);
  double acc = 0.0;
  int count = 0;
  for (std::size_t i = inc.size() >= 4 ? inc.size() - 3 : 1; i < inc.size(); ++i) {
    if (inc[i - 1] > 0.0 && inc[i] > 0.0) {
      acc += std::log2(inc[i] / inc[i - 1]);
      ++count;
    } else {
      acc += -1.0;  // vanishing shells: convergent
      ++count;
    }
  }
  if (count == 0) return 0.0;
  return std::max(0.0, acc / count);
}

}  // namespace

NormDiagnostics state_norm_diagnostics(const OmegaIntegrator& integrator, double z, int levels) {
  const double M = integrator.edge();
  if (z < M - 1e-12 * std::max(1.0, std::abs(M))) {
    throw Error(ErrorCode::BelowThreshold, "state norm diagnostics need z >= M(p)");
  }
  if (levels < 4) throw Error(ErrorCode::InvalidInput, "need at least 4 shell levels");
  const auto lv = integrator.norm_levels(std::max(0.0, z - M), levels);
  NormDiagnostics out;
  out.radius = lv.radius;
  out.l1_levels = lv.l1;
  out.l2_levels = lv.l2;
  out.l1 = lv.l1.back();
  out.l2 = lv.l2.back();
  out.growth_rate = growth_exponent(lv.l2);
  out.l1_growth_rate = growth_exponent(lv.l1);
  return out;
}

NormDiagnostics state_norm_diagnostics(const DispersionModel& model, const TorusVector& p,
                                       const CriticalPointInfo& cp, double z, const QuadratureSpec& spec) {
  return state_norm_diagnostics(OmegaIntegrator(model, p, cp, spec), z);
}

}  // namespace friedrichs
