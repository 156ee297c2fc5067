#include "friedrichs/critical_point.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "friedrichs/error.hpp"

namespace friedrichs {
namespace {

struct GridSample {
  Vec3 q;
  double value;
};

struct Polished {
  Vec3 q;
  double value;
  int iterations;
};

// Values of sign * w_p on a vertex grid and the indices of its local maxima.
struct GridScan {
  int n = 0;
  std::vector<double> values;
  std::vector<GridSample> local_maxima;  // sorted by value, descending
};

Vec3 grid_point(int n, int i, int j, int k) {
  const double h = kTwoPi / n;
  return {-kPi + h * (i + 1), -kPi + h * (j + 1), -kPi + h * (k + 1)};
}

GridScan scan(const DispersionModel& model, const Vec3& p, double sign, int n) {
  GridScan s;
  s.n = n;
  s.values.resize(static_cast<std::size_t>(n) * n * n);
  auto idx = [n](int i, int j, int k) {
    auto wrap = [n](int a) { return (a % n + n) % n; };
    return (static_cast<std::size_t>(wrap(i)) * n + wrap(j)) * n + wrap(k);
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) s.values[idx(i, j, k)] = sign * model.w(p, grid_point(n, i, j, k));

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double v = s.values[idx(i, j, k)];
        bool is_max = true;
        for (int di = -1; di <= 1 && is_max; ++di)
          for (int dj = -1; dj <= 1 && is_max; ++dj)
            for (int dk = -1; dk <= 1 && is_max; ++dk) {
              if (di == 0 && dj == 0 && dk == 0) continue;
              if (s.values[idx(i + di, j + dj, k + dk)] > v) is_max = false;
            }
        if (is_max) s.local_maxima.push_back({grid_point(n, i, j, k), v});
      }
    }
  }
  std::stable_sort(s.local_maxima.begin(), s.local_maxima.end(),
                   [](const GridSample& a, const GridSample& b) { return a.value > b.value; });
  return s;
}

double coefficient_scale(const DispersionModel& model) {
  if (model.family() == Family::TwoParticle) {
    const auto& c = model.config().hopping;
    return 4.0 * (c[0] + c[1] + c[2]);
  }
  double s = 0.0;
  for (const auto& t : model.w_terms()) s += std::abs(t.value);
  return s;
}

// Newton ascent on sign * w_p with the Hessian's eigenvalues forced negative
// and a backtracking guard; steps are wrapped back onto the torus.
Polished polish(const DispersionModel& model, const Vec3& p, double sign, Vec3 q,
                const CriticalSearchOptions& opt, double scale) {
  const double gtol = opt.gradient_tol * std::max(1.0, scale);
  const double floor = 1e-10 * std::max(1.0, scale);
  auto f = [&](const Vec3& x) { return sign * model.w(p, x); };
  for (int it = 0; it <= opt.max_newton_iterations; ++it) {
    const Vec3 g = sign * model.grad_w(p, q);
    if (g.norm() <= gtol) return {TorusVector(q).vec(), f(q), it};
    if (it == opt.max_newton_iterations) break;
    const Mat3 h = sign * model.hess_w(p, q);
    Eigen::SelfAdjointEigenSolver<Mat3> es(h);
    Vec3 lam = es.eigenvalues();
    for (int i = 0; i < 3; ++i) lam[i] = -std::max(std::abs(lam[i]), floor);
    const Mat3& v = es.eigenvectors();
    const Vec3 step = -(v * (v.transpose() * g).cwiseQuotient(lam));
    const double f0 = f(q);
    double t = 1.0;
    Vec3 trial = q + step;
    while (f(trial) < f0 - 1e-15 * std::max(1.0, std::abs(f0)) && t > 1e-10) {
      t *= 0.5;
      trial = q + t * step;
    }
    q = TorusVector(trial).vec();
  }
  std::ostringstream os;
  os << "Newton polish exceeded " << opt.max_newton_iterations << " iterations";
  throw Error(ErrorCode::NoConvergence, os.str());
}

double minimum_value(const DispersionModel& model, const Vec3& p, const CriticalSearchOptions& opt) {
  const GridScan s = scan(model, p, -1.0, opt.grid);
  const double scale = coefficient_scale(model);
  double best = -std::numeric_limits<double>::infinity();
  const int count = std::min<int>(opt.max_candidates, static_cast<int>(s.local_maxima.size()));
  for (int c = 0; c < count; ++c) {
    try {
      best = std::max(best, polish(model, p, -1.0, s.local_maxima[static_cast<std::size_t>(c)].q, opt, scale).value);
    } catch (const Error&) {
      // Degenerate minima may not polish to tolerance; the grid value still bounds m.
      best = std::max(best, s.local_maxima[static_cast<std::size_t>(c)].value);
    }
  }
  return -best;
}

}  // namespace

CriticalPointInfo find_maximizer(const DispersionModel& model, const TorusVector& p,
                                 std::optional<TorusVector> seed, const CriticalSearchOptions& opt) {
  if (opt.grid < 4) throw Error(ErrorCode::InvalidInput, "critical-point grid must be >= 4");
  const Vec3 pv = p.vec();
  const double scale = coefficient_scale(model);
  const GridScan s = scan(model, pv, 1.0, opt.grid);

  std::vector<Polished> polished;
  const int count = std::min<int>(opt.max_candidates, static_cast<int>(s.local_maxima.size()));
  for (int c = 0; c < count; ++c) {
    polished.push_back(polish(model, pv, 1.0, s.local_maxima[static_cast<std::size_t>(c)].q, opt, scale));
  }
  if (seed) polished.push_back(polish(model, pv, 1.0, seed->vec(), opt, scale));
  if (polished.empty()) throw Error(ErrorCode::Internal, "grid scan produced no candidate");

  const auto best_it = std::max_element(polished.begin(), polished.end(),
                                        [](const Polished& a, const Polished& b) { return a.value < b.value; });
  const Polished best = *best_it;

  CriticalPointInfo info;
  info.q0 = TorusVector(best.q);
  info.M = best.value;
  info.m = minimum_value(model, pv, opt);
  info.newton_iterations = best.iterations;
  info.gradient = model.grad_w(pv, info.q0.vec());
  info.hessian = model.hess_w(pv, info.q0.vec());
  Eigen::SelfAdjointEigenSolver<Mat3> es(info.hessian, Eigen::EigenvaluesOnly);
  info.hessian_eigenvalues = es.eigenvalues();
  info.det_neg_hessian = (-info.hessian).determinant();

  const double range = info.M - info.m;
  const bool flat = !(range > 1e-12 * std::max(1.0, std::abs(info.M)));
  info.nondegenerate = !flat && info.hessian_eigenvalues[2] <= -opt.nondegeneracy_rel * range;
  if (!info.nondegenerate) {
    if (opt.throw_on_degenerate) {
      std::ostringstream os;
      os << "Hessian at q0 = " << info.q0 << " is not negative definite (largest eigenvalue "
         << info.hessian_eigenvalues[2] << ", M - m = " << range << ")";
      throw Error(ErrorCode::DegenerateMaximum, os.str());
    }
    return info;
  }

  const double gap = opt.uniqueness_rel * range;
  const double separation = 1e-6;
  for (const auto& cand : polished) {
    const double dist = torus_distance(info.q0, TorusVector(cand.q));
    if (dist <= separation) continue;
    if (info.M - cand.value < gap) {
      std::ostringstream os;
      os << "maxima at " << info.q0 << " and " << TorusVector(cand.q) << " agree within " << gap;
      throw Error(ErrorCode::NonUniqueMaximum, os.str());
    }
  }
  for (const auto& lm : s.local_maxima) {
    const double dist = torus_distance(info.q0, TorusVector(lm.q));
    // The grid cell(s) adjacent to q0 belong to its own basin.
    if (dist > 2.0 * kTwoPi / opt.grid) info.other_maximum_distance = std::min(info.other_maximum_distance, dist);
  }
  return info;
}

double find_minimum(const DispersionModel& model, const TorusVector& p, const CriticalSearchOptions& opt) {
  return minimum_value(model, p.vec(), opt);
}

TorusVector two_particle_maximizer(const std::array<double, 3>&, const TorusVector& p) {
  return TorusVector(0.5 * p[0] + kPi, 0.5 * p[1] + kPi, 0.5 * p[2] + kPi);
}

double two_particle_edge(const std::array<double, 3>& c, const TorusVector& p) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) acc += c[static_cast<std::size_t>(i)] * (2.0 + 2.0 * std::cos(0.5 * p[i]));
  return acc;
}

double two_particle_floor(const std::array<double, 3>& c, const TorusVector& p) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) acc += c[static_cast<std::size_t>(i)] * (2.0 - 2.0 * std::cos(0.5 * p[i]));
  return acc;
}

ClosedFormComparison closed_form_check(const DispersionModel& model, const TorusVector& p) {
  if (model.family() != Family::TwoParticle) {
    throw Error(ErrorCode::FamilyMismatch, "closed form exists only for the two_particle family");
  }
  const CriticalPointInfo cp = find_maximizer(model, p);
  ClosedFormComparison out;
  out.q0_numeric = cp.q0;
  out.M_numeric = cp.M;
  out.q0_closed = two_particle_maximizer(model.config().hopping, p);
  out.M_closed = two_particle_edge(model.config().hopping, p);
  out.q0_error = torus_distance(out.q0_numeric, out.q0_closed);
  out.M_error = std::abs(out.M_numeric - out.M_closed);
  return out;
}

}  // namespace friedrichs
