#include "friedrichs/lattice_oracle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>

#include "friedrichs/error.hpp"

namespace friedrichs {
namespace {

struct Samples {
  std::vector<double> w;
  std::vector<double> phi2;
  double cell = 0.0;
  double max_w = -std::numeric_limits<double>::infinity();
  double min_w = std::numeric_limits<double>::infinity();
};

void check_grid(const LatticeGrid& g) {
  if (g.N < 2) throw Error(ErrorCode::InvalidInput, "lattice grid needs N >= 2");
  if (!std::isfinite(g.offset)) throw Error(ErrorCode::InvalidInput, "grid offset must be finite");
}

Samples sample(const DispersionModel& model, const TorusVector& p, const LatticeGrid& g, bool keep_phi_sign,
               std::vector<double>* phi_out = nullptr) {
  check_grid(g);
  Samples s;
  const int n = g.N;
  const double h = kTwoPi / n;
  s.cell = h * h * h;
  const std::size_t total = static_cast<std::size_t>(n) * n * n;
  s.w.reserve(total);
  s.phi2.reserve(total);
  if (phi_out) phi_out->reserve(total);
  const Vec3 pv = p.vec();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const Vec3 q(-kPi + h * (i + g.offset), -kPi + h * (j + g.offset), -kPi + h * (k + g.offset));
        const double w = model.w(pv, q);
        const double f = model.phi(q);
        s.w.push_back(w);
        s.phi2.push_back(f * f);
        if (keep_phi_sign && phi_out) phi_out->push_back(f);
        s.max_w = std::max(s.max_w, w);
        s.min_w = std::min(s.min_w, w);
      }
    }
  }
  return s;
}

// g(t) = mu h^3 sum phi^2 / (t + max - w) - 1, decreasing in t > 0.
double secular(const Samples& s, double mu, double t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.w.size(); ++i) acc += s.phi2[i] / (t + (s.max_w - s.w[i]));
  return mu * s.cell * acc - 1.0;
}

}  // namespace

OracleResult secular_root(const DispersionModel& model, const TorusVector& p, double mu, const LatticeGrid& grid) {
  if (!(mu > 0.0)) throw Error(ErrorCode::InvalidInput, "coupling mu must be positive");
  const Samples s = sample(model, p, grid, false);
  OracleResult out;
  out.N = grid.N;
  out.max_diag = s.max_w;
  out.min_diag = s.min_w;

  // A node at the maximum with phi != 0 sends g to +infinity as t -> 0.
  const double tie = 1e-14 * std::max(1.0, std::abs(s.max_w));
  double total = 0.0, limit = 0.0;
  bool pole = false;
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    total += s.phi2[i];
    const double d = s.max_w - s.w[i];
    if (d <= tie) {
      pole = pole || s.phi2[i] > 0.0;
    } else {
      limit += s.phi2[i] / d;
    }
  }
  if (!pole && mu * s.cell * limit <= 1.0) return out;

  // g(t) <= mu h^3 sum phi^2 / t - 1, so the root is at most mu h^3 sum phi^2.
  double hi = mu * s.cell * total;
  double lo = 0.0;
  for (int i = 0; i < 2000 && secular(s, mu, hi) > 0.0; ++i) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (secular(s, mu, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  out.secular_root = s.max_w + 0.5 * (lo + hi);
  return out;
}

OracleResult secular_root(const DispersionModel& model, const TorusVector& p, double mu, int N) {
  return secular_root(model, p, mu, LatticeGrid{N, 0.5});
}

double discrete_omega(const DispersionModel& model, const TorusVector& p, double z, const LatticeGrid& grid) {
  const Samples s = sample(model, p, grid, false);
  if (!(z > s.max_w)) throw Error(ErrorCode::BelowThreshold, "discrete Omega needs z above every grid value of w");
  double acc = 0.0;
  for (std::size_t i = 0; i < s.w.size(); ++i) acc += s.phi2[i] / (z - s.w[i]);
  return s.cell * acc;
}

ThresholdSum richardson_threshold_sum(const DispersionModel& model, const TorusVector& p, double M, int N) {
  auto sum = [&](int n) {
    const Samples s = sample(model, p, LatticeGrid{n, 0.5}, false);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.w.size(); ++i) {
      const double d = M - s.w[i];
      if (!(d > 0.0)) throw Error(ErrorCode::Precondition, "a grid node sits on the maximizer");
      acc += s.phi2[i] / d;
    }
    return s.cell * acc;
  };
  ThresholdSum t;
  t.coarse = sum(N);
  t.fine = sum(2 * N);
  t.extrapolated = 2.0 * t.fine - t.coarse;
  return t;
}

OracleResult dense_spectrum(const DispersionModel& model, const TorusVector& p, double mu, int N, double offset) {
  if (N > 12) throw Error(ErrorCode::SizeError, "dense spectrum is limited to N <= 12");
  if (!(mu >= 0.0)) throw Error(ErrorCode::InvalidInput, "coupling mu must be non-negative");
  std::vector<double> phi;
  const Samples s = sample(model, p, LatticeGrid{N, offset}, true, &phi);
  const Eigen::Index n = static_cast<Eigen::Index>(s.w.size());
  const Eigen::Map<const Eigen::VectorXd> v(phi.data(), n);
  Eigen::MatrixXd H = mu * s.cell * (v * v.transpose());
  H.diagonal() += Eigen::Map<const Eigen::VectorXd>(s.w.data(), n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "dense eigensolver failed");
  const Eigen::VectorXd& ev = es.eigenvalues();

  OracleResult out;
  out.N = N;
  out.max_diag = s.max_w;
  out.min_diag = s.min_w;
  out.min_eig = ev(0);
  out.max_eig = ev(n - 1);
  const double tol = 1e-9 * std::max(1.0, std::abs(s.max_w));
  for (Eigen::Index i = 0; i < n; ++i) {
    if (ev(i) > s.max_w + tol) ++out.above_max_diag;
  }
  const Eigen::Index keep = std::min<Eigen::Index>(5, n);
  for (Eigen::Index i = 0; i < keep; ++i) {
    out.lowest.push_back(ev(i));
    out.highest.push_back(ev(n - keep + i));
  }
  if (out.above_max_diag == 1) out.secular_root = ev(n - 1);
  return out;
}

bool ConvergenceReport::decreasing_in_trend(double slack) const {
  if (rows.size() < 2) return true;
  for (const auto& r : rows) {
    if (!r.root) return false;
  }
  if (!(rows.back().abs_dev < rows.front().abs_dev)) return false;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].abs_dev > slack * rows[i - 1].abs_dev) return false;
  }
  return true;
}

ConvergenceReport convergence_report(const DispersionModel& model, const TorusVector& p, double mu,
                                     const std::vector<int>& Ns, double continuum_E) {
  ConvergenceReport rep;
  rep.continuum_E = continuum_E;
  for (int n : Ns) {
    ConvergenceRow row;
    row.N = n;
    row.root = secular_root(model, p, mu, n).secular_root;
    if (row.root) {
      row.abs_dev = std::abs(*row.root - continuum_E);
      row.rel_dev = row.abs_dev / std::abs(continuum_E);
    } else {
      row.abs_dev = row.rel_dev = std::numeric_limits<double>::infinity();
    }
    rep.rows.push_back(row);
  }
  return rep;
}

void write_csv(std::ostream& os, const ConvergenceReport& report) {
  const auto flags = os.flags();
  const auto prec = os.precision();
  os << "N,root,abs_dev,rel_dev\n" << std::setprecision(17);
  for (const auto& r : report.rows) {
    os << r.N << ',';
    if (r.root) os << *r.root;
    os << ',' << r.abs_dev << ',' << r.rel_dev << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace friedrichs
