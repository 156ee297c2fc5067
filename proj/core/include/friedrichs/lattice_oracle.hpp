#pragma once

#include <optional>
#include <ostream>
#include <vector>

#include "friedrichs/model.hpp"
#include "friedrichs/torus.hpp"

namespace friedrichs {

// Finite-lattice version of H_mu(p): the N^3 momentum grid
// q_j = -pi + 2 pi (j + offset) / N, D = diag(w_p(q_j)), v_j = phi(q_j),
// H_N = D + mu h^3 v v^T with h = 2 pi / N.
struct LatticeGrid {
  int N = 16;
  double offset = 0.5;  // 0.5: midpoint grid, 0: vertex grid
};

struct OracleResult {
  int N = 0;
  std::optional<double> secular_root;
  double max_diag = 0.0;
  double min_diag = 0.0;
  // Dense mode only.
  std::optional<double> min_eig;
  std::optional<double> max_eig;
  int above_max_diag = 0;          // eigenvalues strictly above max_diag
  std::vector<double> lowest;      // a few extremal eigenvalues, ascending
  std::vector<double> highest;
};

// Root z > max_j w_p(q_j) of 1 = mu h^3 sum_j phi_j^2 / (z - w_j), or none
// when the left side stays below 1 as z -> max_j w_j (only possible if phi
// vanishes at every node attaining the maximum).
OracleResult secular_root(const DispersionModel& model, const TorusVector& p, double mu, const LatticeGrid& grid);
OracleResult secular_root(const DispersionModel& model, const TorusVector& p, double mu, int N);

// h^3 sum_j phi_j^2 / (z - w_j); z must exceed max_diag.
double discrete_omega(const DispersionModel& model, const TorusVector& p, double z, const LatticeGrid& grid);

// Richardson extrapolation 2 S(2N) - S(N) of the discrete threshold sum at
// z = M(p) (midpoint grids never hit q0 for the builtin family at p = 0).
struct ThresholdSum {
  double coarse = 0.0;
  double fine = 0.0;
  double extrapolated = 0.0;
};
ThresholdSum richardson_threshold_sum(const DispersionModel& model, const TorusVector& p, double M, int N);

// Full symmetric eigendecomposition for N <= 12; throws SizeError beyond.
OracleResult dense_spectrum(const DispersionModel& model, const TorusVector& p, double mu, int N,
                            double offset = 0.5);

struct ConvergenceRow {
  int N = 0;
  std::optional<double> root;
  double abs_dev = 0.0;
  double rel_dev = 0.0;
};

struct ConvergenceReport {
  double continuum_E = 0.0;
  std::vector<ConvergenceRow> rows;
  // Deviations shrink from the first to the last N and never grow by more
  // than `slack` between neighbours.
  bool decreasing_in_trend(double slack = 1.5) const;
};

ConvergenceReport convergence_report(const DispersionModel& model, const TorusVector& p, double mu,
                                     const std::vector<int>& Ns, double continuum_E);

// CSV with columns N,root,abs_dev,rel_dev.
void write_csv(std::ostream& os, const ConvergenceReport& report);

}  // namespace friedrichs
