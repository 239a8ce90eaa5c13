#pragma once

// Piecewise-constant propagation. Controls are sampled at slice midpoints,
// each slice unitary is computed exactly from the spectral decomposition of
// its Hermitian generator, and the decomposition is retained so that the
// optimizer can form exact propagator derivatives and half-slice midpoint
// unitaries without re-diagonalizing.

#include <vector>

#include "qoc/drive.hpp"

namespace qoc {

struct TimeGrid {
  double T = 0.0;  // total duration, s
  int N = 0;       // number of slices
  double dt() const { return T / N; }
  double midpoint(int r) const { return (r + 0.5) * dt(); }
  void validate() const;
};

// slice count obeying dt * omega_bar <= 0.02 rad and, for stiff diagonal
// terms (blockade, crosstalk detuning), dt * stiff_freq <= 0.4 rad
int slices_for(double T, double omega_bar, double stiff_freq = 0.0);

struct SliceEig {
  Eigen::VectorXd lam;
  Mat vecs;
  // exp(-i dt H) from the stored decomposition
  Mat expm(double dt) const;
  // Loewner kernel entry for the exact derivative of exp(-i dt H):
  //   K_ab = -i dt exp(-i dt (la+lb)/2) sinc(dt (la-lb)/2)
  cxd loewner(double dt, int a, int b) const;
};

SliceEig eig_hermitian(const Mat& h);

Mat expm_hermitian(const Mat& h, double dt);

struct PropagationRecord {
  TimeGrid grid;
  Mat total;                   // U_N ... U_1
  std::vector<SliceEig> eigs;  // per slice, when requested
  std::vector<Mat> prefix;     // P_r = U_r ... U_1 with P_0 = I, when requested
};

struct PropagateOptions {
  bool keep_eigs = false;
  bool keep_prefix = false;
  // enforce a max ||H|| dt sanity bound on every slice; the spectral-path
  // exponential is exact at any step, so callers whose Hamiltonian carries a
  // large static diagonal (finite blockade) may raise the bound
  bool check_step = true;
  double max_step_rad = 0.5;
};

// u is n_controls x N, evaluated at slice midpoints
PropagationRecord propagate(const ControlModel& model, const Eigen::MatrixXd& u,
                            const TimeGrid& grid, const PropagateOptions& opt = {});

// state history under the same stepping; returns dim x (N+1), column r holding
// the state at t = r dt
Mat evolve_state(const ControlModel& model, const Eigen::MatrixXd& u, const TimeGrid& grid,
                 const Vec& psi0);

// Time average over the pulse of the decay-relevant Rydberg weight,
//   chi = 1/(d^2 T) int_0^T Tr[U(t)^dag (P_ryd + 2 P_bloc) U(t) P_comp] dt,
// evaluated by the midpoint rule on the propagation grid (the record must
// keep eigs and prefix so U at slice midpoints is available exactly).
double average_rydberg_population(const PropagationRecord& rec, const TwoAtomSpace& space);

}  // namespace qoc
