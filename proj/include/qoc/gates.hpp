#pragma once

// Elementary gates on d-level systems (generalized Paulis, Fourier-type
// Hadamard, diagonal phase gates, controlled-phase family) plus the trace
// overlap fidelity used throughout the optimizer and the benchmarks.

#include <complex>
#include <set>
#include <vector>

#include <Eigen/Dense>

namespace qoc {

using cxd = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline constexpr double pi = 3.141592653589793238462643383279502884;

// Primitive d-th root of unity, omega = exp(i 2 pi / d).
cxd root_of_unity(int d);

// Wrap an angle to the half-open interval (-pi, pi].
double wrap_angle(double a);

// Cyclic shift X|j> = |j+1 mod d>.
Mat pauli_x(int d);

// Clock operator Z|j> = omega^j |j>.
Mat pauli_z(int d);

// Discrete Fourier transform H|j> = d^{-1/2} sum_k omega^{jk} |k>.
Mat hadamard(int d);

// Diagonal single-level phase, R_k(theta)|j> = exp(i theta delta_{jk}) |j>.
Mat phase_gate(int d, int level, double theta);

// Two-qudit controlled phase, CZ|j,k> = omega^{jk} |j,k>  (d^2 x d^2, row
// index j*d + k).
Mat cz_gate(int d);

// Controlled phase on a level subset: imparts exp(i theta) exactly when both
// qudits occupy levels in `targets`. Valid target levels are 1..d-1 (level 0
// is never Rydberg-coupled, so it cannot pick up an interaction phase).
Mat cr_gate(int d, const std::set<int>& targets, double theta);

bool is_unitary(const Mat& u, double tol = 1e-10);

// Trace overlap fidelity F = |Tr(target^dag achieved)|^2 / D^2 with
// D = dim(target). Equals 1 iff achieved = exp(i phi) * target; strictly
// below 1 for any sub-unitary `achieved` (Cauchy-Schwarz), which is how
// population leaving the computational subspace is scored.
double gate_fidelity(const Mat& target, const Mat& achieved);

// Largest elementwise deviation between a and exp(i phi) b, with phi chosen
// to cancel the global phase (phi = arg Tr(b^dag a)).
double max_dev_up_to_global_phase(const Mat& a, const Mat& b);

}  // namespace qoc
