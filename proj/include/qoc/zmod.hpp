#pragma once

// Exact integer linear algebra for phase bookkeeping. Controlled-phase
// compilation reduces to linear systems over the angles, which all live on
// the grid pi/d; in those units every system is integer and solvable (or
// refutable) exactly via the Smith normal form, with no floating-point
// tolerance anywhere.

#include <Eigen/Dense>
#include <vector>

namespace qoc {

using IntMat = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;
using IntVec = Eigen::Matrix<long long, Eigen::Dynamic, 1>;

// U * A * V = D with U, V unimodular and D diagonal, each diagonal entry
// dividing the next; rank = number of nonzero diagonal entries
struct SmithForm {
  IntMat U, D, V;
  int rank = 0;
};
SmithForm smith_normal_form(IntMat A);

// integer solutions of A x == c (mod L)
struct ModSolution {
  bool feasible = false;
  IntVec x;            // one solution with entries in [0, L)
  IntVec certificate;  // on infeasibility: u with u^T A == 0 (mod L) but
                       // u^T c != 0 (mod L)
};
ModSolution solve_mod(const IntMat& A, const IntVec& c, long long L);

// integer basis of the left kernel {u : u^T A = 0}
std::vector<IntVec> left_kernel(const IntMat& A);

// feasibility of A x == c (mod L) with x real-valued: c is reachable exactly
// when every integer left-kernel vector pairs with it to 0 mod L
bool real_mod_feasible(const IntMat& A, const IntVec& c, long long L,
                       IntVec* certificate = nullptr);

}  // namespace qoc
