#include "qoc/zmod.hpp"

#include <cstdlib>
#include <numeric>
#include <stdexcept>

namespace qoc {

namespace {

// quotient rounded to nearest, so the remainder magnitude is at most |b|/2;
// this is what makes the reduction terminate quickly
long long nearest_div(long long a, long long b) {
  long long q = a / b;
  const long long r = a - q * b;
  if (2 * std::llabs(r) > std::llabs(b)) q += ((r > 0) == (b > 0)) ? 1 : -1;
  return q;
}

long long pos_mod(long long a, long long m) {
  const long long r = a % m;
  return r < 0 ? r + m : r;
}

// modular inverse of a (mod m) for gcd(a, m) = 1, via extended Euclid
long long mod_inverse(long long a, long long m) {
  long long old_r = pos_mod(a, m), r = m;
  long long old_s = 1, s = 0;
  while (r != 0) {
    const long long q = old_r / r;
    long long tmp = old_r - q * r;
    old_r = r;
    r = tmp;
    tmp = old_s - q * s;
    old_s = s;
    s = tmp;
  }
  if (old_r != 1) throw std::logic_error("mod_inverse: arguments not coprime");
  return pos_mod(old_s, m);
}

void guard(const IntMat& m) {
  // the phase systems here are tiny; treat large intermediates as a bug
  if (m.cwiseAbs().maxCoeff() > (1ll << 56))
    throw std::overflow_error("smith_normal_form: entries grew too large");
}

}  // namespace

SmithForm smith_normal_form(IntMat A) {
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());
  SmithForm s;
  s.U = IntMat::Identity(m, m);
  s.V = IntMat::Identity(n, n);
  s.D = std::move(A);

  int t = 0;
  while (t < m && t < n) {
    // bring a minimal-magnitude nonzero entry of the trailing block to (t, t)
    int pi = -1, pj = -1;
    long long best = 0;
    for (int i = t; i < m; ++i)
      for (int j = t; j < n; ++j) {
        const long long v = std::llabs(s.D(i, j));
        if (v != 0 && (pi < 0 || v < best)) {
          best = v;
          pi = i;
          pj = j;
        }
      }
    if (pi < 0) break;  // trailing block is zero
    if (pi != t) {
      s.D.row(t).swap(s.D.row(pi));
      s.U.row(t).swap(s.U.row(pi));
    }
    if (pj != t) {
      s.D.col(t).swap(s.D.col(pj));
      s.V.col(t).swap(s.V.col(pj));
    }

    // clear the pivot's column and row; a nonzero remainder becomes the new,
    // strictly smaller pivot
    for (;;) {
      int i_nz = -1;
      for (int i = t + 1; i < m; ++i)
        if (s.D(i, t) != 0) {
          i_nz = i;
          break;
        }
      if (i_nz >= 0) {
        const long long q = nearest_div(s.D(i_nz, t), s.D(t, t));
        if (q != 0) {
          s.D.row(i_nz) -= q * s.D.row(t);
          s.U.row(i_nz) -= q * s.U.row(t);
        }
        if (s.D(i_nz, t) != 0) {
          s.D.row(t).swap(s.D.row(i_nz));
          s.U.row(t).swap(s.U.row(i_nz));
        }
        continue;
      }
      int j_nz = -1;
      for (int j = t + 1; j < n; ++j)
        if (s.D(t, j) != 0) {
          j_nz = j;
          break;
        }
      if (j_nz >= 0) {
        const long long q = nearest_div(s.D(t, j_nz), s.D(t, t));
        if (q != 0) {
          s.D.col(j_nz) -= q * s.D.col(t);
          s.V.col(j_nz) -= q * s.V.col(t);
        }
        if (s.D(t, j_nz) != 0) {
          s.D.col(t).swap(s.D.col(j_nz));
          s.V.col(t).swap(s.V.col(j_nz));
        }
        continue;
      }
      break;
    }

    // divisibility of the trailing block by the pivot; folding an offending
    // row into row t and re-eliminating shrinks the pivot
    bool redo = false;
    for (int i = t + 1; i < m && !redo; ++i)
      for (int j = t + 1; j < n && !redo; ++j)
        if (s.D(i, j) % s.D(t, t) != 0) {
          s.D.row(t) += s.D.row(i);
          s.U.row(t) += s.U.row(i);
          redo = true;
        }
    guard(s.D);
    guard(s.U);
    guard(s.V);
    if (redo) continue;

    if (s.D(t, t) < 0) {
      s.D.row(t) = -s.D.row(t);
      s.U.row(t) = -s.U.row(t);
    }
    ++t;
  }
  s.rank = t;
  return s;
}

ModSolution solve_mod(const IntMat& A, const IntVec& c, long long L) {
  if (L <= 0) throw std::invalid_argument("solve_mod: modulus must be positive");
  if (A.rows() != c.size())
    throw std::invalid_argument("solve_mod: right-hand side size mismatch");
  const SmithForm s = smith_normal_form(A);
  const IntVec rhs = s.U * c;
  const int m = static_cast<int>(A.rows());
  const int n = static_cast<int>(A.cols());

  ModSolution out;
  IntVec y = IntVec::Zero(n);
  for (int i = 0; i < m; ++i) {
    if (i < s.rank) {
      const long long di = s.D(i, i);
      const long long g = std::gcd(di, L);
      if (pos_mod(rhs[i], g) != 0) {
        out.certificate = (L / g) * s.U.row(i).transpose();
        return out;
      }
      // d_i y == rhs (mod L) reduces to a coprime inverse mod L/g
      const long long lg = L / g;
      y[i] = lg == 1 ? 0
                     : pos_mod((rhs[i] / g) % lg * mod_inverse(di / g, lg), lg);
    } else if (pos_mod(rhs[i], L) != 0) {
      out.certificate = s.U.row(i).transpose();
      return out;
    }
  }
  out.feasible = true;
  out.x = (s.V * y).unaryExpr([L](long long v) { return pos_mod(v, L); });
  return out;
}

std::vector<IntVec> left_kernel(const IntMat& A) {
  const SmithForm s = smith_normal_form(A);
  std::vector<IntVec> basis;
  for (int i = s.rank; i < s.U.rows(); ++i)
    basis.push_back(s.U.row(i).transpose());
  return basis;
}

bool real_mod_feasible(const IntMat& A, const IntVec& c, long long L,
                       IntVec* certificate) {
  if (L <= 0)
    throw std::invalid_argument("real_mod_feasible: modulus must be positive");
  for (const IntVec& u : left_kernel(A)) {
    if (pos_mod(u.dot(c), L) != 0) {
      if (certificate) *certificate = u;
      return false;
    }
  }
  return true;
}

}  // namespace qoc
