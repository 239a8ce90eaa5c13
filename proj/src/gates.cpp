#include "qoc/gates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qoc {

cxd root_of_unity(int d) {
  if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2");
  return std::polar(1.0, 2.0 * pi / d);
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * pi);  // lands in [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

static void check_dim(int d) {
  if (d < 2) throw std::invalid_argument("qudit dimension must be >= 2");
}

Mat pauli_x(int d) {
  check_dim(d);
  Mat x = Mat::Zero(d, d);
  for (int j = 0; j < d; ++j) x((j + 1) % d, j) = 1.0;
  return x;
}

Mat pauli_z(int d) {
  check_dim(d);
  Mat z = Mat::Zero(d, d);
  for (int j = 0; j < d; ++j) z(j, j) = std::polar(1.0, 2.0 * pi * j / d);
  return z;
}

Mat hadamard(int d) {
  check_dim(d);
  Mat h(d, d);
  const double s = 1.0 / std::sqrt(double(d));
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      // column j maps |j> to sum_k omega^{jk}|k>, so the (k, j) entry
      h(k, j) = s * std::polar(1.0, 2.0 * pi * double(j) * double(k) / d);
  return h;
}

Mat phase_gate(int d, int level, double theta) {
  check_dim(d);
  if (level < 0 || level >= d)
    throw std::invalid_argument("phase_gate: level out of range");
  Mat r = Mat::Identity(d, d);
  r(level, level) = std::polar(1.0, theta);
  return r;
}

Mat cz_gate(int d) {
  check_dim(d);
  Mat u = Mat::Zero(d * d, d * d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      u(j * d + k, j * d + k) = std::polar(1.0, 2.0 * pi * double(j) * double(k) / d);
  return u;
}

Mat cr_gate(int d, const std::set<int>& targets, double theta) {
  check_dim(d);
  if (targets.empty()) throw std::invalid_argument("cr_gate: empty target set");
  for (int t : targets)
    if (t < 1 || t >= d)
      throw std::invalid_argument("cr_gate: target level " + std::to_string(t) +
                                  " outside 1..d-1");
  Mat u = Mat::Identity(d * d, d * d);
  const cxd ph = std::polar(1.0, theta);
  for (int j : targets)
    for (int k : targets) u(j * d + k, j * d + k) = ph;
  return u;
}

bool is_unitary(const Mat& u, double tol) {
  if (u.rows() != u.cols()) return false;
  Mat g = u.adjoint() * u;
  return (g - Mat::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff() < tol;
}

double gate_fidelity(const Mat& target, const Mat& achieved) {
  if (target.rows() != achieved.rows() || target.cols() != achieved.cols() ||
      target.rows() != target.cols())
    throw std::invalid_argument("gate_fidelity: dimension mismatch");
  const double dim = double(target.rows());
  const cxd tr = (target.adjoint() * achieved).trace();
  return std::norm(tr) / (dim * dim);
}

double max_dev_up_to_global_phase(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("max_dev_up_to_global_phase: dimension mismatch");
  const cxd tr = (b.adjoint() * a).trace();
  const cxd ph = std::abs(tr) > 0 ? tr / std::abs(tr) : cxd(1.0, 0.0);
  return (a - ph * b).cwiseAbs().maxCoeff();
}

}  // namespace qoc
