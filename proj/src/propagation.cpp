#include "qoc/propagation.hpp"

#include <cmath>
#include <stdexcept>

namespace qoc {

void TimeGrid::validate() const {
  if (!(T > 0.0) || N < 1) throw std::invalid_argument("TimeGrid: need T > 0 and N >= 1");
}

int slices_for(double T, double omega_bar, double stiff_freq) {
  int n = int(std::ceil(T * omega_bar / 0.02));
  if (stiff_freq > 0.0) n = std::max(n, int(std::ceil(T * stiff_freq / 0.4)));
  return std::max(n, 1);
}

Mat SliceEig::expm(double dt) const {
  const int n = int(lam.size());
  Mat phases = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) phases(i, i) = std::polar(1.0, -dt * lam[i]);
  return vecs * phases * vecs.adjoint();
}

cxd SliceEig::loewner(double dt, int a, int b) const {
  const double mean = 0.5 * (lam[a] + lam[b]);
  const double x = 0.5 * dt * (lam[a] - lam[b]);
  const double sinc = std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
  return cxd(0.0, -dt) * std::polar(1.0, -dt * mean) * sinc;
}

SliceEig eig_hermitian(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eig_hermitian: eigensolver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

Mat expm_hermitian(const Mat& h, double dt) { return eig_hermitian(h).expm(dt); }

PropagationRecord propagate(const ControlModel& model, const Eigen::MatrixXd& u,
                            const TimeGrid& grid, const PropagateOptions& opt) {
  grid.validate();
  if (u.rows() != model.n_controls() || u.cols() != grid.N)
    throw std::invalid_argument("propagate: controls must be n_controls x N");
  const double dt = grid.dt();
  PropagationRecord rec;
  rec.grid = grid;
  rec.total = Mat::Identity(model.dim, model.dim);
  if (opt.keep_eigs) rec.eigs.reserve(grid.N);
  if (opt.keep_prefix) {
    rec.prefix.reserve(grid.N + 1);
    rec.prefix.push_back(rec.total);
  }
  for (int r = 0; r < grid.N; ++r) {
    const Mat h = model.hamiltonian(u.col(r), grid.midpoint(r));
    SliceEig eig = eig_hermitian(h);
    if (opt.check_step) {
      const double spread = eig.lam.cwiseAbs().maxCoeff();
      if (spread * dt >= opt.max_step_rad)
        throw std::invalid_argument("propagate: ||H|| dt exceeds the step bound, refine the grid");
    }
    rec.total = eig.expm(dt) * rec.total;
    if (opt.keep_prefix) rec.prefix.push_back(rec.total);
    if (opt.keep_eigs) rec.eigs.push_back(std::move(eig));
  }
  return rec;
}

Mat evolve_state(const ControlModel& model, const Eigen::MatrixXd& u, const TimeGrid& grid,
                 const Vec& psi0) {
  grid.validate();
  if (psi0.size() != model.dim) throw std::invalid_argument("evolve_state: state dimension");
  if (u.rows() != model.n_controls() || u.cols() != grid.N)
    throw std::invalid_argument("evolve_state: controls must be n_controls x N");
  const double dt = grid.dt();
  Mat traj(model.dim, grid.N + 1);
  Vec psi = psi0;
  traj.col(0) = psi;
  for (int r = 0; r < grid.N; ++r) {
    const Mat h = model.hamiltonian(u.col(r), grid.midpoint(r));
    psi = expm_hermitian(h, dt) * psi;
    traj.col(r + 1) = psi;
  }
  return traj;
}

double average_rydberg_population(const PropagationRecord& rec, const TwoAtomSpace& space) {
  if (int(rec.eigs.size()) != rec.grid.N || int(rec.prefix.size()) != rec.grid.N + 1)
    throw std::invalid_argument(
        "average_rydberg_population: record must keep eigs and prefix");
  const double dt = rec.grid.dt();
  const auto& comp = space.comp_indices();
  const int d2 = int(comp.size());
  double acc = 0.0;
  for (int r = 0; r < rec.grid.N; ++r) {
    // exact propagator at the slice midpoint: half step on top of P_{r-1}
    const Mat u_mid = rec.eigs[r].expm(0.5 * dt) * rec.prefix[r];
    double g = 0.0;
    for (int i = 0; i < space.dim(); ++i) {
      const int w = space.ryd_count(i);
      if (w == 0) continue;
      for (int c = 0; c < d2; ++c) g += w * std::norm(u_mid(i, comp[c]));
    }
    acc += g * dt;
  }
  return acc / (double(d2) * rec.grid.T);
}

}  // namespace qoc
