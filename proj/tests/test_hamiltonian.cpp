#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "qoc/drive.hpp"
#include "qoc/propagation.hpp"
#include "qoc/scheme.hpp"

using namespace qoc;

namespace {
double mdev(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }
const double MHz = 2.0 * pi * 1e6;
}  // namespace

TEST_CASE("level scheme validation") {
  CHECK_NOTHROW(LevelScheme::single(3, 2));
  CHECK_THROWS(LevelScheme::single(3, 0));   // level 0 is never Rydberg-coupled
  CHECK_THROWS(LevelScheme::single(3, 3));
  CHECK_THROWS((LevelScheme{3, {1, 1}}.validate()));
  CHECK(LevelScheme::two_rydberg(3).n_ryd() == 2);
  CHECK(LevelScheme::two_rydberg(2).n_ryd() == 1);
  CHECK(LevelScheme::full_ladder(5).n_ryd() == 4);
}

TEST_CASE("two-atom basis bookkeeping and blockade reduction") {
  const auto scheme = LevelScheme::two_rydberg(3);  // atom dim 5
  TwoAtomSpace full(scheme, false), red(scheme, true);
  CHECK(full.dim() == 25);
  CHECK(red.dim() == 21);  // four doubly-Rydberg pair states removed
  CHECK(full.comp_indices().size() == 9);
  CHECK(red.comp_indices().size() == 9);
  CHECK(red.index_of(3, 4) == -1);
  CHECK(red.index_of(3, 0) >= 0);

  // projector ranks partition the space
  CHECK(full.projector_comp().trace().real() == doctest::Approx(9.0));
  CHECK(full.projector_ryd().trace().real() == doctest::Approx(12.0));
  CHECK(full.projector_bloc().trace().real() == doctest::Approx(4.0));
  CHECK(red.projector_bloc().cwiseAbs().maxCoeff() == 0.0);

  // computational block extraction respects the j*d+k ordering
  Mat big = Mat::Zero(full.dim(), full.dim());
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k)
      big(full.index_of(j, k), full.index_of(j, k)) = cxd(j * 3 + k, 0.0);
  const Mat blk = full.project_to_comp(big);
  for (int i = 0; i < 9; ++i) CHECK(std::abs(blk(i, i) - cxd(i, 0)) < 1e-15);

  const Mat s = full.swap_op();
  CHECK(mdev(s * s, Mat::Identity(25, 25)) < 1e-15);
}

TEST_CASE("single-atom Hamiltonian from complex Rabi amplitudes") {
  const std::vector<DriveTone> tone = {{0, 1, 0.0}};
  SUBCASE("real amplitude gives the sigma_x quadrature") {
    const Mat h = single_atom_hamiltonian(2, tone, {cxd(2.0 * MHz, 0.0)});
    CHECK(std::abs(h(0, 1) - cxd(1.0 * MHz, 0.0)) < 1e-6);
    CHECK(std::abs(h(1, 0) - cxd(1.0 * MHz, 0.0)) < 1e-6);
    CHECK(std::abs(h(0, 0)) == 0.0);
  }
  SUBCASE("imaginary amplitude gives the sigma_y quadrature") {
    const Mat h = single_atom_hamiltonian(2, tone, {cxd(0.0, 2.0 * MHz)});
    CHECK(std::abs(h(0, 1) - cxd(0.0, 1.0 * MHz)) < 1e-6);
    CHECK(std::abs(h(1, 0) - cxd(0.0, -1.0 * MHz)) < 1e-6);
  }
  SUBCASE("always Hermitian for random amplitudes") {
    std::mt19937 rng(71);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<DriveTone> tones = {{0, 1, 0.0}, {1, 2, 0.0}};
    for (int it = 0; it < 50; ++it) {
      const Mat h = single_atom_hamiltonian(
          3, tones, {cxd(u(rng), u(rng)) * MHz, cxd(u(rng), u(rng)) * MHz});
      CHECK(mdev(h, h.adjoint()) < 1e-12);
    }
  }
}

TEST_CASE("quadrature operators reconstruct the drive Hamiltonian") {
  // Omega_j = 2 u_{2j} + 2 i u_{2j+1} must satisfy
  // sum_j (Omega_j/2)|g_j><e_j| + h.c. = sum_m u_m H_m for the 2M basis ops
  const std::vector<DriveTone> tones = {{0, 1, 0.0}, {1, 2, 0.0}};
  const auto ops = control_basis(3, tones);
  REQUIRE(ops.size() == 4);
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> dist(-3.0, 3.0);
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd u(4);
    for (int m = 0; m < 4; ++m) u[m] = dist(rng) * MHz;
    const Mat direct = single_atom_hamiltonian(
        3, tones, {cxd(2 * u[0], 2 * u[1]), cxd(2 * u[2], 2 * u[3])});
    Mat sum = Mat::Zero(3, 3);
    for (int m = 0; m < 4; ++m) sum += u[m] * ops[m];
    CHECK(mdev(direct, sum) < 1e-9);
  }
}

TEST_CASE("qutrit control operators match the ladder generator pairs") {
  const auto ops = control_basis(3, {{0, 1, 0.0}, {1, 2, 0.0}});
  Mat l1 = Mat::Zero(3, 3), l2 = Mat::Zero(3, 3), l3 = Mat::Zero(3, 3), l4 = Mat::Zero(3, 3);
  l1(0, 1) = l1(1, 0) = 1.0;
  l2(0, 1) = cxd(0, 1), l2(1, 0) = cxd(0, -1);
  l3(1, 2) = l3(2, 1) = 1.0;
  l4(1, 2) = cxd(0, 1), l4(2, 1) = cxd(0, -1);
  CHECK(mdev(ops[0], l1) < 1e-15);
  CHECK(mdev(ops[1], l2) < 1e-15);
  CHECK(mdev(ops[2], l3) < 1e-15);
  CHECK(mdev(ops[3], l4) < 1e-15);
}

TEST_CASE("two-atom Hamiltonian: symmetry, blockade and single-atom block") {
  const auto scheme = LevelScheme::two_rydberg(3);
  TwoAtomSpace full(scheme, false);
  const std::vector<DriveTone> tones = {{1, 3, 0.0}, {2, 4, 0.0}};
  const std::vector<cxd> om = {cxd(4.1, -0.3) * MHz, cxd(-1.2, 2.2) * MHz};
  const double V = 220.0 * MHz;
  const Mat h = two_atom_hamiltonian(full, tones, om, V);

  CHECK(mdev(h, h.adjoint()) < 1e-6);
  // symmetric under atom exchange
  const Mat s = full.swap_op();
  CHECK(mdev(s * h * s, h) < 1e-6);
  // blockade energy sits exactly on the doubly-Rydberg diagonal
  for (int i = 0; i < full.dim(); ++i) {
    const double want = full.ryd_count(i) == 2 ? V : 0.0;
    CHECK(std::abs(h(i, i) - cxd(want, 0.0)) < 1e-6);
  }
  // freezing atom 2 in level 0 reproduces the single-atom Hamiltonian
  const Mat h1 = single_atom_hamiltonian(5, tones, om);
  for (int a = 0; a < 5; ++a)
    for (int b = 0; b < 5; ++b)
      CHECK(std::abs(h(full.index_of(a, 0), full.index_of(b, 0)) - h1(a, b)) < 1e-6);

  // infinite V demands the reduced space
  CHECK_THROWS(two_atom_hamiltonian(full, tones, om,
                                    std::numeric_limits<double>::infinity()));
  TwoAtomSpace red(scheme, true);
  CHECK_NOTHROW(two_atom_hamiltonian(red, tones, om,
                                     std::numeric_limits<double>::infinity()));
}

TEST_CASE("crosstalk Hamiltonian agrees with the bilinear channel model") {
  const auto scheme = LevelScheme::two_rydberg(3);
  TwoAtomSpace red(scheme, true);
  const std::vector<DriveTone> tones = {{1, 3, 0.0}, {2, 4, 0.0}};
  const double dw = 50.0 * MHz;
  const auto model = crosstalk_model(red, tones, dw, 0.0);
  REQUIRE(model.n_controls() == 4);
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int it = 0; it < 40; ++it) {
    Eigen::VectorXd u(4);
    for (int m = 0; m < 4; ++m) u[m] = dist(rng) * MHz;
    const double t = std::abs(dist(rng)) * 1e-7;
    const Mat via_model = model.hamiltonian(u, t);
    const Mat direct = crosstalk_hamiltonian(
        red, tones, {cxd(2 * u[0], 2 * u[1]), cxd(2 * u[2], 2 * u[3])}, dw, t,
        std::numeric_limits<double>::infinity());
    CHECK(mdev(via_model, direct) < 1e-3);  // entries are of order 1e7
    CHECK(mdev(via_model, via_model.adjoint()) < 1e-6);
  }
  // no detuning means both lasers drive both transitions symmetrically
  const Mat h0 = crosstalk_hamiltonian(red, tones, {cxd(2.0, 0.0) * MHz, cxd(0.0, 0.0)},
                                       0.0, 0.33e-6, 0.0);
  CHECK(std::abs(h0(red.index_of(1, 0), red.index_of(3, 0)) -
                 h0(red.index_of(2, 0), red.index_of(4, 0))) < 1e-6);
}

TEST_CASE("off-resonant crosstalk light shift matches the two-level oracle") {
  // Drive laser 1 at constant Omega: its off-resonant coupling to 2<->r2
  // shifts level 2. In the frame rotating at the detuning the isolated
  // two-level problem is static with eigenvalue shift
  //   dE = -dw/2 + sqrt(dw^2 + Omega^2)/2  ~  Omega^2/(4 dw),
  // so the phase of |2,0> accumulates as -dE * T.
  const auto scheme = LevelScheme::two_rydberg(3);
  TwoAtomSpace red(scheme, true);
  const std::vector<DriveTone> tones = {{1, 3, 0.0}, {2, 4, 0.0}};
  const double omega = 5.0 * MHz, dw = 50.0 * MHz, T = 0.2e-6;
  const auto model = crosstalk_model(red, tones, dw, 0.0);

  const int N = int(std::ceil(T * dw / 0.1));
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(4, N);
  u.row(0).setConstant(omega / 2.0);
  Vec psi0 = Vec::Zero(red.dim());
  psi0[red.index_of(2, 0)] = 1.0;
  const Mat traj = evolve_state(model, u, {T, N}, psi0);
  const cxd amp = traj(red.index_of(2, 0), N);

  const double shift = -dw / 2.0 + std::sqrt(dw * dw + omega * omega) / 2.0;
  CHECK(std::abs(shift - omega * omega / (4.0 * dw)) / shift < 0.01);
  CHECK(std::abs(amp) > 0.99);  // far off-resonant, population stays put
  const double phase_err = std::abs(wrap_angle(std::arg(amp) + shift * T));
  CHECK(phase_err < 0.02 * std::abs(shift * T) + 2e-3);
}
