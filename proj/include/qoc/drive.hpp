#pragma once

// Laser drive tones and the bilinear control model H(t) = H_static +
// sum_m u_m(t) G_m(t). Each tone |g><e| contributes two real control
// channels via Omega = 2u_a + 2i u_b, so that
//   (Omega/2)|g><e| + h.c. = u_a (|g><e| + |e><g|) + u_b (i|g><e| - i|e><g|).
// Channel operators may carry a cos/sin modulation at a fixed frequency; this
// is how the off-resonant coupling of one laser to the other Rydberg
// transition enters while keeping the model bilinear in the controls.

#include <vector>

#include "qoc/gates.hpp"
#include "qoc/scheme.hpp"

namespace qoc {

struct DriveTone {
  int lower = 0;
  int upper = 0;
  double cap = 0.0;  // peak angular Rabi frequency, rad/s
};

struct Modulation {
  enum Kind { Const, Cos, Sin } kind = Const;
  double freq = 0.0;  // rad/s, signed
  double eval(double t) const;
};

struct ChannelPiece {
  Mat op;
  Modulation mod;
};

struct ControlChannel {
  std::vector<ChannelPiece> pieces;
  // dH/du_m at time t (also the operator multiplying u_m(t))
  Mat direction(double t, int dim) const;
};

struct ControlModel {
  int dim = 0;        // Hilbert space dimension the operators act on
  int d = 0;          // computational levels per atom (upper >= d marks a Rydberg tone)
  std::vector<DriveTone> tones;
  std::vector<ControlChannel> channels;  // 2 * tones.size()
  Mat h_static;

  int n_controls() const { return int(channels.size()); }
  bool tone_is_rydberg(int j) const { return tones[j].upper >= d; }
  Mat hamiltonian(const Eigen::VectorXd& u, double t) const;
};

// Hermitian quadrature pair for a single transition
Mat tone_op_x(int dim, int lower, int upper);  //  |g><e| + |e><g|
Mat tone_op_y(int dim, int lower, int upper);  // i|g><e| - i|e><g|

// instantaneous Hamiltonians from complex Rabi amplitudes (rad/s)
Mat single_atom_hamiltonian(int atom_dim, const std::vector<DriveTone>& tones,
                            const std::vector<cxd>& omega);
Mat two_atom_hamiltonian(const TwoAtomSpace& space, const std::vector<DriveTone>& tones,
                         const std::vector<cxd>& omega, double blockade_V);
// both lasers of the two-Rydberg scheme including their mutual off-resonant
// crosstalk, detuned by +/- delta_omega; t is measured from pulse start
Mat crosstalk_hamiltonian(const TwoAtomSpace& space, const std::vector<DriveTone>& tones,
                          const std::vector<cxd>& omega, double delta_omega, double t,
                          double blockade_V);

// the 2M Hermitian operators spanned by the quadrature controls
std::vector<Mat> control_basis(int atom_dim, const std::vector<DriveTone>& tones);

// control models used by the optimizer
ControlModel single_atom_model(int d, int atom_dim, const std::vector<DriveTone>& tones);
ControlModel two_atom_model(const TwoAtomSpace& space, const std::vector<DriveTone>& tones,
                            double blockade_V);
ControlModel crosstalk_model(const TwoAtomSpace& space, const std::vector<DriveTone>& tones,
                             double delta_omega, double blockade_V);

}  // namespace qoc
