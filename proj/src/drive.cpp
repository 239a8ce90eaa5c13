#include "qoc/drive.hpp"

#include <cmath>
#include <stdexcept>

namespace qoc {

double Modulation::eval(double t) const {
  switch (kind) {
    case Const: return 1.0;
    case Cos: return std::cos(freq * t);
    case Sin: return std::sin(freq * t);
  }
  return 1.0;
}

Mat ControlChannel::direction(double t, int dim) const {
  Mat g = Mat::Zero(dim, dim);
  for (const auto& p : pieces) g += p.mod.eval(t) * p.op;
  return g;
}

Mat ControlModel::hamiltonian(const Eigen::VectorXd& u, double t) const {
  if (u.size() != n_controls())
    throw std::invalid_argument("ControlModel: control vector size mismatch");
  Mat h = h_static.size() ? h_static : Mat::Zero(dim, dim);
  for (int m = 0; m < n_controls(); ++m) h += u[m] * channels[m].direction(t, dim);
  return h;
}

static void check_tone(int dim, const DriveTone& t) {
  if (t.lower < 0 || t.upper < 0 || t.lower >= dim || t.upper >= dim || t.lower == t.upper)
    throw std::invalid_argument("DriveTone: bad level pair");
}

Mat tone_op_x(int dim, int lower, int upper) {
  Mat m = Mat::Zero(dim, dim);
  m(lower, upper) = 1.0;
  m(upper, lower) = 1.0;
  return m;
}

Mat tone_op_y(int dim, int lower, int upper) {
  Mat m = Mat::Zero(dim, dim);
  m(lower, upper) = cxd(0.0, 1.0);
  m(upper, lower) = cxd(0.0, -1.0);
  return m;
}

Mat single_atom_hamiltonian(int atom_dim, const std::vector<DriveTone>& tones,
                            const std::vector<cxd>& omega) {
  if (omega.size() != tones.size())
    throw std::invalid_argument("single_atom_hamiltonian: one amplitude per tone");
  Mat h = Mat::Zero(atom_dim, atom_dim);
  for (size_t j = 0; j < tones.size(); ++j) {
    check_tone(atom_dim, tones[j]);
    h(tones[j].lower, tones[j].upper) += 0.5 * omega[j];
    h(tones[j].upper, tones[j].lower) += 0.5 * std::conj(omega[j]);
  }
  return h;
}

Mat two_atom_hamiltonian(const TwoAtomSpace& space, const std::vector<DriveTone>& tones,
                         const std::vector<cxd>& omega, double blockade_V) {
  const Mat h1 = single_atom_hamiltonian(space.atom_dim(), tones, omega);
  Mat h = space.embed_pair(h1);
  if (!space.perfect_blockade()) {
    if (!std::isfinite(blockade_V))
      throw std::invalid_argument(
          "two_atom_hamiltonian: infinite V requires the blockade-reduced space");
    h += blockade_V * space.blockade_indicator();
  }
  return h;
}

Mat crosstalk_hamiltonian(const TwoAtomSpace& space, const std::vector<DriveTone>& tones,
                          const std::vector<cxd>& omega, double delta_omega, double t,
                          double blockade_V) {
  if (tones.size() != 2 || omega.size() != 2)
    throw std::invalid_argument("crosstalk_hamiltonian: expects the two Rydberg tones");
  const int na = space.atom_dim();
  // intended couplings plus each laser leaking onto the other transition,
  // off-resonant by +delta_omega (laser 0 on transition 1) or -delta_omega
  std::vector<DriveTone> all = {tones[0], tones[1], tones[1], tones[0]};
  std::vector<cxd> amp = {omega[0], omega[1],
                          omega[0] * std::polar(1.0, delta_omega * t),
                          omega[1] * std::polar(1.0, -delta_omega * t)};
  const Mat h1 = single_atom_hamiltonian(na, all, amp);
  Mat h = space.embed_pair(h1);
  if (!space.perfect_blockade()) {
    if (!std::isfinite(blockade_V))
      throw std::invalid_argument(
          "crosstalk_hamiltonian: infinite V requires the blockade-reduced space");
    h += blockade_V * space.blockade_indicator();
  }
  return h;
}

std::vector<Mat> control_basis(int atom_dim, const std::vector<DriveTone>& tones) {
  std::vector<Mat> ops;
  ops.reserve(2 * tones.size());
  for (const auto& t : tones) {
    check_tone(atom_dim, t);
    ops.push_back(tone_op_x(atom_dim, t.lower, t.upper));
    ops.push_back(tone_op_y(atom_dim, t.lower, t.upper));
  }
  return ops;
}

ControlModel single_atom_model(int d, int atom_dim, const std::vector<DriveTone>& tones) {
  ControlModel m;
  m.dim = atom_dim;
  m.d = d;
  m.tones = tones;
  m.h_static = Mat::Zero(atom_dim, atom_dim);
  for (const auto& op : control_basis(atom_dim, tones))
    m.channels.push_back({{{op, {Modulation::Const, 0.0}}}});
  return m;
}

ControlModel two_atom_model(const TwoAtomSpace& space, const std::vector<DriveTone>& tones,
                            double blockade_V) {
  ControlModel m;
  m.dim = space.dim();
  m.d = space.scheme().d;
  m.tones = tones;
  m.h_static = Mat::Zero(m.dim, m.dim);
  if (!space.perfect_blockade()) {
    if (!std::isfinite(blockade_V))
      throw std::invalid_argument("two_atom_model: infinite V requires perfect blockade");
    m.h_static = blockade_V * space.blockade_indicator();
  }
  for (const auto& t : tones) {
    check_tone(space.atom_dim(), t);
    m.channels.push_back(
        {{{space.embed_pair(tone_op_x(space.atom_dim(), t.lower, t.upper)),
           {Modulation::Const, 0.0}}}});
    m.channels.push_back(
        {{{space.embed_pair(tone_op_y(space.atom_dim(), t.lower, t.upper)),
           {Modulation::Const, 0.0}}}});
  }
  return m;
}

ControlModel crosstalk_model(const TwoAtomSpace& space, const std::vector<DriveTone>& tones,
                             double delta_omega, double blockade_V) {
  if (tones.size() != 2)
    throw std::invalid_argument("crosstalk_model: expects the two Rydberg tones");
  ControlModel m = two_atom_model(space, tones, blockade_V);
  // laser j also drives the other transition, with phase exp(+/- i dw t);
  // written in quadratures the u_a/u_b channels each pick up cos and sin pieces
  for (int j = 0; j < 2; ++j) {
    const DriveTone& other = tones[1 - j];
    const double sgn = (j == 0) ? 1.0 : -1.0;  // laser 0 leads by +dw
    const Mat ax = space.embed_pair(tone_op_x(space.atom_dim(), other.lower, other.upper));
    const Mat ay = space.embed_pair(tone_op_y(space.atom_dim(), other.lower, other.upper));
    // u_a: (cos) ax + (sin) ay ; u_b: -(sin) ax + (cos) ay, frequencies signed
    m.channels[2 * j].pieces.push_back({ax, {Modulation::Cos, sgn * delta_omega}});
    m.channels[2 * j].pieces.push_back({ay, {Modulation::Sin, sgn * delta_omega}});
    m.channels[2 * j + 1].pieces.push_back({-ax, {Modulation::Sin, sgn * delta_omega}});
    m.channels[2 * j + 1].pieces.push_back({ay, {Modulation::Cos, sgn * delta_omega}});
  }
  return m;
}

}  // namespace qoc
