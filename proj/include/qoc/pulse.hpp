#pragma once

// Piecewise-constant pulse schedules: per tone an amplitude fraction of the
// cap and a phase, sampled at slice midpoints. Optimized pulses carry their
// synthesis metadata (target phase theta, the single-atom frame phase chi
// the pulse imparts, achieved fidelity, optional Fourier coefficients).

#include <string>
#include <vector>

#include "qoc/drive.hpp"
#include "qoc/io.hpp"
#include "qoc/propagation.hpp"

namespace qoc {

struct PulseSchedule {
  std::vector<DriveTone> tones;
  TimeGrid grid;
  std::vector<std::vector<double>> amp_frac;  // [tone][slice], 0..1 relative to cap
  std::vector<std::vector<double>> phase;     // [tone][slice], rad

  std::string label;               // "x", "h", "cr", ...
  double theta = 0.0;              // interaction phase for CR-type pulses
  std::vector<int> target_levels;  // levels acquiring the interaction phase
  std::vector<double> chi;         // frame phase imparted on the driven level of
                                   // each Rydberg tone, in tone order
  double fidelity = 0.0;           // fidelity achieved at synthesis time
  json extra;                      // fourier coefficients, ramp spec, notes

  int n_tones() const { return int(tones.size()); }
  void validate() const;

  // realized complex Rabi envelope of one tone at one slice, rad/s
  cxd omega(int tone, int r) const;
  // quadrature control matrix (2 * n_tones) x N feeding ControlModel
  Eigen::MatrixXd controls() const;

  // time-reversed phase convention: realizes theta -> -theta with chi -> -chi
  PulseSchedule conjugated() const;
  // integer grid refinement (samples repeated); envelopes are unchanged
  PulseSchedule refined(int factor) const;

  json to_json() const;
  static PulseSchedule from_json(const json& j);
  void write_csv(const std::string& path) const;
};

// raised-cosine rise and fall envelope evaluated at slice midpoints;
// ramp_frac is the fraction of T spent in each of the two ramps
std::vector<double> ramp_profile(const TimeGrid& grid, double ramp_frac);

// population history CSV: one column per labeled basis state
void write_population_csv(const std::string& path, const Mat& traj, const TimeGrid& grid,
                          const std::vector<std::string>& labels);

// display label of a single-atom flat index under a scheme ("2", "r1", ...)
std::string level_label(const LevelScheme& scheme, int flat_index);

}  // namespace qoc
