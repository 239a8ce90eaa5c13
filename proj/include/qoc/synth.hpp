#pragma once

// Gate-synthesis drivers tying the control models to concrete targets, plus
// the on-disk pulse library. A controlled-phase pulse CR_S(theta) is always
// optimized on a proxy register first: spectator levels never couple to the
// drive, so the dynamics only involve the driven levels and the Rydberg
// states, and one |0>,|1>,|r> proxy pulse serves every level pair and qudit
// dimension. Realizing a pulse on a larger register just replays the same
// waveform on each active laser. Expensive optimizations are cached as JSON
// so later runs only re-verify.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "qoc/grape.hpp"
#include "qoc/pulse.hpp"

namespace qoc {

// shared hardware constants (angular frequencies in rad/s)
inline constexpr double kOmegaBar = 2.0 * pi * 5e6;        // Rabi cap
inline constexpr double kBlockadeV = 2.0 * pi * 220e6;     // Rydberg interaction
inline constexpr double kCrosstalkDelta = 2.0 * pi * 50e6; // laser splitting
inline constexpr double kRampFrac = 0.05;                  // rise/fall fraction

// controlled-phase pulse specification on a d-level register
struct CrSpec {
  int d = 2;
  std::vector<int> targets;  // ascending levels in 1..d-1, one or two of them
  double theta = pi;
  double omega_bar = kOmegaBar;
  double blockade_V = std::numeric_limits<double>::infinity();
  double crosstalk_delta = 0.0;  // >0 adds the off-resonant laser leakage
  double ramp_frac = 0.0;        // raised-cosine edges during optimization
  bool both_lasers = false;      // drive lasers 1 and 2 even for one target

  std::vector<int> driven() const;  // levels with an active laser
  LevelScheme scheme() const;
  std::vector<DriveTone> tones() const;
  std::string describe() const;  // e.g. "cr12(4pi/3)"
  void validate() const;
};

// slice count from the control-resolution rule dt * omega_bar <= slice_rad
int slice_count(double T, double omega_bar, double slice_rad = 0.02);

// two-atom optimization problem for the spec; n_slices 0 derives the grid
// from slice_count. The frame-phase gauge gets one variable per driven level.
GrapeProblem cr_problem(const CrSpec& spec, double T, int n_slices = 0);

// the spectator-free equivalent: |targets|+1 levels, always perfect blockade
CrSpec proxy_spec(const CrSpec& spec);

// replay a stored single-tone waveform as a concrete CR pulse: negative theta
// conjugates it, two-target specs duplicate it on both lasers
PulseSchedule realize_cr(const PulseSchedule& proxy, const CrSpec& spec);

// re-key a pulse onto a different tone set: matching driven levels keep their
// waveform, new tones start silent (used to play a one-laser pulse on the
// two-laser crosstalk model)
PulseSchedule spread_to_tones(const PulseSchedule& ps, const std::vector<DriveTone>& tones);

// fidelity of the stored (physical) waveform against the spec's target
double cr_fidelity(const PulseSchedule& ps, const CrSpec& spec);
// time-averaged Rydberg population per computational state (blockade-pair
// states weighted twice), the decay exponent per unit lifetime
double cr_chi_ryd(const PulseSchedule& ps, const CrSpec& spec);

// physical waveform of an optimization result (envelope folded in)
PulseSchedule make_schedule(const GrapeProblem& p, const OptimResult& res);

// single-qudit ladder problems (tones j <-> j+1, no Rydberg level)
Mat single_gate_target(int d, const std::string& name);  // "x" | "h"
GrapeProblem single_qudit_problem(int d, const Mat& target, double T,
                                  double omega_bar = kOmegaBar, int n_slices = 0);

struct SynthOptions {
  std::uint64_t seed = 77;
  double omega_bar = kOmegaBar;
  int restarts = 8;         // restarts for the final optimization
  int scan_restarts = 3;    // restarts per duration-scan grid point
  int scan_points = 16;
  int scan_max_iters = 600;
  int max_iters = 2000;
  double threshold = 1.0 - 1e-4;
  double slice_rad = 0.02;       // final grid resolution, dt * omega_bar
  double scan_slice_rad = 0.04;  // coarser grid while scanning durations
  bool serial = false;
};

struct SynthReport {
  PulseSchedule pulse;
  bool found = false;
  double t_opt = 0.0;
  std::vector<TimeScanPoint> coarse, fine;  // threshold-crossing scan curves
};

// scan [t_min, t_max] for the shortest duration reaching the threshold, then
// re-optimize on the fine grid at that duration
SynthReport synthesize_single_gate(int d, const std::string& gate, double t_min,
                                   double t_max, const SynthOptions& opt = {});
SynthReport synthesize_cr_proxy(double theta, double t_min, double t_max,
                                const SynthOptions& opt = {});

// local re-optimization of an ideal waveform under finite blockade and ramped
// edges; stretches the duration in small steps until the threshold is met
PulseSchedule polish_noise_ready(const PulseSchedule& base, const CrSpec& spec,
                                 const SynthOptions& opt = {});

// re-optimization with the crosstalk terms active, in the Fourier
// parametrization (omega0 = omega_bar/2, 6 harmonics), warm-started from the
// least-squares projection of the ideal waveform onto the basis
PulseSchedule reoptimize_crosstalk(const PulseSchedule& base, const CrSpec& spec,
                                   const SynthOptions& opt = {});

// qutrit CZ as one simultaneous pulse on tones (0,1), (1,2), (2,r) in the
// Fourier parametrization at fixed duration
GrapeProblem cz_simultaneous_problem(double T, double omega_bar = kOmegaBar,
                                     int n_slices = 0);
SynthReport synthesize_cz_simultaneous(double T, const SynthOptions& opt = {});

// JSON pulse cache keyed by short names ("cr_2pi3", "d3_cr12_noise", ...)
class PulseLibrary {
 public:
  explicit PulseLibrary(std::string dir) : dir_(std::move(dir)) {}
  const std::string& dir() const { return dir_; }
  std::string path_of(const std::string& key) const { return dir_ + "/" + key + ".json"; }
  bool has(const std::string& key) const;
  PulseSchedule load(const std::string& key) const;
  void store(const std::string& key, const PulseSchedule& ps) const;

  // canonical key for a |theta| proxy pulse; theta must be a small rational
  // multiple of pi ("cr_pi", "cr_2pi3", "cr_pi2", ...)
  static std::string theta_key(double theta);
  static std::string gate_key(int d, const std::string& gate);  // "d3_h"
  static std::string cr_key(int d, const std::vector<int>& targets,
                            const std::string& variant);  // "d3_cr12_noise"

  // load-or-synthesize entry points (store on miss)
  PulseSchedule ensure_cr_proxy(double theta, const SynthOptions& opt = {});
  PulseSchedule ensure_single_gate(int d, const std::string& gate, double t_min,
                                   double t_max, const SynthOptions& opt = {});

 private:
  std::string dir_;
};

// the qutrit interaction pulses CR_1, CR_2, CR_12 at theta = -2pi/3 (the
// 4pi/3 pulses of the qutrit CZ decomposition), polished for finite blockade
// with ramped edges; cached under d3_cr*_noise
std::vector<PulseSchedule> ensure_qutrit_noise_pulses(PulseLibrary& lib,
                                                      const SynthOptions& opt = {});
// same pulses re-optimized with the laser crosstalk active (d3_cr*_xtalk)
std::vector<PulseSchedule> ensure_qutrit_crosstalk_pulses(PulseLibrary& lib,
                                                          const SynthOptions& opt = {});

}  // namespace qoc
