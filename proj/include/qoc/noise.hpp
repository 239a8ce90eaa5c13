#pragma once

// Quantum-jump Monte Carlo benchmarking of realized pulse protocols in a
// neutral-atom pair: Rydberg decay as trajectory jumps, shot-to-shot
// common-mode detuning and intensity noise, exact interleaved single-atom
// steps, and the closed-form decay scaling predictor for compiled CZ gates.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "qoc/gates.hpp"
#include "qoc/pulse.hpp"
#include "qoc/scheme.hpp"
#include "qoc/sequence.hpp"
#include "qoc/synth.hpp"

namespace qoc {

inline constexpr double kTauRyd = 60e-6;             // Rydberg lifetime, s
inline constexpr double kSigmaDet = 2 * pi * 40e3;   // detuning spread, rad/s
inline constexpr double kIntensityRelVar = 8e-3;     // relative intensity variance

struct NoiseModel {
  double tau_ryd = kTauRyd;      // every Rydberg level decays to |0> at 1/tau
  double sigma_det = kSigmaDet;  // common-mode Rydberg detuning per shot
  double intensity_rel_var = kIntensityRelVar;  // Rydberg drive power per shot
};

// one shot's classical noise draw, constant for the whole trajectory
struct Shot {
  double detuning = 0.0;   // rad/s, applied to every Rydberg level
  double amp_scale = 1.0;  // multiplies the Rydberg drive amplitude
};
Shot sample_shot(const NoiseModel& nm, std::mt19937_64& rng);

// A physical two-atom protocol: pulse steps drive lasers identified by their
// lower level inside one shared level scheme; exact steps apply a single-atom
// unitary to both atoms instantaneously. After every pulse the engine applies
// the frame correction exp(-i chi_k n_l) recorded in the schedule, which is
// what virtual phase tracking does on hardware.
struct Protocol {
  int d = 3;
  LevelScheme scheme;            // shared by all steps
  double blockade_V = kBlockadeV;
  double crosstalk_delta = 0.0;  // > 0 uses the modulated two-laser model
  struct Step {
    bool is_pulse = false;
    PulseSchedule pulse;  // CR pulse (when is_pulse)
    Mat local;            // d x d single-atom unitary otherwise
    std::string label;
  };
  std::vector<Step> steps;
  Mat target;  // d^2 x d^2 ideal comparison gate
  double total_pulse_time() const;
};

// benchmark protocol for one realized CR pulse
Protocol pulse_protocol(const PulseSchedule& ps, const CrSpec& spec);

// physical realization of a compiled sequence; `resolve` maps each CR step to
// its realized pulse, local and virtual steps stay exact
Protocol sequence_protocol(const GateSequence& seq,
                           const std::function<PulseSchedule(const GateStep&)>& resolve,
                           double blockade_V, double crosstalk_delta = 0.0);

struct TrajectoryConfig {
  int n_traj = 20000;
  std::uint64_t seed = 1;
  bool serial = false;  // force the serial reference path
  Vec initial;          // diagnostic override of the initial state (full space)
  Vec target_state;     // diagnostic override of the reference state
};

struct SimResult {
  double fidelity = 0.0;   // mean state fidelity against the target state
  double std_error = 0.0;
  double mean_jumps = 0.0;
  std::vector<long long> jump_histogram;  // [k] = trajectories with k jumps
  std::vector<double> jumps_by_step;      // mean jump count per protocol step
  int n_traj = 0;
};

// Monte Carlo over trajectories: the uniform-superposition product state is
// propagated through every step with the non-Hermitian effective Hamiltonian
// (Taylor product per slice), decay realized as norm-threshold jumps at slice
// boundaries, and scored against target * initial state.
SimResult simulate_protocol(const Protocol& p, const NoiseModel& nm,
                            const TrajectoryConfig& cfg);

SimResult benchmark_pulse(const PulseSchedule& ps, const CrSpec& spec,
                          const NoiseModel& nm, const TrajectoryConfig& cfg);

// deterministic coherent reference through the same engine: no decay, no
// classical noise, no jumps
double protocol_state_fidelity(const Protocol& p);

// ---- decay scaling predictions ----

struct PulsePrediction {
  std::vector<int> targets;
  double theta = 0.0;
  double duration = 0.0;    // s
  double chi_ryd = 0.0;     // time-averaged Rydberg excitation number
  double decay_loss = 0.0;  // chi_ryd * duration / tau
};

struct ScalingPrediction {
  int d = 0;
  std::vector<PulsePrediction> pulses;
  double predicted_infidelity = 0.0;    // 1 - prod exp(-decay_loss)
  double closed_form_infidelity = 0.0;  // 1 - f1^((d-1)^2)
  double f1 = 0.0;                      // survival of the single-tone pi pulse
  double total_time = 0.0;              // s, summed pulse durations
};

// Decay-limited CZ infidelity for dimension d: every pulse of compile_cz(d)
// is realized from the proxy library at perfect blockade and costs
// exp(-chi_ryd T / tau); the closed form counts (d-1)^2 pi-pulse equivalents.
ScalingPrediction predict_cz_infidelity(int d, PulseLibrary& lib,
                                        const NoiseModel& nm,
                                        const SynthOptions& so = {});

}  // namespace qoc
