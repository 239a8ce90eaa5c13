#pragma once

// Compilation of the two-qudit controlled-phase gate into sequences of
// interaction (CR) pulses and single-atom operations, together with the
// structural analyses that motivate the pulse set: minimal pulse counts under
// a tone budget, the additive-phase obstruction that rules out echoed
// single-tone protocols beyond the qutrit, and drive-algebra controllability.

#include <string>
#include <vector>

#include "qoc/gates.hpp"
#include "qoc/io.hpp"
#include "qoc/zmod.hpp"

namespace qoc {

// One step of a two-atom protocol, in chronological order. Local and Virtual
// steps act identically on both atoms (a global beam addresses the array
// uniformly); Cr steps phase |a,b> by theta exactly when both levels are in
// `targets`.
struct GateStep {
  enum class Kind { Cr, Local, Virtual };
  Kind kind = Kind::Cr;
  std::vector<int> targets;  // Cr: simultaneously driven levels, ascending
  double theta = 0.0;        // Cr interaction phase, or Virtual phase
  int level = 0;             // Virtual: the level acquiring the phase
  Mat local;                 // Local: single-atom unitary applied to both
  std::string label;

  static GateStep cr(std::vector<int> targets, double theta);
  static GateStep local_both(Mat u, std::string label);
  static GateStep virtual_phase(int level, double theta);
  std::string describe() const;
};

struct GateSequence {
  int d = 2;
  std::vector<GateStep> steps;
  int cr_count() const;
};

// Product of the steps; steps[0] acts first.
Mat sequence_to_unitary(const GateSequence& seq);

// CZ(d) as one CR pulse per level pair. In units of pi/d the pair (j, m)
// with j < m needs angle 2 j m and the singleton {j} needs 4 j^2 - j (d-1) d,
// both mod 2d and wrapped to (-d, d]; pulses whose angle reduces to zero are
// dropped. The product equals cz_gate(d) exactly, with no local corrections
// and no global phase.
GateSequence compile_cz(int d);

// Qutrit CZ with only one Rydberg-coupled level: three CR_2(4pi/3) pulses
// interleaved with cyclic level shifts, closed by a phase on level 0 of both
// atoms. Equals cz_gate(3) up to a global phase.
GateSequence compile_cz_qutrit_single_rydberg();

// Re-route every CR step onto the physically coupled levels (defaults to {1}
// for d = 2, {1, 2} otherwise) by conjugating with level permutations applied
// to both atoms. The overall unitary is unchanged; after lowering, only the
// physical levels are ever driven. Level 0 is never permuted.
GateSequence lower_to_two_rydberg(const GateSequence& seq,
                                  std::vector<int> physical = {});

// JSON form: {"d": d, "steps": [{"type": "cr"|"single"|"virtual", ...}]}
json sequence_to_json(const GateSequence& seq);
GateSequence sequence_from_json(const json& j);

// ---- pulse-count minimization ----

struct PulseCountResult {
  bool found = false;
  int pulses = 0;
  std::vector<std::vector<int>> tone_sets;  // chosen driven-level subsets
  GateSequence seq;                         // realizing sequence when found
  bool proven_minimal = false;  // every smaller family fails even with
                                // unconstrained real angles
};

// Fewest CR pulses implementing cz(d) when at most max_tones levels may be
// driven simultaneously. Exhaustive over families of distinct level subsets
// (repeating a subset only sums its angle) with an exact modular solve per
// family; among minimal families, prefers fewer total driven tones.
PulseCountResult minimize_pulse_count(int d, int max_tones,
                                      int max_pulses = 12);

// ---- additive-phase obstruction ----

struct AdditiveSplitResult {
  bool feasible = false;
  std::vector<double> xi;  // per-level phases realizing the split
  IntVec certificate;      // integer pair-combination refuting feasibility
};

// Can the off-diagonal CZ phases split additively, 2 pi j m / d == xi_j +
// xi_m (mod 2 pi) for all j < m? Echoed protocols that never blockade
// distinct level pairs can only reach such gates. Feasible for d <= 3,
// infeasible with an exact integer certificate for every d >= 4.
AdditiveSplitResult cz_additive_offdiagonal(int d);

struct DiagonalSplitCheck {
  double max_offdiag = 0.0;      // largest entry magnitude off the diagonal
  double split_residual = 0.0;   // largest wrapped deviation from xi_j + xi_m
  std::vector<double> xi;        // fitted per-level phases
};

// Fit per-level phases to the off-diagonal pair phases of a (nominally
// diagonal) two-qudit gate. Exact on gates that do split; the residual is
// O(1) on cz_gate(d) for d >= 4.
DiagonalSplitCheck diagonal_split_check(const Mat& u, int d);

// ---- controllability ----

// Dimension of the real Lie algebra generated by the traceless parts of i H_k
// under commutation.
int lie_closure_dimension(const std::vector<Mat>& generators);

// The x and y quadrature Hamiltonians of each neighboring-level transition of
// a d-level ladder; these generate all of su(d).
std::vector<Mat> ladder_drive_generators(int d);

}  // namespace qoc
