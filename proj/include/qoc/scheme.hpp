#pragma once

// Level bookkeeping for one and two atoms. Each atom carries d computational
// levels 0..d-1 followed by n_ryd Rydberg levels; Rydberg level k sits at flat
// index d+k and is laser-coupled to exactly one computational level (never 0).
// The two-atom space is the tensor product in row-major order; under a
// perfect-blockade treatment the doubly-Rydberg pair states are removed from
// the basis entirely rather than penalized.

#include <utility>
#include <vector>

#include "qoc/gates.hpp"

namespace qoc {

struct LevelScheme {
  int d = 0;
  // coupled[k] = computational level driven through Rydberg level k
  std::vector<int> coupled;

  int n_ryd() const { return int(coupled.size()); }
  int atom_dim() const { return d + n_ryd(); }
  int ryd_index(int k) const { return d + k; }
  void validate() const;

  // one Rydberg level coupled to `level`
  static LevelScheme single(int d, int level);
  // the physical two-laser scheme: r1<->1 and r2<->2 (needs d >= 3)
  static LevelScheme two_rydberg(int d);
  // one Rydberg level per computational level 1..d-1 (abstract analysis space)
  static LevelScheme full_ladder(int d);
};

class TwoAtomSpace {
 public:
  TwoAtomSpace(LevelScheme scheme, bool perfect_blockade);

  int dim() const { return int(pairs_.size()); }
  int atom_dim() const { return scheme_.atom_dim(); }
  const LevelScheme& scheme() const { return scheme_; }
  bool perfect_blockade() const { return perfect_; }

  // -1 when the pair state was removed by the blockade reduction
  int index_of(int a, int b) const { return lookup_[a * atom_dim() + b]; }
  std::pair<int, int> levels_of(int idx) const { return pairs_[idx]; }
  // number of Rydberg-excited atoms in basis state idx (0, 1 or 2)
  int ryd_count(int idx) const;

  // flat indices of the d^2 computational pair states, ordered as j*d+k to
  // match the two-qudit gate conventions
  const std::vector<int>& comp_indices() const { return comp_; }

  // A (x) I + I (x) A restricted to the kept basis
  Mat embed_pair(const Mat& single_atom_op) const;
  // A acting on one atom only (atom = 0 or 1)
  Mat embed_one(const Mat& single_atom_op, int atom) const;

  // diagonal projectors onto computational / singly-Rydberg / doubly-Rydberg
  // basis states (the last is identically zero under perfect blockade)
  Mat projector_comp() const;
  Mat projector_ryd() const;
  Mat projector_bloc() const;

  // diagonal indicator of doubly-Rydberg states; multiplied by V this is the
  // interaction term of the finite-blockade Hamiltonian
  Mat blockade_indicator() const;

  Mat swap_op() const;

  // d^2 x d^2 computational block of a full-space operator
  Mat project_to_comp(const Mat& full) const;

 private:
  LevelScheme scheme_;
  bool perfect_;
  std::vector<std::pair<int, int>> pairs_;
  std::vector<int> lookup_;
  std::vector<int> comp_;
};

}  // namespace qoc
