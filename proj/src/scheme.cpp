#include "qoc/scheme.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qoc {

void LevelScheme::validate() const {
  if (d < 2) throw std::invalid_argument("LevelScheme: d must be >= 2");
  std::vector<int> seen;
  for (int lvl : coupled) {
    if (lvl < 1 || lvl >= d)
      throw std::invalid_argument(
          "LevelScheme: Rydberg-coupled level must lie in 1..d-1, got " +
          std::to_string(lvl));
    if (std::find(seen.begin(), seen.end(), lvl) != seen.end())
      throw std::invalid_argument("LevelScheme: duplicate coupled level");
    seen.push_back(lvl);
  }
}

LevelScheme LevelScheme::single(int d, int level) {
  LevelScheme s{d, {level}};
  s.validate();
  return s;
}

LevelScheme LevelScheme::two_rydberg(int d) {
  if (d == 2) return single(2, 1);
  LevelScheme s{d, {1, 2}};
  s.validate();
  return s;
}

LevelScheme LevelScheme::full_ladder(int d) {
  LevelScheme s;
  s.d = d;
  for (int j = 1; j < d; ++j) s.coupled.push_back(j);
  s.validate();
  return s;
}

TwoAtomSpace::TwoAtomSpace(LevelScheme scheme, bool perfect_blockade)
    : scheme_(std::move(scheme)), perfect_(perfect_blockade) {
  scheme_.validate();
  const int na = scheme_.atom_dim();
  const int d = scheme_.d;
  lookup_.assign(na * na, -1);
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < na; ++b) {
      if (perfect_ && a >= d && b >= d) continue;
      lookup_[a * na + b] = int(pairs_.size());
      pairs_.emplace_back(a, b);
    }
  comp_.reserve(d * d);
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k) comp_.push_back(index_of(j, k));
}

int TwoAtomSpace::ryd_count(int idx) const {
  const auto [a, b] = pairs_[idx];
  return int(a >= scheme_.d) + int(b >= scheme_.d);
}

Mat TwoAtomSpace::embed_pair(const Mat& op) const {
  return embed_one(op, 0) + embed_one(op, 1);
}

Mat TwoAtomSpace::embed_one(const Mat& op, int atom) const {
  const int na = atom_dim();
  if (op.rows() != na || op.cols() != na)
    throw std::invalid_argument("embed_one: operator must be atom_dim x atom_dim");
  if (atom != 0 && atom != 1) throw std::invalid_argument("embed_one: atom must be 0 or 1");
  Mat out = Mat::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) {
    const auto [a, b] = pairs_[i];
    for (int ap = 0; ap < na; ++ap) {
      const cxd v = (atom == 0) ? op(ap, a) : op(ap, b);
      if (v == cxd(0.0, 0.0)) continue;
      const int j = (atom == 0) ? index_of(ap, b) : index_of(a, ap);
      if (j >= 0) out(j, i) += v;
    }
  }
  return out;
}

static Mat diag_where(const TwoAtomSpace& sp, int want_count) {
  Mat p = Mat::Zero(sp.dim(), sp.dim());
  for (int i = 0; i < sp.dim(); ++i)
    if (sp.ryd_count(i) == want_count) p(i, i) = 1.0;
  return p;
}

Mat TwoAtomSpace::projector_comp() const { return diag_where(*this, 0); }
Mat TwoAtomSpace::projector_ryd() const { return diag_where(*this, 1); }
Mat TwoAtomSpace::projector_bloc() const { return diag_where(*this, 2); }
Mat TwoAtomSpace::blockade_indicator() const { return diag_where(*this, 2); }

Mat TwoAtomSpace::swap_op() const {
  Mat s = Mat::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) {
    const auto [a, b] = pairs_[i];
    s(index_of(b, a), i) = 1.0;
  }
  return s;
}

Mat TwoAtomSpace::project_to_comp(const Mat& full) const {
  if (full.rows() != dim() || full.cols() != dim())
    throw std::invalid_argument("project_to_comp: dimension mismatch");
  const int d2 = int(comp_.size());
  Mat out(d2, d2);
  for (int i = 0; i < d2; ++i)
    for (int j = 0; j < d2; ++j) out(i, j) = full(comp_[i], comp_[j]);
  return out;
}

}  // namespace qoc
