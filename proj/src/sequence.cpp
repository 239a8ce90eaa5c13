#include "qoc/sequence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>
#include <stdexcept>
#include <utility>

#include "qoc/drive.hpp"
#include "qoc/io.hpp"

namespace qoc {

namespace {

long long pos_mod(long long a, long long m) {
  const long long r = a % m;
  return r < 0 ? r + m : r;
}

// reduce an angle in pi/d units to (-d, d]
long long reduce_units(long long g, int d) {
  long long r = pos_mod(g, 2 * d);
  if (r > d) r -= 2 * d;
  return r;
}

Mat kron_both(const Mat& u) {
  const int n = static_cast<int>(u.rows());
  Mat out(n * n, n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      out.block(a * n, b * n, n, n) = u(a, b) * u;
  return out;
}

}  // namespace

GateStep GateStep::cr(std::vector<int> targets, double theta) {
  GateStep s;
  s.kind = Kind::Cr;
  s.targets = std::move(targets);
  s.theta = theta;
  return s;
}

GateStep GateStep::local_both(Mat u, std::string label) {
  GateStep s;
  s.kind = Kind::Local;
  s.local = std::move(u);
  s.label = std::move(label);
  return s;
}

GateStep GateStep::virtual_phase(int level, double theta) {
  GateStep s;
  s.kind = Kind::Virtual;
  s.level = level;
  s.theta = theta;
  return s;
}

std::string GateStep::describe() const {
  switch (kind) {
    case Kind::Cr: {
      std::string name = "cr";
      for (int t : targets) name += std::to_string(t);
      return name + "(" + format_angle(theta) + ")";
    }
    case Kind::Local:
      return label.empty() ? "local" : label;
    case Kind::Virtual:
      return "r" + std::to_string(level) + "(" + format_angle(theta) + ")";
  }
  return {};
}

int GateSequence::cr_count() const {
  int n = 0;
  for (const GateStep& s : steps)
    if (s.kind == GateStep::Kind::Cr) ++n;
  return n;
}

Mat sequence_to_unitary(const GateSequence& seq) {
  const int dim = seq.d * seq.d;
  Mat u = Mat::Identity(dim, dim);
  for (const GateStep& s : seq.steps) {
    switch (s.kind) {
      case GateStep::Kind::Cr: {
        const std::set<int> t(s.targets.begin(), s.targets.end());
        u = cr_gate(seq.d, t, s.theta) * u;
        break;
      }
      case GateStep::Kind::Local:
        u = kron_both(s.local) * u;
        break;
      case GateStep::Kind::Virtual:
        u = kron_both(phase_gate(seq.d, s.level, s.theta)) * u;
        break;
    }
  }
  return u;
}

GateSequence compile_cz(int d) {
  if (d < 2) throw std::invalid_argument("compile_cz: need d >= 2");
  GateSequence seq;
  seq.d = d;
  // Singleton pulses correct the diagonal phases the pair pulses leave
  // behind; with the angle below the total on |j,j> telescopes to 2 pi j^2/d.
  for (long long j = 1; j < d; ++j) {
    const long long g = reduce_units(4 * j * j - j * (d - 1) * d, d);
    if (g != 0) seq.steps.push_back(GateStep::cr({int(j)}, g * pi / d));
  }
  for (int j = 1; j < d; ++j)
    for (int m = j + 1; m < d; ++m) {
      const long long g = reduce_units(2ll * j * m, d);
      if (g != 0) seq.steps.push_back(GateStep::cr({j, m}, g * pi / d));
    }
  return seq;
}

GateSequence compile_cz_qutrit_single_rydberg() {
  GateSequence seq;
  seq.d = 3;
  const double theta = wrap_angle(4.0 * pi / 3.0);  // = -2 pi / 3
  for (int rep = 0; rep < 3; ++rep) {
    seq.steps.push_back(GateStep::local_both(pauli_x(3), "x"));
    seq.steps.push_back(GateStep::cr({2}, theta));
  }
  seq.steps.push_back(GateStep::virtual_phase(0, 2.0 * pi / 3.0));
  return seq;
}

namespace {

struct GridSolve {
  bool ok = false;
  std::vector<double> angles;
};

// solve A x == c on successively refined fractions of pi/d; the constructive
// families here land on the base grid, finer ones are a cheap safety net
GridSolve grid_solve(const IntMat& A, const IntVec& c, int d) {
  for (long long k : {1, 2, 3, 4, 6}) {
    const ModSolution s = solve_mod(A, (k * c).eval(), 2 * d * k);
    if (!s.feasible) continue;
    GridSolve out;
    out.ok = true;
    for (int p = 0; p < s.x.size(); ++p)
      out.angles.push_back(wrap_angle(double(s.x[p]) * pi / double(d * k)));
    return out;
  }
  return {};
}

}  // namespace

PulseCountResult minimize_pulse_count(int d, int max_tones, int max_pulses) {
  if (d < 2) throw std::invalid_argument("minimize_pulse_count: need d >= 2");
  if (max_tones < 1 || max_tones > d - 1)
    throw std::invalid_argument("minimize_pulse_count: bad tone budget");

  // available driven-level subsets, smallest first
  std::vector<std::vector<int>> avail;
  for (unsigned mask = 1; mask < (1u << (d - 1)); ++mask) {
    if (std::popcount(mask) > max_tones) continue;
    std::vector<int> s;
    for (int l = 1; l < d; ++l)
      if (mask & (1u << (l - 1))) s.push_back(l);
    avail.push_back(std::move(s));
  }
  std::sort(avail.begin(), avail.end(),
            [](const std::vector<int>& a, const std::vector<int>& b) {
              return a.size() != b.size() ? a.size() < b.size() : a < b;
            });

  // one equation per level pair (j, m) with 1 <= j <= m: total phase 2 j m
  // in pi/d units (level-0 pairs are never phased and need nothing)
  std::vector<std::pair<int, int>> pairs;
  for (int j = 1; j < d; ++j)
    for (int m = j; m < d; ++m) pairs.emplace_back(j, m);
  IntVec c(pairs.size());
  for (size_t r = 0; r < pairs.size(); ++r)
    c[r] = pos_mod(2ll * pairs[r].first * pairs[r].second, 2 * d);

  const auto member = [&](const std::vector<int>& s, int l) {
    return std::find(s.begin(), s.end(), l) != s.end();
  };

  bool smaller_real_feasible = false;
  for (int m = 1; m <= std::min<int>(max_pulses, avail.size()); ++m) {
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;

    int best_tones = -1;
    PulseCountResult best;
    bool real_feasible_here = false;
    for (;;) {
      IntMat A = IntMat::Zero(pairs.size(), m);
      int tones = 0;
      for (int p = 0; p < m; ++p) {
        const std::vector<int>& s = avail[idx[p]];
        tones += static_cast<int>(s.size());
        for (size_t r = 0; r < pairs.size(); ++r)
          if (member(s, pairs[r].first) && member(s, pairs[r].second))
            A(r, p) = 1;
      }
      const GridSolve g = grid_solve(A, c, d);
      if (g.ok) {
        if (best_tones < 0 || tones < best_tones) {
          best_tones = tones;
          best.found = true;
          best.pulses = m;
          best.seq.d = d;
          best.seq.steps.clear();
          best.tone_sets.clear();
          for (int p = 0; p < m; ++p) {
            best.tone_sets.push_back(avail[idx[p]]);
            best.seq.steps.push_back(GateStep::cr(avail[idx[p]], g.angles[p]));
          }
        }
      } else if (!real_feasible_here && real_mod_feasible(A, c, 2 * d)) {
        real_feasible_here = true;
      }

      // next combination of avail indices
      int i = m - 1;
      while (i >= 0 && idx[i] == int(avail.size()) - m + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int k = i + 1; k < m; ++k) idx[k] = idx[k - 1] + 1;
    }

    if (best.found) {
      best.proven_minimal = !smaller_real_feasible;
      return best;
    }
    smaller_real_feasible = smaller_real_feasible || real_feasible_here;
  }
  return {};
}

AdditiveSplitResult cz_additive_offdiagonal(int d) {
  if (d < 2) throw std::invalid_argument("cz_additive_offdiagonal: need d >= 2");
  const int rows = d * (d - 1) / 2;
  IntMat A = IntMat::Zero(rows, d);
  IntVec c(rows);
  int r = 0;
  for (int j = 0; j < d; ++j)
    for (int m = j + 1; m < d; ++m, ++r) {
      A(r, j) = 1;
      A(r, m) = 1;
      c[r] = pos_mod(2ll * j * m, 2 * d);
    }

  AdditiveSplitResult out;
  if (!real_mod_feasible(A, c, 2 * d, &out.certificate)) return out;
  const GridSolve g = grid_solve(A, c, d);
  if (!g.ok)
    throw std::logic_error("cz_additive_offdiagonal: grid refinement exhausted");
  out.feasible = true;
  out.xi = g.angles;
  return out;
}

namespace {

// circular mean of two phases, stable under wrapping
double mean_phase(double a, double b) {
  return std::arg(std::exp(cxd(0, a)) + std::exp(cxd(0, b)));
}

}  // namespace

DiagonalSplitCheck diagonal_split_check(const Mat& u, int d) {
  const int dim = d * d;
  if (u.rows() != dim || u.cols() != dim)
    throw std::invalid_argument("diagonal_split_check: dimension mismatch");
  DiagonalSplitCheck out;
  for (int a = 0; a < dim; ++a)
    for (int b = 0; b < dim; ++b)
      if (a != b) out.max_offdiag = std::max(out.max_offdiag, std::abs(u(a, b)));

  const auto phase = [&](int j, int m) {
    return std::arg(u(j * d + m, j * d + m));
  };
  // symmetrized pair phases; the split never distinguishes |j,m> from |m,j>
  const auto sym = [&](int j, int m) { return mean_phase(phase(j, m), phase(m, j)); };

  std::vector<double> xi(d, 0.0);
  double best = 0.0;
  const auto residual_for = [&](const std::vector<double>& cand) {
    double res = 0.0;
    for (int j = 0; j < d; ++j)
      for (int m = 0; m < d; ++m)
        if (j != m)
          res = std::max(res, std::abs(wrap_angle(phase(j, m) - cand[j] - cand[m])));
    return res;
  };

  if (d == 2) {
    xi = {0.0, sym(0, 1)};
    best = residual_for(xi);
  } else {
    // xi_0 is determined mod pi by the (0,1), (0,2), (1,2) triangle; try both
    // branches and keep the better fit
    const double base = wrap_angle(sym(0, 1) + sym(0, 2) - sym(1, 2));
    best = -1.0;
    for (int branch = 0; branch < 2; ++branch) {
      std::vector<double> cand(d);
      cand[0] = wrap_angle(base / 2.0 + branch * pi);
      for (int m = 1; m < d; ++m) cand[m] = wrap_angle(sym(0, m) - cand[0]);
      const double res = residual_for(cand);
      if (best < 0 || res < best) {
        best = res;
        xi = cand;
      }
    }
  }
  out.split_residual = best;
  out.xi = std::move(xi);
  return out;
}

int lie_closure_dimension(const std::vector<Mat>& generators) {
  if (generators.empty())
    throw std::invalid_argument("lie_closure_dimension: no generators");
  const int n = static_cast<int>(generators.front().rows());
  std::vector<Mat> basis;  // orthonormal traceless anti-Hermitian elements

  const auto add = [&](Mat m) {
    m -= (m.trace() / double(n)) * Mat::Identity(n, n);
    // two projection passes keep the basis orthonormal as it grows
    for (int pass = 0; pass < 2; ++pass)
      for (const Mat& b : basis) m -= (b.adjoint() * m).trace() * b;
    const double nrm = std::sqrt(std::abs((m.adjoint() * m).trace()));
    if (nrm < 1e-9) return;
    basis.push_back(m / nrm);
  };

  for (const Mat& h : generators) {
    if (h.rows() != n || h.cols() != n)
      throw std::invalid_argument("lie_closure_dimension: mixed dimensions");
    if ((h - h.adjoint()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("lie_closure_dimension: generators must be Hermitian");
    add(cxd(0, 1) * h);
  }
  for (size_t i = 0; i < basis.size(); ++i)
    for (size_t j = 0; j < i; ++j)
      add(basis[i] * basis[j] - basis[j] * basis[i]);
  return static_cast<int>(basis.size());
}

std::vector<Mat> ladder_drive_generators(int d) {
  if (d < 2) throw std::invalid_argument("ladder_drive_generators: need d >= 2");
  std::vector<Mat> gens;
  for (int j = 0; j + 1 < d; ++j) {
    gens.push_back(tone_op_x(d, j, j + 1));
    gens.push_back(tone_op_y(d, j, j + 1));
  }
  return gens;
}

namespace {

Mat permutation_matrix(const std::vector<int>& sigma) {
  const int n = static_cast<int>(sigma.size());
  Mat p = Mat::Zero(n, n);
  for (int v = 0; v < n; ++v) p(sigma[v], v) = 1.0;
  return p;
}

std::string permutation_label(const std::vector<int>& sigma) {
  std::string s = "perm";
  for (int v : sigma) s += std::to_string(v);
  return s;
}

}  // namespace

GateSequence lower_to_two_rydberg(const GateSequence& seq, std::vector<int> physical) {
  const int d = seq.d;
  if (physical.empty()) physical = d == 2 ? std::vector<int>{1} : std::vector<int>{1, 2};
  if (int(physical.size()) > 2)
    throw std::invalid_argument("lower_to_two_rydberg: at most two coupled levels");
  for (int p : physical)
    if (p < 1 || p >= d)
      throw std::invalid_argument("lower_to_two_rydberg: coupled level out of range");

  GateSequence out;
  out.d = d;
  for (const GateStep& s : seq.steps) {
    if (s.kind != GateStep::Kind::Cr) {
      out.steps.push_back(s);
      continue;
    }
    if (s.targets.size() > physical.size())
      throw std::invalid_argument("lower_to_two_rydberg: step drives more levels than the scheme couples");
    // sigma maps each target onto a physical level; the remaining levels
    // absorb the displaced images so sigma stays a bijection
    std::vector<int> sigma(d);
    for (int v = 0; v < d; ++v) sigma[v] = v;
    for (size_t k = 0; k < s.targets.size(); ++k) {
      const int want = physical[k];
      int at = -1;
      for (int v = 0; v < d; ++v)
        if (sigma[v] == want) at = v;
      std::swap(sigma[s.targets[k]], sigma[at]);
    }
    bool identity = true;
    for (int v = 0; v < d; ++v) identity &= sigma[v] == v;

    std::vector<int> routed(physical.begin(), physical.begin() + s.targets.size());
    std::sort(routed.begin(), routed.end());
    if (identity) {
      out.steps.push_back(GateStep::cr(routed, s.theta));
      continue;
    }
    const Mat p = permutation_matrix(sigma);
    out.steps.push_back(GateStep::local_both(p, permutation_label(sigma)));
    out.steps.push_back(GateStep::cr(routed, s.theta));
    out.steps.push_back(GateStep::local_both(p.adjoint(), permutation_label(sigma) + "_inv"));
  }
  return out;
}

json sequence_to_json(const GateSequence& seq) {
  json j;
  stamp(j, "sequence");
  j["d"] = seq.d;
  j["cr_count"] = seq.cr_count();
  json steps = json::array();
  for (const GateStep& s : seq.steps) {
    json e;
    switch (s.kind) {
      case GateStep::Kind::Cr:
        e["type"] = "cr";
        e["targets"] = s.targets;
        e["theta"] = format_angle(s.theta);
        e["theta_rad"] = s.theta;
        break;
      case GateStep::Kind::Local:
        e["type"] = "single";
        e["matrix"] = matrix_to_json(s.local);
        if (!s.label.empty()) e["name"] = s.label;
        break;
      case GateStep::Kind::Virtual:
        e["type"] = "virtual";
        e["level"] = s.level;
        e["theta"] = format_angle(s.theta);
        e["theta_rad"] = s.theta;
        break;
    }
    e["describe"] = s.describe();
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  return j;
}

GateSequence sequence_from_json(const json& j) {
  require_kind(j, "sequence");
  GateSequence seq;
  seq.d = j.at("d").get<int>();
  if (seq.d < 2) throw std::runtime_error("sequence_from_json: need d >= 2");
  for (const json& e : j.at("steps")) {
    const std::string type = e.at("type").get<std::string>();
    if (type == "cr") {
      seq.steps.push_back(GateStep::cr(e.at("targets").get<std::vector<int>>(),
                                       e.at("theta_rad").get<double>()));
    } else if (type == "single") {
      Mat m = matrix_from_json(e.at("matrix"));
      if (m.rows() != seq.d || m.cols() != seq.d)
        throw std::runtime_error("sequence_from_json: single step must be d x d");
      seq.steps.push_back(GateStep::local_both(std::move(m), e.value("name", "")));
    } else if (type == "virtual") {
      seq.steps.push_back(GateStep::virtual_phase(e.at("level").get<int>(),
                                                  e.at("theta_rad").get<double>()));
    } else {
      throw std::runtime_error("sequence_from_json: unknown step type '" + type + "'");
    }
  }
  return seq;
}

}  // namespace qoc
