#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "qoc/gates.hpp"
#include "qoc/sequence.hpp"
#include "qoc/zmod.hpp"

using namespace qoc;

namespace {

IntMat random_int_matrix(std::mt19937_64& rng, int m, int n, int span) {
  std::uniform_int_distribution<int> dist(-span, span);
  IntMat a(m, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = dist(rng);
  return a;
}

double det_magnitude(const IntMat& a) {
  Eigen::MatrixXd d = a.cast<double>();
  return std::abs(d.determinant());
}

long long mod_reduce(long long v, long long L) {
  const long long r = v % L;
  return r < 0 ? r + L : r;
}

}  // namespace

TEST_CASE("smith normal form factors random integer matrices") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 60; ++trial) {
    const int m = 1 + int(rng() % 6);
    const int n = 1 + int(rng() % 5);
    const IntMat a = random_int_matrix(rng, m, n, 3);
    const SmithForm s = smith_normal_form(a);
    CAPTURE(trial);

    CHECK((s.U * a * s.V - s.D).cwiseAbs().maxCoeff() == 0);
    CHECK(det_magnitude(s.U) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(det_magnitude(s.V) == doctest::Approx(1.0).epsilon(1e-6));

    // diagonal, ordered by divisibility, rank consistent
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j)
        if (i != j) CHECK(s.D(i, j) == 0);
    const int k = std::min(m, n);
    for (int i = 0; i + 1 < k; ++i) {
      if (s.D(i + 1, i + 1) != 0) {
        REQUIRE(s.D(i, i) != 0);
        CHECK(s.D(i + 1, i + 1) % s.D(i, i) == 0);
      }
    }
    int rank = 0;
    for (int i = 0; i < k; ++i)
      if (s.D(i, i) != 0) ++rank;
    CHECK(rank == s.rank);
  }
}

TEST_CASE("modular solver finds planted solutions and certifies failures") {
  std::mt19937_64 rng(777);
  int infeasible_seen = 0;
  for (int trial = 0; trial < 80; ++trial) {
    const int m = 1 + int(rng() % 5);
    const int n = 1 + int(rng() % 5);
    const long long L = 2 + int(rng() % 12);
    const IntMat a = random_int_matrix(rng, m, n, 3);
    CAPTURE(trial);

    // planted right-hand side is always solvable, and the returned solution
    // must satisfy the system exactly
    IntVec x0(n);
    for (int j = 0; j < n; ++j) x0[j] = rng() % L;
    IntVec c = a * x0;
    for (int i = 0; i < m; ++i) c[i] = mod_reduce(c[i], L);
    const ModSolution sol = solve_mod(a, c, L);
    REQUIRE(sol.feasible);
    const IntVec check = a * sol.x - c;
    for (int i = 0; i < m; ++i) CHECK(mod_reduce(check[i], L) == 0);

    // a random right-hand side may be infeasible; then the certificate must
    // kill the matrix mod L but not the target
    IntVec cr(m);
    for (int i = 0; i < m; ++i) cr[i] = rng() % L;
    const ModSolution sr = solve_mod(a, cr, L);
    if (!sr.feasible) {
      ++infeasible_seen;
      REQUIRE(sr.certificate.size() == m);
      const IntVec ua = a.transpose() * sr.certificate;
      for (int j = 0; j < n; ++j) CHECK(mod_reduce(ua[j], L) == 0);
      CHECK(mod_reduce(sr.certificate.dot(cr), L) != 0);
    }
  }
  CHECK(infeasible_seen > 5);  // the sweep must actually exercise that branch
}

TEST_CASE("left kernel vectors annihilate the matrix") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + int(rng() % 4);
    const int n = 1 + int(rng() % 3);
    const IntMat a = random_int_matrix(rng, m, n, 2);
    const auto kernel = left_kernel(a);
    const SmithForm s = smith_normal_form(a);
    CHECK(int(kernel.size()) == m - s.rank);
    for (const IntVec& u : kernel) CHECK((a.transpose() * u).cwiseAbs().maxCoeff() == 0);
  }
}

TEST_CASE("controlled-phase compilation reproduces cz exactly for d = 2..8") {
  for (int d = 2; d <= 8; ++d) {
    CAPTURE(d);
    const GateSequence seq = compile_cz(d);
    const Mat u = sequence_to_unitary(seq);
    CHECK((u - cz_gate(d)).cwiseAbs().maxCoeff() < 1e-12);
    for (const GateStep& s : seq.steps) {
      CHECK(s.kind == GateStep::Kind::Cr);
      CHECK(std::abs(s.theta) > 1e-12);       // trivial pulses are elided
      CHECK(std::abs(s.theta) < pi + 1e-12);  // wrapped to (-pi, pi]
    }
  }
}

TEST_CASE("compiled pulse counts and angle catalog match the expected family") {
  CHECK(compile_cz(2).cr_count() == 1);
  CHECK(compile_cz(3).cr_count() == 3);
  CHECK(compile_cz(4).cr_count() == 3);
  CHECK(compile_cz(5).cr_count() == 10);

  // d = 3: every pulse is the same 2pi/3-magnitude angle
  for (const GateStep& s : compile_cz(3).steps)
    CHECK(std::abs(s.theta) == doctest::Approx(2.0 * pi / 3.0).epsilon(1e-12));

  // d = 4: the diagonal corrections vanish, leaving only the three pairs
  const GateSequence q4 = compile_cz(4);
  REQUIRE(q4.steps.size() == 3);
  for (const GateStep& s : q4.steps) CHECK(s.targets.size() == 2);

  // distinct |theta| values over d = 2..8 form an 11-angle catalog
  std::set<long long> catalog;
  for (int d = 2; d <= 8; ++d)
    for (const GateStep& s : compile_cz(d).steps)
      catalog.insert(llround(std::abs(s.theta) * 1e12));
  CHECK(catalog.size() == 11);
}

TEST_CASE("echoed single-tone qutrit sequence equals cz up to a global phase") {
  const GateSequence seq = compile_cz_qutrit_single_rydberg();
  CHECK(seq.cr_count() == 3);
  for (const GateStep& s : seq.steps)
    if (s.kind == GateStep::Kind::Cr) {
      CHECK(s.targets == std::vector<int>{2});
      CHECK(s.theta == doctest::Approx(-2.0 * pi / 3.0).epsilon(1e-12));
    }
  const Mat u = sequence_to_unitary(seq);
  CHECK(max_dev_up_to_global_phase(u, cz_gate(3)) < 1e-12);
  // the sequence is genuinely nontrivial: without the closing virtual phase
  // it is not cz
  GateSequence bare = seq;
  bare.steps.pop_back();
  CHECK(max_dev_up_to_global_phase(sequence_to_unitary(bare), cz_gate(3)) > 0.1);
}

TEST_CASE("pulse-count minimization finds seven pulses for d = 5 at three tones") {
  const PulseCountResult r = minimize_pulse_count(5, 3);
  REQUIRE(r.found);
  CHECK(r.pulses <= 7);
  CHECK(r.proven_minimal);
  CHECK(int(r.seq.steps.size()) == r.pulses);
  for (const auto& s : r.tone_sets) CHECK(s.size() <= 3);
  CHECK(max_dev_up_to_global_phase(sequence_to_unitary(r.seq), cz_gate(5)) < 1e-9);
}

TEST_CASE("pulse-count minimization agrees with the closed form on small d") {
  // d = 2: the single diagonal pulse; d = 3: three pulses even with pairs
  const PulseCountResult r2 = minimize_pulse_count(2, 1);
  REQUIRE(r2.found);
  CHECK(r2.pulses == 1);
  CHECK(max_dev_up_to_global_phase(sequence_to_unitary(r2.seq), cz_gate(2)) < 1e-12);

  const PulseCountResult r3 = minimize_pulse_count(3, 2);
  REQUIRE(r3.found);
  CHECK(r3.pulses == 3);
  CHECK(max_dev_up_to_global_phase(sequence_to_unitary(r3.seq), cz_gate(3)) < 1e-12);

  // d = 4: pairs only, three pulses beat the four-pulse singleton family
  const PulseCountResult r4 = minimize_pulse_count(4, 2);
  REQUIRE(r4.found);
  CHECK(r4.pulses == 3);
  CHECK(max_dev_up_to_global_phase(sequence_to_unitary(r4.seq), cz_gate(4)) < 1e-12);
}

TEST_CASE("additive off-diagonal split is feasible for d <= 3 and refuted beyond") {
  for (int d = 2; d <= 3; ++d) {
    CAPTURE(d);
    const AdditiveSplitResult r = cz_additive_offdiagonal(d);
    REQUIRE(r.feasible);
    for (int j = 0; j < d; ++j)
      for (int m = j + 1; m < d; ++m)
        CHECK(std::abs(wrap_angle(2.0 * pi * j * m / d - r.xi[j] - r.xi[m])) < 1e-12);
  }
  for (int d = 4; d <= 8; ++d) {
    CAPTURE(d);
    const AdditiveSplitResult r = cz_additive_offdiagonal(d);
    CHECK_FALSE(r.feasible);
    REQUIRE(r.certificate.size() == d * (d - 1) / 2);
    // the certificate is an exact integer refutation: it annihilates every
    // xi column but pairs with the target to a nonzero residue mod 2d
    long long dot = 0;
    int row = 0;
    std::vector<long long> cols(d, 0);
    for (int j = 0; j < d; ++j)
      for (int m = j + 1; m < d; ++m, ++row) {
        cols[j] += r.certificate[row];
        cols[m] += r.certificate[row];
        dot += r.certificate[row] * mod_reduce(2ll * j * m, 2 * d);
      }
    for (int j = 0; j < d; ++j) CHECK(cols[j] == 0);
    CHECK(mod_reduce(dot, 2 * d) != 0);
  }
}

TEST_CASE("split check recovers planted per-level phases across 200 cases") {
  std::mt19937_64 rng(20240803);
  std::uniform_real_distribution<double> ang(-pi, pi);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 3 + int(rng() % 6);  // 3..8
    CAPTURE(trial);
    CAPTURE(d);
    std::vector<double> xi(d);
    for (double& v : xi) v = ang(rng);
    // off-diagonal pairs split additively; diagonal pairs carry arbitrary
    // interaction phases, which the check must ignore
    Mat u = Mat::Zero(d * d, d * d);
    for (int j = 0; j < d; ++j)
      for (int m = 0; m < d; ++m) {
        const double ph = j == m ? ang(rng) : xi[j] + xi[m];
        u(j * d + m, j * d + m) = std::exp(cxd(0, ph));
      }
    const DiagonalSplitCheck chk = diagonal_split_check(u, d);
    CHECK(chk.max_offdiag == 0.0);
    CHECK(chk.split_residual < 1e-9);
    // recovered phases reproduce every off-diagonal pair phase
    for (int j = 0; j < d; ++j)
      for (int m = 0; m < d; ++m)
        if (j != m)
          CHECK(std::abs(wrap_angle(xi[j] + xi[m] - chk.xi[j] - chk.xi[m])) < 1e-9);
  }
}

TEST_CASE("split check rejects cz for d >= 4 and accepts the qutrit sequence") {
  for (int d = 4; d <= 6; ++d) {
    CAPTURE(d);
    CHECK(diagonal_split_check(cz_gate(d), d).split_residual > 0.1);
  }
  // the echoed qutrit protocol yields a gate whose off-diagonal phases do
  // split, as the obstruction analysis predicts
  CHECK(diagonal_split_check(cz_gate(3), 3).split_residual < 1e-12);
  CHECK(diagonal_split_check(sequence_to_unitary(compile_cz_qutrit_single_rydberg()), 3)
            .split_residual < 1e-12);
}

TEST_CASE("ladder drive generates the full unitary algebra for d = 2..5") {
  for (int d = 2; d <= 5; ++d) {
    CAPTURE(d);
    CHECK(lie_closure_dimension(ladder_drive_generators(d)) == d * d - 1);
  }
  // a single transition of a qutrit generates only su(2)
  std::vector<Mat> partial = ladder_drive_generators(3);
  partial.resize(2);
  CHECK(lie_closure_dimension(partial) == 3);
}

TEST_CASE("lowering re-routes every pulse onto two coupled levels") {
  for (int d = 2; d <= 8; ++d) {
    CAPTURE(d);
    const GateSequence seq = compile_cz(d);
    const GateSequence low = lower_to_two_rydberg(seq);
    CHECK(low.cr_count() == seq.cr_count());
    // only the physical levels are ever driven
    const std::vector<int> phys = d == 2 ? std::vector<int>{1} : std::vector<int>{1, 2};
    for (const GateStep& s : low.steps)
      if (s.kind == GateStep::Kind::Cr)
        for (int t : s.targets)
          CHECK(std::count(phys.begin(), phys.end(), t) == 1);
    // conjugation by level permutations preserves the overall unitary
    CHECK((sequence_to_unitary(low) - sequence_to_unitary(seq)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((sequence_to_unitary(low) - cz_gate(d)).cwiseAbs().maxCoeff() < 1e-9);
  }
  // a custom coupled pair works too, and permutations never touch level 0
  const GateSequence low23 = lower_to_two_rydberg(compile_cz(5), {2, 3});
  CHECK((sequence_to_unitary(low23) - cz_gate(5)).cwiseAbs().maxCoeff() < 1e-9);
  for (const GateStep& s : low23.steps)
    if (s.kind == GateStep::Kind::Local) CHECK(std::abs(s.local(0, 0) - 1.0) < 1e-15);
  // an over-budget request is rejected
  CHECK_THROWS_AS(lower_to_two_rydberg(compile_cz(4), {1}), std::invalid_argument);
}

TEST_CASE("sequences round trip through their json form") {
  for (int d : {2, 3, 5}) {
    CAPTURE(d);
    GateSequence seq = lower_to_two_rydberg(compile_cz(d));
    seq.steps.push_back(GateStep::virtual_phase(1, -0.125));
    const json j = sequence_to_json(seq);
    CHECK(j["cr_count"].get<int>() == seq.cr_count());
    const GateSequence back = sequence_from_json(j);
    CHECK(back.d == d);
    REQUIRE(back.steps.size() == seq.steps.size());
    for (size_t k = 0; k < seq.steps.size(); ++k) {
      CHECK(back.steps[k].kind == seq.steps[k].kind);
      CHECK(back.steps[k].targets == seq.steps[k].targets);
      CHECK(back.steps[k].theta == seq.steps[k].theta);
    }
    CHECK((sequence_to_unitary(back) - sequence_to_unitary(seq)).cwiseAbs().maxCoeff() == 0.0);
  }
  // the qutrit single-Rydberg route serializes its local shifts faithfully
  const GateSequence eseq = compile_cz_qutrit_single_rydberg();
  const GateSequence eback = sequence_from_json(sequence_to_json(eseq));
  CHECK((sequence_to_unitary(eback) - sequence_to_unitary(eseq)).cwiseAbs().maxCoeff() == 0.0);
  json bad = sequence_to_json(eseq);
  bad["steps"][0]["type"] = "mystery";
  CHECK_THROWS_AS(sequence_from_json(bad), std::runtime_error);
}
