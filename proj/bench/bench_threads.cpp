// Compares the OpenMP-parallel kernels against the serial reference paths:
// Monte Carlo trajectories and multi-start pulse optimization. Both paths
// must produce identical numbers; the benchmark reports wall time and the
// speedup actually realized on this machine.

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "qoc/noise.hpp"
#include "qoc/par.hpp"
#include "qoc/synth.hpp"

using namespace qoc;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

PulseSchedule hold_pulse(double T, int n, double amp) {
  CrSpec s;
  s.d = 2;
  s.targets = {1};
  PulseSchedule ps;
  ps.tones = s.tones();
  ps.grid = TimeGrid{T, n};
  ps.amp_frac = {std::vector<double>(n, amp)};
  ps.phase = {std::vector<double>(n, 0.0)};
  ps.label = "hold";
  ps.theta = pi;
  ps.target_levels = {1};
  ps.chi = {0.0};
  return ps;
}

}  // namespace

int main(int argc, char** argv) {
  const int n_traj = argc > 1 ? std::atoi(argv[1]) : 4000;
  std::printf("trajectory engine: %d trajectories of a 2 us hold pulse\n", n_traj);

  CrSpec spec;
  spec.d = 2;
  spec.targets = {1};
  spec.theta = pi;
  spec.blockade_V = 1e5;  // soft blockade keeps long slices well-conditioned
  const Protocol prot = pulse_protocol(hold_pulse(2e-6, 256, 0.25), spec);
  NoiseModel nm;
  nm.tau_ryd = 5e-6;

  TrajectoryConfig cfg;
  cfg.n_traj = n_traj;
  cfg.seed = 2024;

  cfg.serial = true;
  auto t0 = clock_type::now();
  const SimResult rs = simulate_protocol(prot, nm, cfg);
  const double ts = seconds_since(t0);

  cfg.serial = false;
  t0 = clock_type::now();
  const SimResult rp = simulate_protocol(prot, nm, cfg);
  const double tp = seconds_since(t0);

  std::printf("  serial   %.3f s   fidelity %.6f +- %.6f, %.4f jumps/run\n", ts,
              rs.fidelity, rs.std_error, rs.mean_jumps);
  std::printf("  parallel %.3f s   fidelity %.6f +- %.6f, %.4f jumps/run\n", tp,
              rp.fidelity, rp.std_error, rp.mean_jumps);
  std::printf("  speedup %.2fx, results %s\n", ts / tp,
              rs.fidelity == rp.fidelity && rs.mean_jumps == rp.mean_jumps &&
                      rs.jump_histogram == rp.jump_histogram
                  ? "identical"
                  : "DIFFER");

  std::printf("pulse optimization: 8 restarts of a proxy interaction pulse\n");
  CrSpec proxy;
  proxy.d = 2;
  proxy.targets = {1};
  proxy.theta = 2.0 * pi / 3.0;
  const double T = 7.8 / kOmegaBar;
  const GrapeProblem p = cr_problem(proxy, T, slice_count(T, kOmegaBar, 0.04));
  MultiStartOptions ms;
  ms.optim.use_chi = true;
  ms.optim.seed = 905;
  ms.optim.max_iters = 400;

  ms.serial = true;
  t0 = clock_type::now();
  const MultiStartResult os = grape_multistart(p, ms);
  const double gs = seconds_since(t0);

  ms.serial = false;
  t0 = clock_type::now();
  const MultiStartResult op = grape_multistart(p, ms);
  const double gp = seconds_since(t0);

  std::printf("  serial   %.3f s   best fidelity %.8f\n", gs, os.best.f);
  std::printf("  parallel %.3f s   best fidelity %.8f\n", gp, op.best.f);
  std::printf("  speedup %.2fx, results %s\n", gs / gp,
              os.best.f == op.best.f ? "identical" : "DIFFER");
  return 0;
}
