#include "qoc/noise.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "qoc/drive.hpp"
#include "qoc/par.hpp"
#include "qoc/rng.hpp"

namespace qoc {

Shot sample_shot(const NoiseModel& nm, std::mt19937_64& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  Shot s;
  s.detuning = nm.sigma_det * unit(rng);
  // the intensity is normal with the given relative variance; the field
  // amplitude is its square root, floored at zero
  s.amp_scale = std::sqrt(std::max(0.0, 1.0 + std::sqrt(nm.intensity_rel_var) * unit(rng)));
  return s;
}

double Protocol::total_pulse_time() const {
  double t = 0.0;
  for (const Step& s : steps)
    if (s.is_pulse) t += s.pulse.grid.T;
  return t;
}

Protocol pulse_protocol(const PulseSchedule& ps, const CrSpec& spec) {
  spec.validate();
  Protocol p;
  p.d = spec.d;
  p.scheme = spec.scheme();
  p.blockade_V = spec.blockade_V;
  p.crosstalk_delta = spec.crosstalk_delta;
  const std::set<int> t(spec.targets.begin(), spec.targets.end());
  p.target = cr_gate(spec.d, t, spec.theta);
  Protocol::Step st;
  st.is_pulse = true;
  st.pulse = ps;
  st.label = ps.label;
  p.steps.push_back(std::move(st));
  return p;
}

Protocol sequence_protocol(const GateSequence& seq,
                           const std::function<PulseSchedule(const GateStep&)>& resolve,
                           double blockade_V, double crosstalk_delta) {
  Protocol p;
  p.d = seq.d;
  p.blockade_V = blockade_V;
  p.crosstalk_delta = crosstalk_delta;
  p.target = sequence_to_unitary(seq);
  std::set<int> coupled;
  for (const GateStep& s : seq.steps) {
    Protocol::Step st;
    switch (s.kind) {
      case GateStep::Kind::Cr: {
        st.is_pulse = true;
        st.pulse = resolve(s);
        if (std::abs(wrap_angle(st.pulse.theta - s.theta)) > 1e-9)
          throw std::invalid_argument(
              "sequence_protocol: resolved pulse angle does not match the step");
        for (const DriveTone& t : st.pulse.tones) coupled.insert(t.lower);
        st.label = st.pulse.label;
        break;
      }
      case GateStep::Kind::Local:
        st.local = s.local;
        st.label = s.describe();
        break;
      case GateStep::Kind::Virtual:
        st.local = phase_gate(seq.d, s.level, s.theta);
        st.label = s.describe();
        break;
    }
    p.steps.push_back(std::move(st));
  }
  p.scheme = LevelScheme{seq.d, std::vector<int>(coupled.begin(), coupled.end())};
  p.scheme.validate();
  return p;
}

namespace {

struct PulsePlan {
  TimeGrid grid;
  std::vector<Mat> drive;  // per-slice drive Hamiltonian at nominal amplitude
  Vec static_diag;         // complex drift diagonal (blockade shift)
  Vec chi_correction;      // frame-phase diagonal applied after the pulse
};

struct StepPlan {
  bool is_pulse = false;
  PulsePlan pulse;
  bool exact_diagonal = false;
  Vec exact_diag;
  Mat exact_full;
};

struct EnginePlan {
  TwoAtomSpace space;
  int dim = 0;
  Eigen::VectorXd n_ryd;  // Rydberg excitation count per basis state
  std::vector<std::vector<std::pair<int, int>>> decay_maps;  // (src, dst)
  std::vector<StepPlan> steps;
  Vec psi0;
  Vec tar;

  explicit EnginePlan(const TwoAtomSpace& s) : space(s) {}
};

EnginePlan make_plan(const Protocol& p, const Vec& initial, const Vec& target_state) {
  p.scheme.validate();
  EnginePlan plan{TwoAtomSpace(p.scheme, std::isinf(p.blockade_V))};
  const TwoAtomSpace& space = plan.space;
  const int dim = space.dim();
  plan.dim = dim;
  plan.n_ryd.resize(dim);
  for (int i = 0; i < dim; ++i) plan.n_ryd[i] = double(space.ryd_count(i));

  // one decay channel per atom per Rydberg level, all feeding level 0
  for (int atom = 0; atom < 2; ++atom)
    for (int k = 0; k < p.scheme.n_ryd(); ++k) {
      const int rl = p.scheme.ryd_index(k);
      std::vector<std::pair<int, int>> map;
      for (int i = 0; i < dim; ++i) {
        const auto [la, lb] = space.levels_of(i);
        if ((atom == 0 ? la : lb) != rl) continue;
        map.emplace_back(i, atom == 0 ? space.index_of(0, lb) : space.index_of(la, 0));
      }
      plan.decay_maps.push_back(std::move(map));
    }

  const int d = p.d;
  const auto& comp = space.comp_indices();
  if (initial.size() > 0) {
    if (initial.size() != dim)
      throw std::invalid_argument("simulate_protocol: initial state dimension mismatch");
    plan.psi0 = initial.normalized();
  } else {
    plan.psi0 = Vec::Zero(dim);
    for (int i = 0; i < d * d; ++i) plan.psi0[comp[i]] = 1.0 / d;
  }
  if (target_state.size() > 0) {
    if (target_state.size() != dim)
      throw std::invalid_argument("simulate_protocol: target state dimension mismatch");
    plan.tar = target_state.normalized();
  } else {
    if (p.target.rows() != d * d || p.target.cols() != d * d)
      throw std::invalid_argument("simulate_protocol: target gate dimension mismatch");
    Vec c0(d * d);
    for (int i = 0; i < d * d; ++i) c0[i] = 1.0 / d;
    const Vec tc = p.target * c0;
    plan.tar = Vec::Zero(dim);
    for (int i = 0; i < d * d; ++i) plan.tar[comp[i]] = tc[i];
    plan.tar.normalize();
  }

  for (const Protocol::Step& s : p.steps) {
    StepPlan sp;
    if (s.is_pulse) {
      sp.is_pulse = true;
      const PulseSchedule& ps = s.pulse;
      ps.validate();
      // map each laser onto the shared scheme by its driven lower level
      std::vector<DriveTone> tones;
      for (const DriveTone& t : ps.tones) {
        int pos = -1;
        for (int k = 0; k < p.scheme.n_ryd(); ++k)
          if (p.scheme.coupled[k] == t.lower) pos = k;
        if (pos < 0)
          throw std::invalid_argument("simulate_protocol: pulse drives level " +
                                      std::to_string(t.lower) +
                                      " outside the protocol scheme");
        tones.push_back({t.lower, p.scheme.ryd_index(pos), t.cap});
      }
      const ControlModel model =
          p.crosstalk_delta > 0
              ? crosstalk_model(space, tones, p.crosstalk_delta, p.blockade_V)
              : two_atom_model(space, tones, p.blockade_V);
      sp.pulse.grid = ps.grid;
      sp.pulse.static_diag = model.h_static.diagonal();
      const Eigen::MatrixXd u = ps.controls();
      sp.pulse.drive.reserve(ps.grid.N);
      for (int r = 0; r < ps.grid.N; ++r) {
        Mat m = Mat::Zero(dim, dim);
        const double t = sp.pulse.grid.midpoint(r);
        for (int c = 0; c < model.n_controls(); ++c)
          if (u(c, r) != 0.0) m += u(c, r) * model.channels[c].direction(t, dim);
        sp.pulse.drive.push_back(std::move(m));
      }
      Vec corr = Vec::Ones(dim);
      for (int k = 0; k < ps.n_tones(); ++k) {
        const double chi = k < int(ps.chi.size()) ? ps.chi[k] : 0.0;
        if (chi == 0.0) continue;
        for (int i = 0; i < dim; ++i) {
          const auto [la, lb] = space.levels_of(i);
          const int cnt = (la == ps.tones[k].lower) + (lb == ps.tones[k].lower);
          if (cnt) corr[i] *= std::polar(1.0, -chi * cnt);
        }
      }
      sp.pulse.chi_correction = std::move(corr);
    } else {
      if (s.local.rows() != d || s.local.cols() != d)
        throw std::invalid_argument("simulate_protocol: local step must be d x d");
      Mat ua = Mat::Identity(p.scheme.atom_dim(), p.scheme.atom_dim());
      ua.topLeftCorner(d, d) = s.local;
      // the same local unitary acts on both atoms: U (x) U, not the
      // additive Hamiltonian embedding
      const Mat full = plan.space.embed_one(ua, 0) * plan.space.embed_one(ua, 1);
      double offdiag = 0.0;
      for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
          if (a != b) offdiag = std::max(offdiag, std::abs(full(a, b)));
      if (offdiag < 1e-15) {
        sp.exact_diagonal = true;
        sp.exact_diag = full.diagonal();
      } else {
        sp.exact_full = full;
      }
    }
    plan.steps.push_back(std::move(sp));
  }
  return plan;
}

// one slice of exp(-i dt (diag + amp * M)) psi by mean-shifted Taylor series
void taylor_slice(const Mat& m, const Vec& dshift, cxd step_phase, double amp,
                  double dt, Vec& psi, Vec& term, Vec& tmp) {
  term = psi;
  for (int k = 1; k <= 40; ++k) {
    tmp.noalias() = m * term;
    term = cxd(0.0, -dt / k) * (dshift.cwiseProduct(term) + amp * tmp);
    psi += term;
    if (term.squaredNorm() < 1e-30) {
      psi *= step_phase;
      return;
    }
  }
  throw std::runtime_error("simulate_protocol: slice too stiff for the series");
}

void run_trajectory(const EnginePlan& plan, const NoiseModel& nm, std::uint64_t seed,
                    int index, double& fid_out, int* jumps_by_step) {
  auto rng = rng_stream(seed, std::uint64_t(index));
  const Shot shot = sample_shot(nm, rng);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double inv_tau = std::isinf(nm.tau_ryd) ? 0.0 : 1.0 / nm.tau_ryd;
  const int dim = plan.dim;

  Vec psi = plan.psi0;
  Vec term(dim), tmp(dim), diag(dim), dshift(dim);
  double xi = uni(rng);
  for (size_t si = 0; si < plan.steps.size(); ++si) {
    const StepPlan& sp = plan.steps[si];
    if (!sp.is_pulse) {
      if (sp.exact_diagonal)
        psi = sp.exact_diag.cwiseProduct(psi);
      else {
        tmp.noalias() = sp.exact_full * psi;
        psi = tmp;
      }
      continue;
    }
    const PulsePlan& pp = sp.pulse;
    const double dt = pp.grid.dt();
    for (int i = 0; i < dim; ++i)
      diag[i] = pp.static_diag[i] +
                cxd(shot.detuning * plan.n_ryd[i], -0.5 * inv_tau * plan.n_ryd[i]);
    const cxd mu = diag.mean();
    dshift = diag.array() - mu;
    const cxd step_phase = std::exp(cxd(0.0, -1.0) * dt * mu);

    for (int r = 0; r < pp.grid.N; ++r) {
      taylor_slice(pp.drive[r], dshift, step_phase, shot.amp_scale, dt, psi, term, tmp);
      const double n2 = psi.squaredNorm();
      if (n2 >= xi) continue;

      // a jump fired inside this slice: pick the channel by its population
      double total = 0.0;
      for (const auto& ch : plan.decay_maps)
        for (const auto& [src, dst] : ch) total += std::norm(psi[src]);
      if (total <= 0.0) {
        // norm loss without Rydberg weight is numerical; rescale and go on
        psi /= std::sqrt(n2);
        xi = uni(rng);
        continue;
      }
      double pick = uni(rng) * total;
      size_t chosen = 0;
      for (size_t c = 0; c < plan.decay_maps.size(); ++c) {
        double w = 0.0;
        for (const auto& [src, dst] : plan.decay_maps[c]) w += std::norm(psi[src]);
        if (pick < w || c + 1 == plan.decay_maps.size()) {
          chosen = c;
          break;
        }
        pick -= w;
      }
      term.setZero();
      for (const auto& [src, dst] : plan.decay_maps[chosen]) term[dst] = psi[src];
      psi = term / term.norm();
      ++jumps_by_step[si];
      xi = uni(rng);
    }
    psi = pp.chi_correction.cwiseProduct(psi);
  }
  const double n2 = psi.squaredNorm();
  fid_out = std::norm(plan.tar.dot(psi)) / n2;
}

}  // namespace

SimResult simulate_protocol(const Protocol& p, const NoiseModel& nm,
                            const TrajectoryConfig& cfg) {
  if (cfg.n_traj < 1) throw std::invalid_argument("simulate_protocol: n_traj < 1");
  const EnginePlan plan = make_plan(p, cfg.initial, cfg.target_state);
  const int n_steps = int(plan.steps.size());
  std::vector<double> fids(cfg.n_traj, 0.0);
  std::vector<int> jumps(size_t(cfg.n_traj) * n_steps, 0);

  ParallelPlan par;
  par.serial = cfg.serial;
  parallel_for(
      cfg.n_traj,
      [&](int i) {
        run_trajectory(plan, nm, cfg.seed, i, fids[i], &jumps[size_t(i) * n_steps]);
      },
      par);

  SimResult out;
  out.n_traj = cfg.n_traj;
  const MeanStderr ms = mean_stderr(fids);
  out.fidelity = ms.mean;
  out.std_error = ms.stderr_;
  out.jumps_by_step.assign(n_steps, 0.0);
  long long total = 0;
  std::vector<long long> per_traj(cfg.n_traj, 0);
  for (int i = 0; i < cfg.n_traj; ++i)
    for (int s = 0; s < n_steps; ++s) {
      const int j = jumps[size_t(i) * n_steps + s];
      out.jumps_by_step[s] += j;
      per_traj[i] += j;
      total += j;
    }
  for (double& v : out.jumps_by_step) v /= cfg.n_traj;
  out.mean_jumps = double(total) / cfg.n_traj;
  const long long max_j = *std::max_element(per_traj.begin(), per_traj.end());
  out.jump_histogram.assign(size_t(max_j) + 1, 0);
  for (long long j : per_traj) ++out.jump_histogram[size_t(j)];
  return out;
}

SimResult benchmark_pulse(const PulseSchedule& ps, const CrSpec& spec,
                          const NoiseModel& nm, const TrajectoryConfig& cfg) {
  return simulate_protocol(pulse_protocol(ps, spec), nm, cfg);
}

double protocol_state_fidelity(const Protocol& p) {
  const EnginePlan plan = make_plan(p, Vec(), Vec());
  const int dim = plan.dim;
  Vec psi = plan.psi0;
  Vec term(dim), tmp(dim), dshift(dim);
  for (const StepPlan& sp : plan.steps) {
    if (!sp.is_pulse) {
      if (sp.exact_diagonal)
        psi = sp.exact_diag.cwiseProduct(psi);
      else {
        tmp.noalias() = sp.exact_full * psi;
        psi = tmp;
      }
      continue;
    }
    const PulsePlan& pp = sp.pulse;
    const double dt = pp.grid.dt();
    const cxd mu = pp.static_diag.mean();
    dshift = pp.static_diag.array() - mu;
    const cxd step_phase = std::exp(cxd(0.0, -1.0) * dt * mu);
    for (int r = 0; r < pp.grid.N; ++r)
      taylor_slice(pp.drive[r], dshift, step_phase, 1.0, dt, psi, term, tmp);
    psi = pp.chi_correction.cwiseProduct(psi);
  }
  return std::norm(plan.tar.dot(psi)) / psi.squaredNorm();
}

ScalingPrediction predict_cz_infidelity(int d, PulseLibrary& lib,
                                        const NoiseModel& nm,
                                        const SynthOptions& so) {
  ScalingPrediction out;
  out.d = d;
  double loss_sum = 0.0;
  for (const GateStep& s : compile_cz(d).steps) {
    CrSpec spec;
    spec.d = d;
    spec.targets = s.targets;
    spec.theta = s.theta;
    spec.omega_bar = so.omega_bar;
    const PulseSchedule real = realize_cr(lib.ensure_cr_proxy(s.theta, so), spec);
    PulsePrediction pp;
    pp.targets = s.targets;
    pp.theta = s.theta;
    pp.duration = real.grid.T;
    pp.chi_ryd = cr_chi_ryd(real, spec);
    pp.decay_loss = pp.chi_ryd * pp.duration / nm.tau_ryd;
    loss_sum += pp.decay_loss;
    out.total_time += pp.duration;
    out.pulses.push_back(std::move(pp));
  }
  out.predicted_infidelity = 1.0 - std::exp(-loss_sum);

  CrSpec pspec;
  pspec.d = d;
  pspec.targets = {1};
  pspec.theta = pi;
  pspec.omega_bar = so.omega_bar;
  const PulseSchedule pp = realize_cr(lib.ensure_cr_proxy(pi, so), pspec);
  const double s_pi = cr_chi_ryd(pp, pspec) * pp.grid.T / nm.tau_ryd;
  out.f1 = std::exp(-s_pi);
  out.closed_form_infidelity = 1.0 - std::exp(-s_pi * double((d - 1) * (d - 1)));
  return out;
}

}  // namespace qoc
