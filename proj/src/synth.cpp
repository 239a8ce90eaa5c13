#include "qoc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <set>
#include <stdexcept>

#include "qoc/io.hpp"
#include "qoc/rng.hpp"

namespace qoc {

std::vector<int> CrSpec::driven() const {
  if (both_lasers) return {1, 2};
  return targets;
}

void CrSpec::validate() const {
  if (d < 2) throw std::invalid_argument("CrSpec: need d >= 2");
  if (targets.empty() || targets.size() > 2)
    throw std::invalid_argument("CrSpec: one or two target levels");
  for (size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 1 || targets[i] >= d)
      throw std::invalid_argument("CrSpec: target level out of range");
    if (i > 0 && targets[i] <= targets[i - 1])
      throw std::invalid_argument("CrSpec: target levels must be ascending");
  }
  for (int l : driven())
    if (l < 1 || l >= d) throw std::invalid_argument("CrSpec: driven level out of range");
  if (crosstalk_delta > 0.0 && driven().size() != 2)
    throw std::invalid_argument("CrSpec: crosstalk needs both lasers active");
  if (!(omega_bar > 0.0)) throw std::invalid_argument("CrSpec: omega_bar must be positive");
  if (ramp_frac < 0.0 || ramp_frac > 0.25)
    throw std::invalid_argument("CrSpec: ramp_frac out of range");
}

LevelScheme CrSpec::scheme() const {
  LevelScheme sc;
  sc.d = d;
  sc.coupled = driven();
  sc.validate();
  return sc;
}

std::vector<DriveTone> CrSpec::tones() const {
  std::vector<DriveTone> ts;
  const auto dr = driven();
  for (size_t k = 0; k < dr.size(); ++k) ts.push_back({dr[k], d + int(k), omega_bar});
  return ts;
}

std::string CrSpec::describe() const {
  std::string s = "cr";
  for (int l : targets) s += std::to_string(l);
  return s + "(" + format_angle(theta) + ")";
}

int slice_count(double T, double omega_bar, double slice_rad) {
  if (!(T > 0.0) || !(omega_bar > 0.0) || !(slice_rad > 0.0))
    throw std::invalid_argument("slice_count: arguments must be positive");
  return std::max(32, int(std::ceil(T * omega_bar / slice_rad)));
}

GrapeProblem cr_problem(const CrSpec& spec, double T, int n_slices) {
  spec.validate();
  const bool perfect = std::isinf(spec.blockade_V);
  TwoAtomSpace space(spec.scheme(), perfect);
  GrapeProblem p;
  p.model = spec.crosstalk_delta > 0.0
                ? crosstalk_model(space, spec.tones(), spec.crosstalk_delta, spec.blockade_V)
                : two_atom_model(space, spec.tones(), spec.blockade_V);
  p.grid = {T, n_slices > 0 ? n_slices : slice_count(T, spec.omega_bar)};
  p.target =
      cr_gate(spec.d, std::set<int>(spec.targets.begin(), spec.targets.end()), spec.theta);
  p.comp = space.comp_indices();
  if (spec.ramp_frac > 0.0) p.envelope = ramp_profile(p.grid, spec.ramp_frac);
  for (int l : spec.driven()) {
    std::vector<int> w(p.comp.size());
    for (int i = 0; i < int(p.comp.size()); ++i) {
      const int a = i / spec.d, b = i % spec.d;  // comp states ordered a*d + b
      w[i] = int(a == l) + int(b == l);
    }
    p.chi_weights.push_back(std::move(w));
  }
  // the static blockade diagonal is integrated exactly on the spectral path,
  // so only the drive needs the slice resolution; widen the sanity bound
  if (!perfect) p.max_step_rad = spec.blockade_V * p.grid.dt() + 0.5;
  return p;
}

CrSpec proxy_spec(const CrSpec& spec) {
  spec.validate();
  CrSpec p;
  p.d = int(spec.targets.size()) + 1;
  p.targets.resize(spec.targets.size());
  std::iota(p.targets.begin(), p.targets.end(), 1);
  p.theta = spec.theta;
  p.omega_bar = spec.omega_bar;
  return p;
}

PulseSchedule realize_cr(const PulseSchedule& proxy, const CrSpec& spec) {
  spec.validate();
  if (proxy.n_tones() != 1)
    throw std::invalid_argument("realize_cr: proxy must be a single-tone pulse");
  const double want = wrap_angle(spec.theta);
  if (std::abs(want) < 1e-12) throw std::invalid_argument("realize_cr: trivial theta");
  PulseSchedule src = want * proxy.theta < 0.0 ? proxy.conjugated() : proxy;
  if (std::abs(wrap_angle(want - src.theta)) > 1e-9)
    throw std::invalid_argument("realize_cr: proxy angle does not match the spec");

  PulseSchedule ps;
  ps.tones = spec.tones();
  ps.grid = src.grid;
  for (size_t j = 0; j < ps.tones.size(); ++j) {
    ps.amp_frac.push_back(src.amp_frac[0]);
    ps.phase.push_back(src.phase[0]);
    ps.chi.push_back(src.chi.empty() ? 0.0 : src.chi[0]);
  }
  ps.label = "cr";
  for (int l : spec.targets) ps.label += std::to_string(l);
  ps.theta = want;
  ps.target_levels = spec.targets;
  ps.fidelity = cr_fidelity(ps, spec);
  return ps;
}

PulseSchedule spread_to_tones(const PulseSchedule& ps, const std::vector<DriveTone>& tones) {
  PulseSchedule out = ps;
  out.tones = tones;
  out.amp_frac.assign(tones.size(), std::vector<double>(ps.grid.N, 0.0));
  out.phase.assign(tones.size(), std::vector<double>(ps.grid.N, 0.0));
  out.chi.assign(tones.size(), 0.0);
  for (size_t j = 0; j < tones.size(); ++j)
    for (size_t k = 0; k < ps.tones.size(); ++k)
      if (ps.tones[k].lower == tones[j].lower) {
        out.amp_frac[j] = ps.amp_frac[k];
        out.phase[j] = ps.phase[k];
        if (k < ps.chi.size()) out.chi[j] = ps.chi[k];
      }
  return out;
}

namespace {

// pulses store the physical waveform, so verification drops the ramp envelope
CrSpec flat_spec(const CrSpec& spec) {
  CrSpec f = spec;
  f.ramp_frac = 0.0;
  return f;
}

void check_tone_match(const PulseSchedule& ps, const std::vector<DriveTone>& want) {
  if (ps.tones.size() != want.size())
    throw std::invalid_argument("pulse tone count does not match the spec");
  for (size_t j = 0; j < want.size(); ++j)
    if (ps.tones[j].lower != want[j].lower || ps.tones[j].upper != want[j].upper)
      throw std::invalid_argument("pulse tone levels do not match the spec");
}

Eigen::VectorXd chi_vec(const PulseSchedule& ps, int n_gauge) {
  Eigen::VectorXd chi = Eigen::VectorXd::Zero(n_gauge);
  for (int g = 0; g < std::min<int>(n_gauge, int(ps.chi.size())); ++g) chi[g] = ps.chi[g];
  return chi;
}

}  // namespace

double cr_fidelity(const PulseSchedule& ps, const CrSpec& spec) {
  const CrSpec flat = flat_spec(spec);
  GrapeProblem p = cr_problem(flat, ps.grid.T, ps.grid.N);
  check_tone_match(ps, p.model.tones);
  return grape_fidelity(p, ps.controls(), chi_vec(ps, p.n_gauge()));
}

double cr_chi_ryd(const PulseSchedule& ps, const CrSpec& spec) {
  const CrSpec flat = flat_spec(spec);
  GrapeProblem p = cr_problem(flat, ps.grid.T, ps.grid.N);
  check_tone_match(ps, p.model.tones);
  PropagateOptions popt;
  popt.keep_eigs = popt.keep_prefix = true;
  popt.max_step_rad = p.max_step_rad;
  const auto rec = propagate(p.model, ps.controls(), p.grid, popt);
  TwoAtomSpace space(flat.scheme(), std::isinf(flat.blockade_V));
  return average_rydberg_population(rec, space);
}

Mat single_gate_target(int d, const std::string& name) {
  if (name == "x") return pauli_x(d);
  if (name == "h") return hadamard(d);
  throw std::invalid_argument("single_gate_target: unknown gate " + name);
}

GrapeProblem single_qudit_problem(int d, const Mat& target, double T, double omega_bar,
                                  int n_slices) {
  if (d < 2) throw std::invalid_argument("single_qudit_problem: need d >= 2");
  std::vector<DriveTone> tones;
  for (int j = 0; j + 1 < d; ++j) tones.push_back({j, j + 1, omega_bar});
  GrapeProblem p;
  p.model = single_atom_model(d, d, tones);
  p.grid = {T, n_slices > 0 ? n_slices : slice_count(T, omega_bar)};
  p.target = target;
  p.comp.resize(d);
  std::iota(p.comp.begin(), p.comp.end(), 0);
  return p;
}

PulseSchedule make_schedule(const GrapeProblem& p, const OptimResult& res) {
  PulseSchedule ps;
  ps.tones = p.model.tones;
  ps.grid = p.grid;
  ps.fidelity = res.f;
  ps.amp_frac.assign(ps.n_tones(), std::vector<double>(p.grid.N));
  ps.phase.assign(ps.n_tones(), std::vector<double>(p.grid.N));
  for (int j = 0; j < ps.n_tones(); ++j)
    for (int r = 0; r < p.grid.N; ++r) {
      // fold the ramp envelope in: schedules hold the physical waveform
      const cxd om = 2.0 * cxd(res.u(2 * j, r), res.u(2 * j + 1, r)) * p.envelope_at(r);
      ps.amp_frac[j][r] = std::abs(om) / ps.tones[j].cap;
      ps.phase[j][r] = std::arg(om);
    }
  for (int g = 0; g < int(res.chi.size()); ++g) ps.chi.push_back(res.chi[g]);
  return ps;
}

namespace {

Eigen::MatrixXd resample_controls(const Eigen::MatrixXd& u, int n_new) {
  const int nw = int(u.cols());
  Eigen::MatrixXd v(u.rows(), n_new);
  for (int r = 0; r < n_new; ++r)
    v.col(r) = u.col(std::min(nw - 1, int(double(r) * nw / n_new)));
  return v;
}

TimeScanOptions scan_options(const SynthOptions& o, bool use_chi) {
  TimeScanOptions ts;
  ts.points = o.scan_points;
  ts.threshold = o.threshold;
  ts.ms.restarts = o.scan_restarts;
  ts.ms.serial = o.serial;
  ts.ms.optim.seed = o.seed;
  ts.ms.optim.max_iters = o.scan_max_iters;
  ts.ms.optim.use_chi = use_chi;
  // no need to squeeze out the last digits while locating the crossing
  ts.ms.optim.stop_f = std::min(1.0 - 1e-9, o.threshold + 2e-5);
  return ts;
}

MultiStartOptions final_options(const SynthOptions& o, bool use_chi) {
  MultiStartOptions ms;
  ms.restarts = o.restarts;
  ms.serial = o.serial;
  ms.optim.seed = splitmix64(o.seed ^ 0x9e3779b97f4a7c15ull);
  ms.optim.max_iters = o.max_iters;
  ms.optim.use_chi = use_chi;
  return ms;
}

}  // namespace

SynthReport synthesize_single_gate(int d, const std::string& gate, double t_min,
                                   double t_max, const SynthOptions& o) {
  const Mat target = single_gate_target(d, gate);
  auto make = [&](double T) {
    return single_qudit_problem(d, target, T, o.omega_bar,
                                slice_count(T, o.omega_bar, o.scan_slice_rad));
  };
  const TimeScanResult r = find_optimal_time(make, t_min, t_max, scan_options(o, false));
  SynthReport rep;
  rep.found = r.found;
  rep.t_opt = r.t_opt;
  rep.coarse = r.coarse;
  rep.fine = r.fine;
  if (!r.found) return rep;

  GrapeProblem p = single_qudit_problem(d, target, r.t_opt, o.omega_bar,
                                        slice_count(r.t_opt, o.omega_bar, o.slice_rad));
  const MultiStartResult best = grape_multistart(p, final_options(o, false), r.best.u);
  rep.pulse = make_schedule(p, best.best);
  rep.pulse.label = gate;
  rep.pulse.extra = {{"d", d}, {"t_opt_us", s_to_us(r.t_opt)}};
  return rep;
}

SynthReport synthesize_cr_proxy(double theta, double t_min, double t_max,
                                const SynthOptions& o) {
  const double th = std::abs(wrap_angle(theta));
  if (th < 1e-12) throw std::invalid_argument("synthesize_cr_proxy: trivial theta");
  CrSpec spec;
  spec.d = 2;
  spec.targets = {1};
  spec.theta = th;
  spec.omega_bar = o.omega_bar;
  auto make = [&](double T) {
    return cr_problem(spec, T, slice_count(T, o.omega_bar, o.scan_slice_rad));
  };
  const TimeScanResult r = find_optimal_time(make, t_min, t_max, scan_options(o, true));
  SynthReport rep;
  rep.found = r.found;
  rep.t_opt = r.t_opt;
  rep.coarse = r.coarse;
  rep.fine = r.fine;
  if (!r.found) return rep;

  GrapeProblem p = cr_problem(spec, r.t_opt, slice_count(r.t_opt, o.omega_bar, o.slice_rad));
  const MultiStartResult best = grape_multistart(p, final_options(o, true), r.best.u);
  rep.pulse = make_schedule(p, best.best);
  rep.pulse.label = "cr";
  rep.pulse.theta = th;
  rep.pulse.target_levels = {1};
  rep.pulse.extra = {{"proxy_d", 2}, {"t_opt_us", s_to_us(r.t_opt)}};
  return rep;
}

PulseSchedule polish_noise_ready(const PulseSchedule& base, const CrSpec& spec,
                                 const SynthOptions& o) {
  spec.validate();
  check_tone_match(base, spec.tones());
  // stretch the duration to recover the pulse area spent in the ramps, and a
  // little further if the threshold stays out of reach
  double T = base.grid.T / (1.0 - spec.ramp_frac);
  OptimResult res;
  for (int attempt = 0; attempt < 6; ++attempt, T *= 1.05) {
    GrapeProblem p = cr_problem(spec, T, slice_count(T, spec.omega_bar, o.slice_rad));
    OptimOptions opt;
    opt.use_chi = true;
    opt.seed = splitmix64(o.seed ^ 0xb10cade5u);
    opt.max_iters = o.max_iters;
    res = grape_optimize(p, opt, 1, resample_controls(base.controls(), p.grid.N));
    if (res.f >= o.threshold) {
      PulseSchedule ps = make_schedule(p, res);
      ps.label = base.label;
      ps.theta = base.theta;
      ps.target_levels = base.target_levels;
      ps.extra = {{"blockade_V_MHz", rad_to_mhz(spec.blockade_V)},
                  {"ramp_frac", spec.ramp_frac}};
      return ps;
    }
  }
  throw std::runtime_error("polish_noise_ready: threshold not reached for " +
                           spec.describe() + " (best " + std::to_string(res.f) + ")");
}

PulseSchedule reoptimize_crosstalk(const PulseSchedule& base, const CrSpec& spec,
                                   const SynthOptions& o) {
  spec.validate();
  if (spec.crosstalk_delta <= 0.0)
    throw std::invalid_argument("reoptimize_crosstalk: spec has no crosstalk");
  check_tone_match(base, spec.tones());
  const FourierBasis fb{0.5 * spec.omega_bar, 6};
  double T = base.grid.T;
  OptimResult res;
  for (int attempt = 0; attempt < 5; ++attempt, T *= 1.05) {
    GrapeProblem p = cr_problem(spec, T, slice_count(T, spec.omega_bar, o.slice_rad));
    // warm start: least-squares projection of the ideal waveform on the basis
    const Eigen::MatrixXd u0 = resample_controls(base.controls(), p.grid.N);
    Eigen::MatrixXd B(p.grid.N, fb.n_coeff());
    for (int r = 0; r < p.grid.N; ++r)
      for (int k = 0; k < fb.n_coeff(); ++k) B(r, k) = fb.basis(k, p.grid.midpoint(r));
    const auto qr = B.colPivHouseholderQr();
    Eigen::MatrixXd warm(u0.rows(), fb.n_coeff());
    for (int m = 0; m < int(u0.rows()); ++m)
      warm.row(m) = qr.solve(u0.row(m).transpose()).transpose();

    OptimOptions opt;
    opt.mode = AmpMode::Fourier;
    opt.fourier = fb;
    opt.use_chi = true;
    opt.seed = splitmix64(o.seed ^ 0xc805571aull);
    opt.max_iters = o.max_iters;
    res = grape_optimize(p, opt, 1, warm);
    if (res.f >= o.threshold) {
      PulseSchedule ps = make_schedule(p, res);
      ps.label = base.label;
      ps.theta = base.theta;
      ps.target_levels = base.target_levels;
      json coeff = json::array();
      for (int m = 0; m < int(res.coeff.rows()); ++m) {
        json row = json::array();
        for (int k = 0; k < int(res.coeff.cols()); ++k)
          row.push_back(rad_to_mhz(res.coeff(m, k)));
        coeff.push_back(std::move(row));
      }
      ps.extra = {{"fourier",
                   {{"omega0_MHz", rad_to_mhz(fb.omega0)},
                    {"n_harm", fb.n_harm},
                    {"coeff_MHz", std::move(coeff)}}},
                  {"crosstalk_delta_MHz", rad_to_mhz(spec.crosstalk_delta)},
                  {"blockade_V_MHz", rad_to_mhz(spec.blockade_V)},
                  {"ramp_frac", spec.ramp_frac}};
      return ps;
    }
  }
  throw std::runtime_error("reoptimize_crosstalk: threshold not reached for " +
                           spec.describe() + " (best " + std::to_string(res.f) + ")");
}

GrapeProblem cz_simultaneous_problem(double T, double omega_bar, int n_slices) {
  const LevelScheme sc = LevelScheme::single(3, 2);
  TwoAtomSpace space(sc, true);
  const std::vector<DriveTone> tones = {
      {0, 1, omega_bar}, {1, 2, omega_bar}, {2, sc.ryd_index(0), omega_bar}};
  GrapeProblem p;
  p.model = two_atom_model(space, tones, std::numeric_limits<double>::infinity());
  p.grid = {T, n_slices > 0 ? n_slices : slice_count(T, omega_bar)};
  p.target = cz_gate(3);
  p.comp = space.comp_indices();
  return p;
}

SynthReport synthesize_cz_simultaneous(double T, const SynthOptions& o) {
  GrapeProblem p = cz_simultaneous_problem(T, o.omega_bar,
                                           slice_count(T, o.omega_bar, o.slice_rad));
  MultiStartOptions ms = final_options(o, false);
  ms.optim.mode = AmpMode::Fourier;
  ms.optim.fourier = {0.5 * o.omega_bar, 6};
  ms.optim.seed = o.seed;
  const MultiStartResult best = grape_multistart(p, ms);

  SynthReport rep;
  rep.found = best.best.f >= o.threshold;
  rep.t_opt = T;
  rep.pulse = make_schedule(p, best.best);
  rep.pulse.label = "cz";
  json coeff = json::array();
  for (int m = 0; m < int(best.best.coeff.rows()); ++m) {
    json row = json::array();
    for (int k = 0; k < int(best.best.coeff.cols()); ++k)
      row.push_back(rad_to_mhz(best.best.coeff(m, k)));
    coeff.push_back(std::move(row));
  }
  rep.pulse.extra = {{"d", 3},
                     {"fourier",
                      {{"omega0_MHz", rad_to_mhz(0.5 * o.omega_bar)},
                       {"n_harm", 6},
                       {"coeff_MHz", std::move(coeff)}}}};
  return rep;
}

bool PulseLibrary::has(const std::string& key) const {
  return std::filesystem::exists(path_of(key));
}

PulseSchedule PulseLibrary::load(const std::string& key) const {
  return PulseSchedule::from_json(load_json_file(path_of(key)));
}

void PulseLibrary::store(const std::string& key, const PulseSchedule& ps) const {
  std::filesystem::create_directories(dir_);
  save_json_file(path_of(key), ps.to_json());
}

std::string PulseLibrary::theta_key(double theta) {
  const double x = std::abs(wrap_angle(theta)) / pi;
  if (x < 1e-12) throw std::invalid_argument("theta_key: trivial angle");
  for (int q = 1; q <= 64; ++q) {
    const int p = int(std::lround(x * q));
    if (p >= 1 && std::abs(x * q - p) < 1e-9) {
      if (std::gcd(p, q) != 1) continue;
      std::string name = p == 1 ? "pi" : std::to_string(p) + "pi";
      if (q > 1) name += std::to_string(q);
      return "cr_" + name;
    }
  }
  throw std::invalid_argument("theta_key: not a small rational multiple of pi");
}

std::string PulseLibrary::gate_key(int d, const std::string& gate) {
  return "d" + std::to_string(d) + "_" + gate;
}

std::string PulseLibrary::cr_key(int d, const std::vector<int>& targets,
                                 const std::string& variant) {
  std::string k = "d" + std::to_string(d) + "_cr";
  for (int l : targets) k += std::to_string(l);
  if (!variant.empty()) k += "_" + variant;
  return k;
}

PulseSchedule PulseLibrary::ensure_cr_proxy(double theta, const SynthOptions& o) {
  const std::string key = theta_key(theta);
  if (has(key)) return load(key);
  const SynthReport rep = synthesize_cr_proxy(theta, 3.0 / o.omega_bar, 9.0 / o.omega_bar, o);
  if (!rep.found) throw std::runtime_error("proxy synthesis failed for " + key);
  store(key, rep.pulse);
  return rep.pulse;
}

PulseSchedule PulseLibrary::ensure_single_gate(int d, const std::string& gate, double t_min,
                                               double t_max, const SynthOptions& o) {
  const std::string key = gate_key(d, gate);
  if (has(key)) return load(key);
  const SynthReport rep = synthesize_single_gate(d, gate, t_min, t_max, o);
  if (!rep.found) throw std::runtime_error("gate synthesis failed for " + key);
  store(key, rep.pulse);
  return rep.pulse;
}

namespace {
const std::vector<std::vector<int>> kQutritTargetSets = {{1}, {2}, {1, 2}};
}

std::vector<PulseSchedule> ensure_qutrit_noise_pulses(PulseLibrary& lib,
                                                      const SynthOptions& o) {
  const double theta = wrap_angle(4.0 * pi / 3.0);  // the qutrit CZ pulse angle
  std::vector<PulseSchedule> out;
  for (const auto& targets : kQutritTargetSets) {
    const std::string key = PulseLibrary::cr_key(3, targets, "noise");
    if (lib.has(key)) {
      out.push_back(lib.load(key));
      continue;
    }
    const PulseSchedule proxy = lib.ensure_cr_proxy(theta, o);
    CrSpec ideal;
    ideal.d = 3;
    ideal.targets = targets;
    ideal.theta = theta;
    ideal.omega_bar = o.omega_bar;
    const PulseSchedule base = realize_cr(proxy, ideal);
    CrSpec noisy = ideal;
    noisy.blockade_V = kBlockadeV;
    noisy.ramp_frac = kRampFrac;
    PulseSchedule polished = polish_noise_ready(base, noisy, o);
    lib.store(key, polished);
    out.push_back(std::move(polished));
  }
  return out;
}

std::vector<PulseSchedule> ensure_qutrit_crosstalk_pulses(PulseLibrary& lib,
                                                          const SynthOptions& o) {
  std::vector<PulseSchedule> out;
  std::vector<PulseSchedule> noise;  // filled on first need
  for (const auto& targets : kQutritTargetSets) {
    const std::string key = PulseLibrary::cr_key(3, targets, "xtalk");
    if (lib.has(key)) {
      out.push_back(lib.load(key));
      continue;
    }
    if (noise.empty()) noise = ensure_qutrit_noise_pulses(lib, o);
    CrSpec xspec;
    xspec.d = 3;
    xspec.targets = targets;
    xspec.theta = wrap_angle(4.0 * pi / 3.0);
    xspec.omega_bar = o.omega_bar;
    xspec.both_lasers = true;
    xspec.blockade_V = kBlockadeV;
    xspec.crosstalk_delta = kCrosstalkDelta;
    xspec.ramp_frac = kRampFrac;
    const PulseSchedule& base = noise[&targets - &kQutritTargetSets[0]];
    const PulseSchedule spread = spread_to_tones(base, xspec.tones());
    SynthOptions ox = o;
    ox.threshold = std::min(o.threshold, 0.9985);
    PulseSchedule re = reoptimize_crosstalk(spread, xspec, ox);
    lib.store(key, re);
    out.push_back(std::move(re));
  }
  return out;
}

}  // namespace qoc
