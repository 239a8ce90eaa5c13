#include "qoc/pulse.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qoc {

void PulseSchedule::validate() const {
  grid.validate();
  if (tones.empty()) throw std::invalid_argument("PulseSchedule: no tones");
  if (int(amp_frac.size()) != n_tones() || int(phase.size()) != n_tones())
    throw std::invalid_argument("PulseSchedule: per-tone sample arrays required");
  for (int j = 0; j < n_tones(); ++j) {
    if (int(amp_frac[j].size()) != grid.N || int(phase[j].size()) != grid.N)
      throw std::invalid_argument("PulseSchedule: sample count must equal grid.N");
    for (double a : amp_frac[j])
      if (a < -1e-12 || a > 1.0 + 1e-9)
        throw std::invalid_argument("PulseSchedule: amplitude fraction outside [0, 1]");
  }
}

cxd PulseSchedule::omega(int tone, int r) const {
  return std::polar(amp_frac[tone][r] * tones[tone].cap, phase[tone][r]);
}

Eigen::MatrixXd PulseSchedule::controls() const {
  Eigen::MatrixXd u(2 * n_tones(), grid.N);
  for (int j = 0; j < n_tones(); ++j)
    for (int r = 0; r < grid.N; ++r) {
      const cxd om = omega(j, r);
      u(2 * j, r) = 0.5 * om.real();
      u(2 * j + 1, r) = 0.5 * om.imag();
    }
  return u;
}

PulseSchedule PulseSchedule::conjugated() const {
  PulseSchedule p = *this;
  for (auto& row : p.phase)
    for (double& v : row) v = -v;
  p.theta = -theta;
  for (double& c : p.chi) c = -c;
  return p;
}

PulseSchedule PulseSchedule::refined(int factor) const {
  if (factor < 1) throw std::invalid_argument("refined: factor must be >= 1");
  if (factor == 1) return *this;
  PulseSchedule p = *this;
  p.grid.N = grid.N * factor;
  for (int j = 0; j < n_tones(); ++j) {
    p.amp_frac[j].assign(p.grid.N, 0.0);
    p.phase[j].assign(p.grid.N, 0.0);
    for (int r = 0; r < p.grid.N; ++r) {
      p.amp_frac[j][r] = amp_frac[j][r / factor];
      p.phase[j][r] = phase[j][r / factor];
    }
  }
  return p;
}

json PulseSchedule::to_json() const {
  json j;
  stamp(j, "pulse");
  for (const auto& t : tones)
    j["tones"].push_back({{"lower", t.lower}, {"upper", t.upper}, {"cap_MHz", rad_to_mhz(t.cap)}});
  j["grid"] = {{"T_us", s_to_us(grid.T)}, {"N", grid.N}};
  for (int tj = 0; tj < n_tones(); ++tj) {
    json samples = json::array();
    for (int r = 0; r < grid.N; ++r)
      samples.push_back({{"amplitude_frac", amp_frac[tj][r]}, {"phase_rad", phase[tj][r]}});
    j["samples"].push_back(std::move(samples));
  }
  j["label"] = label;
  j["theta_rad"] = theta;
  j["theta"] = format_angle(theta);
  j["target_levels"] = target_levels;
  j["chi_rad"] = chi;
  j["fidelity"] = fidelity;
  if (!extra.is_null()) j["extra"] = extra;
  return j;
}

PulseSchedule PulseSchedule::from_json(const json& j) {
  require_kind(j, "pulse");
  PulseSchedule p;
  for (const auto& t : j.at("tones"))
    p.tones.push_back({t.at("lower").get<int>(), t.at("upper").get<int>(),
                       mhz_to_rad(t.at("cap_MHz").get<double>())});
  p.grid = {us_to_s(j.at("grid").at("T_us").get<double>()), j.at("grid").at("N").get<int>()};
  for (const auto& tone_samples : j.at("samples")) {
    std::vector<double> a, ph;
    for (const auto& s : tone_samples) {
      a.push_back(s.at("amplitude_frac").get<double>());
      ph.push_back(s.at("phase_rad").get<double>());
    }
    p.amp_frac.push_back(std::move(a));
    p.phase.push_back(std::move(ph));
  }
  p.label = j.value("label", "");
  p.theta = j.value("theta_rad", 0.0);
  p.target_levels = j.value("target_levels", std::vector<int>{});
  p.chi = j.value("chi_rad", std::vector<double>{});
  p.fidelity = j.value("fidelity", 0.0);
  if (j.contains("extra")) p.extra = j["extra"];
  p.validate();
  return p;
}

void PulseSchedule::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t_us";
  for (int j = 0; j < n_tones(); ++j)
    out << ",tone" << j << "_amp_frac,tone" << j << "_phase_rad";
  out << "\n";
  for (int r = 0; r < grid.N; ++r) {
    out << s_to_us(grid.midpoint(r));
    for (int j = 0; j < n_tones(); ++j)
      out << "," << amp_frac[j][r] << "," << phase[j][r];
    out << "\n";
  }
}

std::vector<double> ramp_profile(const TimeGrid& grid, double ramp_frac) {
  if (ramp_frac < 0.0 || ramp_frac > 0.5)
    throw std::invalid_argument("ramp_profile: fraction must lie in [0, 0.5]");
  std::vector<double> prof(grid.N, 1.0);
  const double tr = ramp_frac * grid.T;
  if (tr <= 0.0) return prof;
  for (int r = 0; r < grid.N; ++r) {
    const double t = grid.midpoint(r);
    if (t < tr)
      prof[r] = 0.5 * (1.0 - std::cos(pi * t / tr));
    else if (t > grid.T - tr)
      prof[r] = 0.5 * (1.0 - std::cos(pi * (grid.T - t) / tr));
  }
  return prof;
}

void write_population_csv(const std::string& path, const Mat& traj, const TimeGrid& grid,
                          const std::vector<std::string>& labels) {
  if (int(labels.size()) != traj.rows())
    throw std::invalid_argument("write_population_csv: one label per basis state");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t_us";
  for (const auto& l : labels) out << ",p_" << l;
  out << "\n";
  for (Eigen::Index c = 0; c < traj.cols(); ++c) {
    out << s_to_us(double(c) * grid.dt());
    for (Eigen::Index i = 0; i < traj.rows(); ++i) out << "," << std::norm(traj(i, c));
    out << "\n";
  }
}

std::string level_label(const LevelScheme& scheme, int flat_index) {
  if (flat_index < 0 || flat_index >= scheme.atom_dim())
    throw std::invalid_argument("level_label: index out of range");
  if (flat_index < scheme.d) return std::to_string(flat_index);
  return "r" + std::to_string(flat_index - scheme.d + 1);
}

}  // namespace qoc
