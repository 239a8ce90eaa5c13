#pragma once

// Gradient-based pulse optimization. The figure of merit is the trace
// overlap fidelity of the propagator projected onto the computational block;
// gradients use the exact derivative of each slice exponential (Loewner
// kernel on the slice eigenbasis), so they agree with finite differences to
// solver precision rather than only to first order in dt.
//
// Three parametrizations are supported:
//   PhaseOnly - every tone pinned to the (possibly ramped) amplitude cap,
//               one phase per tone per slice,
//   Clipped   - free quadratures per slice, radially projected onto the cap,
//   Fourier   - truncated Fourier series per quadrature, cap enforced by
//               rescaling a tone's coefficients when its envelope overshoots.
//
// CR-type targets carry a frame-phase gauge: the physical pulse may imprint
// an extra phase chi on every driven level (cancelled later by virtual
// phase steps), so one chi per driven level enters as an extra optimization
// variable. A computational state picks up each gauge phase once per level
// it contains, encoded in integer multiplicity rows.

#include <cstdint>
#include <functional>

#include "qoc/propagation.hpp"

namespace qoc {

struct GrapeProblem {
  ControlModel model;
  TimeGrid grid;
  Mat target;             // D x D unitary on the computational block
  std::vector<int> comp;  // model-space indices of that block, in target order
  // per-slice envelope scale multiplying all realized controls (rise/fall
  // ramps); empty means flat 1
  std::vector<double> envelope;
  // frame-phase gauge: one row per gauge variable, each row giving the phase
  // multiplicity per computational state (how many of the state's levels the
  // gauge acts on); empty disables the chi gauge
  std::vector<std::vector<int>> chi_weights;
  // sanity bound on max |eigenvalue| * dt per slice, forwarded to propagate;
  // raise it for models with a large static diagonal (finite blockade), where
  // the spectral-path exponential stays exact and only the control variation
  // sets the grid
  double max_step_rad = 0.5;

  int n_tones() const { return int(model.tones.size()); }
  int n_gauge() const { return int(chi_weights.size()); }
  double envelope_at(int r) const { return envelope.empty() ? 1.0 : envelope[r]; }
  void validate() const;
};

// realized controls = envelope(r) * u(:, r); u is n_controls x N; chi may be
// empty or shorter than n_gauge (missing entries read as zero)
double grape_fidelity(const GrapeProblem& p, const Eigen::MatrixXd& u,
                      const Eigen::VectorXd& chi = Eigen::VectorXd());

struct FidGrad {
  double f = 0.0;
  Eigen::MatrixXd du;    // n_controls x N, derivative wrt the pre-envelope u
  Eigen::VectorXd dchi;  // one entry per gauge variable
};
FidGrad grape_fidelity_and_gradient(const GrapeProblem& p, const Eigen::MatrixXd& u,
                                    const Eigen::VectorXd& chi = Eigen::VectorXd());

// truncated Fourier series u_m(t) = a_{m,0} + sum_k a_{m,k} cos(k w0 t)
//                                        + b_{m,k} sin(k w0 t), k = 1..n_harm
struct FourierBasis {
  double omega0 = 0.0;
  int n_harm = 6;  // 2*n_harm+1 coefficients per control ("K = 13")
  int n_coeff() const { return 2 * n_harm + 1; }
  // coefficient row layout: [a_0, a_1..a_nh, b_1..b_nh]
  double basis(int k, double t) const;
};

Eigen::MatrixXd fourier_controls(const FourierBasis& fb, const Eigen::MatrixXd& coeff,
                                 const TimeGrid& grid);
// chain rule: gradient wrt coefficients is the slice gradient contracted
// with the basis functions
struct FourierFidGrad {
  double f = 0.0;
  Eigen::MatrixXd dcoeff;
  Eigen::VectorXd dchi;
};
FourierFidGrad fourier_fidelity_and_gradient(const GrapeProblem& p, const FourierBasis& fb,
                                             const Eigen::MatrixXd& coeff,
                                             const Eigen::VectorXd& chi = Eigen::VectorXd());

enum class AmpMode { PhaseOnly, Clipped, Fourier };

struct OptimOptions {
  AmpMode mode = AmpMode::PhaseOnly;
  FourierBasis fourier;   // used when mode == Fourier
  bool use_chi = false;
  int max_iters = 2000;
  double f_tol = 1e-10;   // stop after repeated improvements below this
  double g_tol = 1e-8;    // stop when the gradient norm falls below this
  double stop_f = 1.0 - 1e-9;
  std::uint64_t seed = 0;
};

struct OptimResult {
  Eigen::MatrixXd u;      // pre-envelope controls, n_controls x N
  Eigen::MatrixXd coeff;  // Fourier coefficients when applicable
  Eigen::VectorXd chi;    // one frame phase per gauge variable
  double f = 0.0;
  int iters = 0;
  bool converged = false;
  std::uint64_t seed = 0;
  std::vector<double> f_history;  // accepted steps, non-decreasing
};

// single run from one deterministic initialization; restart 0 is a fixed
// canonical start (zero phases / cap amplitude / flat series), higher
// restarts draw from the seeded distribution. warm, if nonempty, overrides
// the initialization with the given controls (resampled to the grid).
OptimResult grape_optimize(const GrapeProblem& p, const OptimOptions& opt,
                           int restart_index, const Eigen::MatrixXd& warm = {});

struct MultiStartOptions {
  OptimOptions optim;
  int restarts = 8;
  bool serial = false;  // force the serial reference path
};
struct MultiStartResult {
  OptimResult best;
  std::vector<double> restart_f;  // fidelity per restart, index order
};
MultiStartResult grape_multistart(const GrapeProblem& p, const MultiStartOptions& opt,
                                  const Eigen::MatrixXd& warm = {});

// coarse scan of gate duration with one refinement pass around the first
// grid point whose best-of-restarts fidelity clears the threshold
struct TimeScanOptions {
  MultiStartOptions ms;
  int points = 40;
  double threshold = 1.0 - 1e-4;
  bool refine = true;
  bool warm_chain = true;  // reuse the previous T's optimum as one start
};
struct TimeScanPoint {
  double T = 0.0;
  double f = 0.0;
};
struct TimeScanResult {
  bool found = false;
  double t_opt = 0.0;
  OptimResult best;  // optimum at t_opt
  std::vector<TimeScanPoint> coarse, fine;
};
TimeScanResult find_optimal_time(const std::function<GrapeProblem(double)>& make_problem,
                                 double t_min, double t_max, const TimeScanOptions& opt);

}  // namespace qoc
