#include "qoc/grape.hpp"

#include <cmath>
#include <stdexcept>

#include "qoc/par.hpp"
#include "qoc/rng.hpp"

namespace qoc {

void GrapeProblem::validate() const {
  grid.validate();
  if (model.dim <= 0 || model.n_controls() == 0)
    throw std::invalid_argument("GrapeProblem: empty control model");
  if (target.rows() != target.cols() || int(comp.size()) != target.rows())
    throw std::invalid_argument("GrapeProblem: target and comp block mismatch");
  for (int idx : comp)
    if (idx < 0 || idx >= model.dim)
      throw std::invalid_argument("GrapeProblem: comp index out of range");
  if (!envelope.empty() && int(envelope.size()) != grid.N)
    throw std::invalid_argument("GrapeProblem: envelope length must equal grid.N");
  for (const auto& row : chi_weights)
    if (row.size() != comp.size())
      throw std::invalid_argument("GrapeProblem: chi weight row must match comp block");
}

namespace {

// chi resized to one entry per gauge variable; missing entries read as zero
Eigen::VectorXd padded_chi(const GrapeProblem& p, const Eigen::VectorXd& chi) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(p.n_gauge());
  for (int g = 0; g < std::min<int>(p.n_gauge(), int(chi.size())); ++g) c[g] = chi[g];
  return c;
}

// U_target^dag C(chi) scattered into the full model space; C multiplies each
// computational state by exp(-i sum_g chi_g w_g)
Mat embedded_target(const GrapeProblem& p, const Eigen::VectorXd& chi) {
  const int D = int(p.comp.size());
  Mat t = Mat::Zero(p.model.dim, p.model.dim);
  for (int i = 0; i < D; ++i)
    for (int j = 0; j < D; ++j) {
      double ph = 0.0;
      for (int g = 0; g < p.n_gauge(); ++g) ph += chi[g] * p.chi_weights[g][j];
      t(p.comp[i], p.comp[j]) = std::conj(p.target(j, i)) * std::polar(1.0, -ph);
    }
  return t;
}

Eigen::MatrixXd realized(const GrapeProblem& p, const Eigen::MatrixXd& u) {
  if (p.envelope.empty()) return u;
  Eigen::MatrixXd v = u;
  for (int r = 0; r < p.grid.N; ++r) v.col(r) *= p.envelope[r];
  return v;
}

}  // namespace

double grape_fidelity(const GrapeProblem& p, const Eigen::MatrixXd& u,
                      const Eigen::VectorXd& chi) {
  p.validate();
  PropagateOptions popt;
  popt.max_step_rad = p.max_step_rad;
  const auto rec = propagate(p.model, realized(p, u), p.grid, popt);
  const Mat t_full = embedded_target(p, padded_chi(p, chi));
  const cxd z = (t_full * rec.total).trace();
  const double D = double(p.comp.size());
  return std::norm(z) / (D * D);
}

FidGrad grape_fidelity_and_gradient(const GrapeProblem& p, const Eigen::MatrixXd& u,
                                    const Eigen::VectorXd& chi) {
  p.validate();
  const Eigen::MatrixXd ur = realized(p, u);
  PropagateOptions popt;
  popt.keep_eigs = popt.keep_prefix = true;
  popt.max_step_rad = p.max_step_rad;
  const auto rec = propagate(p.model, ur, p.grid, popt);

  const Mat t_full = embedded_target(p, padded_chi(p, chi));
  const cxd z = (t_full * rec.total).trace();
  const double D = double(p.comp.size());
  const double dt = p.grid.dt();

  FidGrad out;
  out.f = std::norm(z) / (D * D);
  out.du.resize(p.model.n_controls(), p.grid.N);

  // backward sweep: suffix product S_r = U_{N-1} ... U_{r+1}
  Mat suffix = Mat::Identity(p.model.dim, p.model.dim);
  for (int r = p.grid.N - 1; r >= 0; --r) {
    const auto& eig = rec.eigs[r];
    const Mat y = eig.vecs.adjoint() * (rec.prefix[r] * t_full * suffix) * eig.vecs;
    const double tmid = p.grid.midpoint(r);
    const int n = p.model.dim;
    for (int m = 0; m < p.model.n_controls(); ++m) {
      const Mat g = eig.vecs.adjoint() *
                    p.model.channels[m].direction(tmid, p.model.dim) * eig.vecs;
      cxd dz = 0.0;
      for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) dz += y(b, a) * eig.loewner(dt, a, b) * g(a, b);
      out.du(m, r) = 2.0 / (D * D) * std::real(std::conj(z) * dz) * p.envelope_at(r);
    }
    suffix = suffix * eig.expm(dt);
  }

  out.dchi = Eigen::VectorXd::Zero(p.n_gauge());
  const int Dc = int(p.comp.size());
  for (int g = 0; g < p.n_gauge(); ++g) {
    // d(T_full)/d(chi_g) multiplies column j by -i w_g[j]
    cxd dz_chi = 0.0;
    for (int i = 0; i < Dc; ++i)
      for (int j = 0; j < Dc; ++j)
        dz_chi += t_full(p.comp[i], p.comp[j]) * cxd(0.0, -double(p.chi_weights[g][j])) *
                  rec.total(p.comp[j], p.comp[i]);
    out.dchi[g] = 2.0 / (D * D) * std::real(std::conj(z) * dz_chi);
  }
  return out;
}

double FourierBasis::basis(int k, double t) const {
  if (k == 0) return 1.0;
  if (k <= n_harm) return std::cos(k * omega0 * t);
  return std::sin((k - n_harm) * omega0 * t);
}

Eigen::MatrixXd fourier_controls(const FourierBasis& fb, const Eigen::MatrixXd& coeff,
                                 const TimeGrid& grid) {
  if (int(coeff.cols()) != fb.n_coeff())
    throw std::invalid_argument("fourier_controls: coefficient layout mismatch");
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(coeff.rows(), grid.N);
  for (int r = 0; r < grid.N; ++r) {
    const double t = grid.midpoint(r);
    for (int k = 0; k < fb.n_coeff(); ++k) {
      const double bk = fb.basis(k, t);
      for (int m = 0; m < coeff.rows(); ++m) u(m, r) += coeff(m, k) * bk;
    }
  }
  return u;
}

FourierFidGrad fourier_fidelity_and_gradient(const GrapeProblem& p, const FourierBasis& fb,
                                             const Eigen::MatrixXd& coeff,
                                             const Eigen::VectorXd& chi) {
  const Eigen::MatrixXd u = fourier_controls(fb, coeff, p.grid);
  const FidGrad fg = grape_fidelity_and_gradient(p, u, chi);
  FourierFidGrad out;
  out.f = fg.f;
  out.dchi = fg.dchi;
  out.dcoeff = Eigen::MatrixXd::Zero(coeff.rows(), fb.n_coeff());
  for (int r = 0; r < p.grid.N; ++r) {
    const double t = p.grid.midpoint(r);
    for (int k = 0; k < fb.n_coeff(); ++k) {
      const double bk = fb.basis(k, t);
      for (int m = 0; m < coeff.rows(); ++m) out.dcoeff(m, k) += fg.du(m, r) * bk;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// parameter-space adapters and the projected ascent engine

namespace {

struct ParamSpace {
  int n = 0;
  std::function<double(const Eigen::VectorXd&)> eval;
  std::function<std::pair<double, Eigen::VectorXd>(const Eigen::VectorXd&)> eval_grad;
  std::function<void(Eigen::VectorXd&)> project;  // may be empty
};

struct AscentTrace {
  Eigen::VectorXd p;
  double f = 0.0;
  int iters = 0;
  bool converged = false;
  std::vector<double> f_history;
};

AscentTrace ascend(const ParamSpace& ps, Eigen::VectorXd p0, const OptimOptions& opt) {
  AscentTrace tr;
  if (ps.project) ps.project(p0);
  tr.p = std::move(p0);
  auto [f, g] = ps.eval_grad(tr.p);
  tr.f = f;
  tr.f_history.push_back(f);
  double step = 0.0;
  int plateau = 0;
  for (int it = 0; it < opt.max_iters; ++it) {
    tr.iters = it + 1;
    const double gnorm = g.norm();
    if (tr.f >= opt.stop_f || gnorm < opt.g_tol) {
      tr.converged = true;
      break;
    }
    if (step <= 0.0) step = 0.1 / std::max(g.cwiseAbs().maxCoeff(), 1e-300);
    bool accepted = false;
    for (int bt = 0; bt < 40; ++bt) {
      Eigen::VectorXd cand = tr.p + step * g;
      if (ps.project) ps.project(cand);
      const double fc = ps.eval(cand);
      if (fc > tr.f) {
        plateau = (fc - tr.f < opt.f_tol) ? plateau + 1 : 0;
        tr.p = std::move(cand);
        tr.f = fc;
        tr.f_history.push_back(fc);
        std::tie(f, g) = ps.eval_grad(tr.p);
        tr.f = f;  // identical evaluation, kept for clarity
        step *= 1.6;
        accepted = true;
        break;
      }
      step *= 0.4;
    }
    if (!accepted || plateau >= 3) {
      // line search exhausted or improvements below f_tol: treat as converged
      // when the gradient is already tiny relative to scale
      tr.converged = accepted || ps.eval_grad(tr.p).second.norm() < 1e3 * opt.g_tol;
      break;
    }
  }
  return tr;
}

struct ModeAdapter {
  const GrapeProblem& p;
  const OptimOptions& opt;
  int n_tones, N;
  int base_params = 0;  // parameters excluding chi

  explicit ModeAdapter(const GrapeProblem& prob, const OptimOptions& o)
      : p(prob), opt(o), n_tones(prob.n_tones()), N(prob.grid.N) {
    switch (opt.mode) {
      case AmpMode::PhaseOnly: base_params = n_tones * N; break;
      case AmpMode::Clipped: base_params = 2 * n_tones * N; break;
      case AmpMode::Fourier: base_params = 2 * n_tones * opt.fourier.n_coeff(); break;
    }
  }

  int n_chi() const { return opt.use_chi ? p.n_gauge() : 0; }
  int n_params() const { return base_params + n_chi(); }
  Eigen::VectorXd chi_of(const Eigen::VectorXd& v) const {
    return v.segment(base_params, n_chi());
  }

  // map parameters to pre-envelope controls (n_controls x N)
  Eigen::MatrixXd controls(const Eigen::VectorXd& v) const {
    Eigen::MatrixXd u(2 * n_tones, N);
    switch (opt.mode) {
      case AmpMode::PhaseOnly:
        for (int j = 0; j < n_tones; ++j) {
          const double half = 0.5 * p.model.tones[j].cap;
          for (int r = 0; r < N; ++r) {
            const double ph = v[j * N + r];
            u(2 * j, r) = half * std::cos(ph);
            u(2 * j + 1, r) = half * std::sin(ph);
          }
        }
        break;
      case AmpMode::Clipped:
        for (int j = 0; j < n_tones; ++j) {
          const double half = 0.5 * p.model.tones[j].cap;
          for (int r = 0; r < N; ++r) {
            u(2 * j, r) = half * v[(2 * j) * N + r];
            u(2 * j + 1, r) = half * v[(2 * j + 1) * N + r];
          }
        }
        break;
      case AmpMode::Fourier: {
        const int nc = opt.fourier.n_coeff();
        Eigen::MatrixXd coeff(2 * n_tones, nc);
        for (int m = 0; m < 2 * n_tones; ++m)
          for (int k = 0; k < nc; ++k)
            coeff(m, k) = 0.5 * p.model.tones[m / 2].cap * v[m * nc + k];
        u = fourier_controls(opt.fourier, coeff, p.grid);
        break;
      }
    }
    return u;
  }

  Eigen::MatrixXd coeff_matrix(const Eigen::VectorXd& v) const {
    const int nc = opt.fourier.n_coeff();
    Eigen::MatrixXd coeff(2 * n_tones, nc);
    for (int m = 0; m < 2 * n_tones; ++m)
      for (int k = 0; k < nc; ++k)
        coeff(m, k) = 0.5 * p.model.tones[m / 2].cap * v[m * nc + k];
    return coeff;
  }

  double eval(const Eigen::VectorXd& v) const {
    return grape_fidelity(p, controls(v), chi_of(v));
  }

  std::pair<double, Eigen::VectorXd> eval_grad(const Eigen::VectorXd& v) const {
    const FidGrad fg = grape_fidelity_and_gradient(p, controls(v), chi_of(v));
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n_params());
    switch (opt.mode) {
      case AmpMode::PhaseOnly:
        for (int j = 0; j < n_tones; ++j) {
          const double half = 0.5 * p.model.tones[j].cap;
          for (int r = 0; r < N; ++r) {
            const double ph = v[j * N + r];
            g[j * N + r] = half * (-std::sin(ph) * fg.du(2 * j, r) +
                                   std::cos(ph) * fg.du(2 * j + 1, r));
          }
        }
        break;
      case AmpMode::Clipped:
        for (int j = 0; j < n_tones; ++j) {
          const double half = 0.5 * p.model.tones[j].cap;
          for (int r = 0; r < N; ++r) {
            g[(2 * j) * N + r] = half * fg.du(2 * j, r);
            g[(2 * j + 1) * N + r] = half * fg.du(2 * j + 1, r);
          }
        }
        break;
      case AmpMode::Fourier: {
        const int nc = opt.fourier.n_coeff();
        for (int r = 0; r < N; ++r) {
          const double t = p.grid.midpoint(r);
          for (int k = 0; k < nc; ++k) {
            const double bk = opt.fourier.basis(k, t);
            for (int m = 0; m < 2 * n_tones; ++m)
              g[m * nc + k] += 0.5 * p.model.tones[m / 2].cap * fg.du(m, r) * bk;
          }
        }
        break;
      }
    }
    if (n_chi() > 0) g.segment(base_params, n_chi()) = fg.dchi;
    return {fg.f, g};
  }

  void project(Eigen::VectorXd& v) const {
    switch (opt.mode) {
      case AmpMode::PhaseOnly:
        break;  // unconstrained
      case AmpMode::Clipped:
        for (int j = 0; j < n_tones; ++j)
          for (int r = 0; r < N; ++r) {
            double& a = v[(2 * j) * N + r];
            double& b = v[(2 * j + 1) * N + r];
            const double n2 = std::hypot(a, b);
            if (n2 > 1.0) {
              a /= n2;
              b /= n2;
            }
          }
        break;
      case AmpMode::Fourier: {
        // rescale a tone's whole series if its envelope overshoots the cap
        const int nc = opt.fourier.n_coeff();
        for (int j = 0; j < n_tones; ++j) {
          double peak = 0.0;
          for (int r = 0; r < N; ++r) {
            const double t = p.grid.midpoint(r);
            double va = 0.0, vb = 0.0;
            for (int k = 0; k < nc; ++k) {
              const double bk = opt.fourier.basis(k, t);
              va += v[(2 * j) * nc + k] * bk;
              vb += v[(2 * j + 1) * nc + k] * bk;
            }
            peak = std::max(peak, std::hypot(va, vb));
          }
          if (peak > 1.0)
            for (int k = 0; k < 2 * nc; ++k) v[(2 * j) * nc + k] /= peak;
        }
        break;
      }
    }
  }

  Eigen::VectorXd init(int restart_index) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n_params());
    auto rng = rng_stream(opt.seed, std::uint64_t(restart_index));
    switch (opt.mode) {
      case AmpMode::PhaseOnly:
        if (restart_index > 0)
          for (int i = 0; i < base_params; ++i) v[i] = uniform(rng, -pi, pi);
        break;
      case AmpMode::Clipped:
        // start at the cap with per-slice random phases
        for (int j = 0; j < n_tones; ++j)
          for (int r = 0; r < N; ++r) {
            const double ph = restart_index > 0 ? uniform(rng, -pi, pi) : 0.0;
            v[(2 * j) * N + r] = std::cos(ph);
            v[(2 * j + 1) * N + r] = std::sin(ph);
          }
        break;
      case AmpMode::Fourier: {
        const int nc = opt.fourier.n_coeff();
        for (int j = 0; j < n_tones; ++j) {
          v[(2 * j) * nc] = restart_index > 0 ? uniform(rng, 0.4, 0.9) : 0.75;
          if (restart_index > 0)
            for (int k = 1; k < nc; ++k) {
              const int h = k <= opt.fourier.n_harm ? k : k - opt.fourier.n_harm;
              v[(2 * j) * nc + k] = 0.25 / h * normal01(rng);
              v[(2 * j + 1) * nc + k] = 0.25 / h * normal01(rng);
            }
        }
        break;
      }
    }
    return v;
  }

  // translate previous controls (possibly on a different grid) into parameters
  Eigen::VectorXd from_warm(const Eigen::MatrixXd& warm) const {
    Eigen::VectorXd v = init(0);
    if (opt.mode == AmpMode::Fourier) {
      // warm holds Fourier coefficients in physical units
      const int nc = opt.fourier.n_coeff();
      if (int(warm.cols()) == nc && int(warm.rows()) == 2 * n_tones)
        for (int m = 0; m < 2 * n_tones; ++m)
          for (int k = 0; k < nc; ++k)
            v[m * nc + k] = warm(m, k) / (0.5 * p.model.tones[m / 2].cap);
      return v;
    }
    const int Nw = int(warm.cols());
    for (int j = 0; j < n_tones; ++j) {
      const double half = 0.5 * p.model.tones[j].cap;
      for (int r = 0; r < N; ++r) {
        const int rw = std::min(Nw - 1, int(double(r) * Nw / N));
        const double ua = warm(2 * j, rw), ub = warm(2 * j + 1, rw);
        if (opt.mode == AmpMode::PhaseOnly) {
          v[j * N + r] = std::atan2(ub, ua);
        } else {
          v[(2 * j) * N + r] = ua / half;
          v[(2 * j + 1) * N + r] = ub / half;
        }
      }
    }
    return v;
  }
};

}  // namespace

OptimResult grape_optimize(const GrapeProblem& p, const OptimOptions& opt,
                           int restart_index, const Eigen::MatrixXd& warm) {
  p.validate();
  ModeAdapter ad(p, opt);
  ParamSpace ps;
  ps.n = ad.n_params();
  ps.eval = [&](const Eigen::VectorXd& v) { return ad.eval(v); };
  ps.eval_grad = [&](const Eigen::VectorXd& v) { return ad.eval_grad(v); };
  ps.project = [&](Eigen::VectorXd& v) { ad.project(v); };
  const Eigen::VectorXd v0 = warm.size() ? ad.from_warm(warm) : ad.init(restart_index);
  AscentTrace tr = ascend(ps, v0, opt);

  OptimResult res;
  res.u = ad.controls(tr.p);
  if (opt.mode == AmpMode::Fourier) res.coeff = ad.coeff_matrix(tr.p);
  res.chi = ad.chi_of(tr.p);
  res.f = tr.f;
  res.iters = tr.iters;
  res.converged = tr.converged;
  res.seed = opt.seed;
  res.f_history = std::move(tr.f_history);
  return res;
}

MultiStartResult grape_multistart(const GrapeProblem& p, const MultiStartOptions& opt,
                                  const Eigen::MatrixXd& warm) {
  MultiStartResult out;
  std::vector<OptimResult> results(opt.restarts);
  ParallelPlan plan;
  plan.serial = opt.serial;
  parallel_for(
      opt.restarts,
      [&](int k) {
        // restart 1 is reserved for a warm start when one is supplied
        if (k == 1 && warm.size())
          results[k] = grape_optimize(p, opt.optim, k, warm);
        else
          results[k] = grape_optimize(p, opt.optim, k);
      },
      plan);
  out.restart_f.resize(opt.restarts);
  int best = 0;
  for (int k = 0; k < opt.restarts; ++k) {
    out.restart_f[k] = results[k].f;
    if (results[k].f > results[best].f) best = k;
  }
  out.best = std::move(results[best]);
  return out;
}

TimeScanResult find_optimal_time(const std::function<GrapeProblem(double)>& make_problem,
                                 double t_min, double t_max, const TimeScanOptions& opt) {
  if (!(t_min > 0.0) || !(t_max > t_min))
    throw std::invalid_argument("find_optimal_time: bad bracket");
  TimeScanResult out;

  auto sweep = [&](double lo, double hi, int points, std::vector<TimeScanPoint>& curve,
                   int pass) -> int {
    Eigen::MatrixXd warm;
    int first_above = -1;
    for (int i = 0; i < points; ++i) {
      const double T = lo + (hi - lo) * double(i) / double(points - 1);
      GrapeProblem prob = make_problem(T);
      MultiStartOptions ms = opt.ms;
      // distinct deterministic seeds per (pass, grid point)
      ms.optim.seed = splitmix64(opt.ms.optim.seed ^ (std::uint64_t(pass) << 32 ^ i));
      const MultiStartResult r =
          grape_multistart(prob, ms, opt.warm_chain ? warm : Eigen::MatrixXd());
      curve.push_back({T, r.best.f});
      if (opt.warm_chain) warm = r.best.u;
      if (r.best.f >= opt.threshold) {
        if (first_above < 0) {
          first_above = i;
          out.best = r.best;
          out.t_opt = T;
        }
        if (pass == 0) break;  // coarse pass only needs the transition
      }
    }
    return first_above;
  };

  const int i0 = sweep(t_min, t_max, opt.points, out.coarse, 0);
  if (i0 < 0) return out;  // never clears the threshold
  out.found = true;
  if (opt.refine && i0 > 0) {
    const double lo = out.coarse[i0 - 1].T, hi = out.coarse[i0].T;
    const double coarse_t = out.t_opt;
    const OptimResult coarse_best = out.best;
    const int iF = sweep(lo, hi, opt.points, out.fine, 1);
    if (iF < 0) {
      // refinement failed to re-cross (threshold-edge flakiness): keep the
      // coarse-pass solution
      out.t_opt = coarse_t;
      out.best = coarse_best;
    }
  }
  return out;
}

}  // namespace qoc
