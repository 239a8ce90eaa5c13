#include "qoc/par.hpp"

#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace qoc {

namespace {
int g_cap = 0;
}

void set_thread_cap(int n) {
  g_cap = n < 0 ? 0 : n;
#ifdef _OPENMP
  if (g_cap > 0) omp_set_num_threads(g_cap);
#endif
}

int thread_cap() { return g_cap; }

void parallel_for(int n, const std::function<void(int)>& fn, const ParallelPlan& plan) {
  if (n <= 0) return;
  bool serial = plan.serial || g_cap == 1;
#ifndef _OPENMP
  serial = true;
#endif
  if (serial) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#ifdef _OPENMP
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      fn(i);
    } catch (...) {
#pragma omp critical
      if (!err) err = std::current_exception();
    }
  }
  if (err) std::rethrow_exception(err);
#endif
}

double kahan_sum(const std::vector<double>& xs) {
  double s = 0.0, c = 0.0;
  for (double x : xs) {
    const double y = x - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr r;
  const size_t n = xs.size();
  if (n == 0) return r;
  r.mean = kahan_sum(xs) / double(n);
  if (n == 1) return r;
  std::vector<double> sq(n);
  for (size_t i = 0; i < n; ++i) {
    const double d = xs[i] - r.mean;
    sq[i] = d * d;
  }
  const double var = kahan_sum(sq) / double(n - 1);
  r.stderr_ = std::sqrt(var / double(n));
  return r;
}

}  // namespace qoc
