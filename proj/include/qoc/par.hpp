#pragma once

// Thin concurrency layer: an OpenMP loop with a serial reference path, plus
// compensated reductions. Parallel sections only ever write to per-index
// slots; every reduction then runs serially in index order, so results are
// bitwise independent of scheduling and of the thread count.

#include <functional>
#include <vector>

namespace qoc {

// 0 restores the OpenMP default
void set_thread_cap(int n);
int thread_cap();

struct ParallelPlan {
  bool serial = false;  // force the reference path
};

void parallel_for(int n, const std::function<void(int)>& fn, const ParallelPlan& plan = {});

// Kahan-compensated sum in index order
double kahan_sum(const std::vector<double>& xs);

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// two-pass mean and standard error, both passes compensated
MeanStderr mean_stderr(const std::vector<double>& xs);

}  // namespace qoc
