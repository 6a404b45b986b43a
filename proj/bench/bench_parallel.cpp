// Serial reference kernels against their OpenMP counterparts.
// Set GLE_THREADS to cap the parallel worker count.

#include <benchmark/benchmark.h>

#include <random>

#include "gle/correlation.hpp"
#include "gle/projection.hpp"
#include "gle/reduction.hpp"
#include "gle/simulate.hpp"

namespace {

using gle::Exec;
using gle::Matrix;

struct Problem {
  gle::FullModel model;
  gle::PartitionBasis basis;
  gle::ProjectedBlocks blocks;
  gle::ReducedModel reduced;
};

const Problem& problem() {
  static const Problem p = [] {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    const long n = 40, m = 4;
    Matrix y(n, n);
    for (long i = 0; i < y.size(); ++i) y(i) = g(rng);
    Problem p;
    p.model.stiffness = y * y.transpose() / n + Matrix::Identity(n, n);
    p.model.damping = 2.0 * Matrix::Identity(n, n);
    Matrix z(n, m);
    for (long i = 0; i < z.size(); ++i) z(i) = g(rng);
    Eigen::HouseholderQR<Matrix> qr(z);
    p.basis = gle::make_partition(qr.householderQ() * Matrix::Identity(n, m));
    p.blocks = gle::compute_blocks(p.model, p.basis);
    p.reduced = gle::fit_rational(p.blocks, gle::compute_moments(p.blocks, 4), 1, 1.0);
    return p;
  }();
  return p;
}

Exec mode(const benchmark::State& s) { return s.range(0) == 0 ? Exec::serial : Exec::parallel; }

void BM_KernelGrid(benchmark::State& s) {
  const auto times = gle::uniform_grid(0.0, 5.0, 127);
  for (auto _ : s) benchmark::DoNotOptimize(gle::eval_kernel_grid(problem().blocks, times, mode(s)));
}

void BM_VacfFull(benchmark::State& s) {
  const auto times = gle::uniform_grid(0.0, 5.0, 63);
  for (auto _ : s) benchmark::DoNotOptimize(gle::vacf_full(problem().model, problem().basis, times, mode(s)));
}

void BM_Ensemble(benchmark::State& s) {
  gle::SimConfig cfg;
  cfg.steps = 2000;
  cfg.ensemble = 16;
  for (auto _ : s) benchmark::DoNotOptimize(gle::simulate_reduced(problem().reduced, cfg, mode(s)));
}

void BM_Autocorrelation(benchmark::State& s) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  std::vector<Matrix> members(8, Matrix(20000, 4));
  for (auto& x : members)
    for (long i = 0; i < x.size(); ++i) x(i) = g(rng);
  for (auto _ : s) benchmark::DoNotOptimize(gle::empirical_autocorrelation(members, 0.01, 100, mode(s)));
}

}  // namespace

BENCHMARK(BM_KernelGrid)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VacfFull)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ensemble)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Autocorrelation)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
