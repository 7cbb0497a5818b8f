// Serial reference against the OpenMP path for each oracle kernel.
//   ./bench_kernels --benchmark_filter=Trapezoid

#include <benchmark/benchmark.h>
#include <fmt/core.h>

#include <cmath>
#include <vector>

#include "ckit/kernels.hpp"
#include "ckit/oracle.hpp"

using namespace ckit;
using kernels::Exec;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : fmt::format("parallel x{}", kernels::thread_count()));
}

void Trapezoid(benchmark::State& state) {
  const Density1D p = Density1D::exponential(1), q = Density1D::half_normal(1);
  const auto f = [&](double x) { return std::exp(0.5 * p.log_pdf(x) + 0.5 * q.log_pdf(x)); };
  const std::size_t n = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::trapezoid(f, 0.0, 40.0, n, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
  label(state);
}

void MonteCarlo(benchmark::State& state) {
  const Density1D p = Density1D::normal(0, 1), q = Density1D::normal(1, 2);
  const auto n = static_cast<std::uint64_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(kernels::log_ratio_moments(p, q, n, 42, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
  label(state);
}

void RhoSweep(benchmark::State& state) {
  const Density1D p = Density1D::exponential(1), q = Density1D::half_normal(1);
  std::vector<double> alphas(static_cast<std::size_t>(state.range(1)));
  for (std::size_t k = 0; k < alphas.size(); ++k) alphas[k] = (k + 1.0) / (alphas.size() + 1.0);
  const auto f = [&](double a) { return oracle::bhattacharyya_coeff_quad(p, q, a); };
  for (auto _ : state) benchmark::DoNotOptimize(kernels::map_values(f, alphas, exec_of(state)));
  state.SetItemsProcessed(state.iterations() * state.range(1));
  label(state);
}

void Pairwise(benchmark::State& state) {
  std::vector<GaussianParams> params;
  for (int i = 0; i < state.range(1); ++i) {
    const double d[] = {1.0 + 0.1 * i, 2.0, 0.5 + 0.05 * i};
    params.push_back({{0.1 * i, -0.2 * i, 0.3}, SpdMatrix::diagonal(d)});
  }
  for (auto _ : state) benchmark::DoNotOptimize(kernels::pairwise_chernoff(params, 1e-8, exec_of(state)));
  label(state);
}

}  // namespace

BENCHMARK(Trapezoid)->ArgsProduct({{0, 1}, {1 << 20}})->Unit(benchmark::kMillisecond);
BENCHMARK(MonteCarlo)->ArgsProduct({{0, 1}, {1 << 20}})->Unit(benchmark::kMillisecond);
BENCHMARK(RhoSweep)->ArgsProduct({{0, 1}, {101}})->Unit(benchmark::kMillisecond);
BENCHMARK(Pairwise)->ArgsProduct({{0, 1}, {32}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
