// Serial reference vs OpenMP kernels. The parallel variants take the thread
// count as the benchmark argument.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "hdoa/array_core.hpp"
#include "hdoa/kernels.hpp"
#include "hdoa/rng.hpp"

using namespace hdoa;
namespace k = hdoa::kernels;

namespace {

const std::vector<int> kSelection{1, 2, 3, 4, 125, 126, 127, 128};

std::vector<double> scan_grid_deg(double step)
{
    std::vector<double> g;
    for (double d = -90.0; d <= 90.0 + 1e-9; d += step) g.push_back(d);
    return g;
}

std::vector<double> scan_grid_rad(double step)
{
    auto g = scan_grid_deg(step);
    for (auto& v : g) v = deg2rad(v);
    return g;
}

struct SwapCase {
    k::ScanTable table{128, 30.0, scan_grid_deg(0.05), 12.75};
    std::vector<cd> base = table.pattern_sum(kSelection);
    std::vector<k::Swap> swaps;
    SwapCase()
    {
        for (int out : kSelection)
            for (int in = 5; in <= 124; ++in) swaps.push_back({out, in});
    }
};

CMatrix random_dictionary(Eigen::Index rows, Eigen::Index cols)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    CMatrix a(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) a(i, j) = cd(n(rng), n(rng));
    return a;
}

// One Monte Carlo trial's worth of work: snapshots and a sample covariance.
double trial_work(std::size_t i)
{
    static const auto geo = ArrayGeometry::ula(16);
    static const auto src = SourceEnsemble::equal_power({deg2rad(-10.0), deg2rad(25.0)}, 0.0);
    const auto r = sample_covariance(synthesize_snapshots(geo, src, 200, derive_seed(5, i)));
    return r.trace();
}

void BM_BeampatternSerial(benchmark::State& state)
{
    const auto grid = scan_grid_rad(0.05);
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::beampattern(kSelection, 0.5, grid));
}

void BM_BeampatternParallel(benchmark::State& state)
{
    k::set_threads(static_cast<int>(state.range(0)));
    const auto grid = scan_grid_rad(0.05);
    for (auto _ : state) benchmark::DoNotOptimize(k::parallel::beampattern(kSelection, 0.5, grid));
}

void BM_SwapSidelobesSerial(benchmark::State& state)
{
    const SwapCase c;
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::swap_sidelobes(c.table, c.base, c.swaps));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.swaps.size()));
}

void BM_SwapSidelobesParallel(benchmark::State& state)
{
    k::set_threads(static_cast<int>(state.range(0)));
    const SwapCase c;
    for (auto _ : state) benchmark::DoNotOptimize(k::parallel::swap_sidelobes(c.table, c.base, c.swaps));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(c.swaps.size()));
}

// 841 x 180 is the virtual-signal dictionary size for a 29-row stacked covariance.
void BM_GramSerial(benchmark::State& state)
{
    const CMatrix a = random_dictionary(841, 180);
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::gram(a));
}

void BM_GramParallel(benchmark::State& state)
{
    k::set_threads(static_cast<int>(state.range(0)));
    const CMatrix a = random_dictionary(841, 180);
    for (auto _ : state) benchmark::DoNotOptimize(k::parallel::gram(a));
}

void BM_MapSerial(benchmark::State& state)
{
    for (auto _ : state) benchmark::DoNotOptimize(k::serial::map<double>(256, trial_work));
}

void BM_MapParallel(benchmark::State& state)
{
    k::set_threads(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(k::parallel::map<double>(256, trial_work));
}

void thread_counts(benchmark::internal::Benchmark* b)
{
    for (int t : {1, 2, 4, 8}) b->Arg(t);
    b->ArgName("threads")->UseRealTime()->Unit(benchmark::kMicrosecond);
}

}  // namespace

BENCHMARK(BM_BeampatternSerial)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BeampatternParallel)->Apply(thread_counts);
BENCHMARK(BM_SwapSidelobesSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SwapSidelobesParallel)->Apply(thread_counts);
BENCHMARK(BM_GramSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramParallel)->Apply(thread_counts);
BENCHMARK(BM_MapSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MapParallel)->Apply(thread_counts);

BENCHMARK_MAIN();
