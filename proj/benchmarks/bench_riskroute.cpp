#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "riskroute/ambiguity.hpp"
#include "riskroute/convolution.hpp"
#include "riskroute/inner_problem.hpp"
#include "riskroute/nominal_solver.hpp"
#include "riskroute/policy_eval.hpp"
#include "riskroute/robust_solver.hpp"
#include "riskroute/sliding_hull.hpp"

using namespace riskroute;

namespace {

GridDistribution random_pmf(std::mt19937_64& rng, GridIndex first, GridIndex cells) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<double> w(static_cast<std::size_t>(cells));
    double total = 0.0;
    for (double& v : w) total += v = unit(rng) + 1e-3;
    for (double& v : w) v /= total;
    return GridDistribution(1.0, first, std::move(w));
}

std::vector<double> random_values(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = unit(rng);
    return v;
}

void BM_ConvolvePointwise(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto cells = state.range(0);
    const GridDistribution pmf = random_pmf(rng, 1, cells);
    const std::vector<double> u = random_values(rng, static_cast<std::size_t>(4 * cells));
    const GridWindow w{0, u};
    const GridIndex k_begin = pmf.last_index();
    const GridIndex count = 2 * cells;
    for (auto _ : state) {
        double sum = 0.0;
        for (GridIndex k = k_begin; k < k_begin + count; ++k) sum += convolve_pointwise(w, pmf, k);
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_ConvolvePointwise)->RangeMultiplier(4)->Range(16, 1024);

void BM_ConvolveFftBlock(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto cells = state.range(0);
    const GridDistribution pmf = random_pmf(rng, 1, cells);
    const std::vector<double> u = random_values(rng, static_cast<std::size_t>(4 * cells));
    const GridWindow w{0, u};
    const auto count = static_cast<std::size_t>(2 * cells);
    for (auto _ : state) benchmark::DoNotOptimize(convolve_fft_block(w, pmf, pmf.last_index(), count));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(count));
}
BENCHMARK(BM_ConvolveFftBlock)->RangeMultiplier(4)->Range(16, 1024);

void BM_ConvolveStreaming(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const auto cells = state.range(0);
    const GridDistribution pmf = random_pmf(rng, 1, cells);
    const std::vector<double> u = random_values(rng, static_cast<std::size_t>(4 * cells));
    for (auto _ : state) {
        StreamConvolver conv(pmf, 0);
        for (std::size_t i = 0; i < u.size(); ++i) benchmark::DoNotOptimize(conv.feed(static_cast<GridIndex>(i), u[i]));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(u.size()));
}
BENCHMARK(BM_ConvolveStreaming)->RangeMultiplier(4)->Range(16, 1024);

void BM_SlidingHull(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const std::vector<double> y = random_values(rng, 100000);
    const auto window = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        SlidingUpperHull hull(window);
        for (std::size_t n = 0; n < y.size(); ++n) hull.feed(static_cast<double>(n), y[n]);
        benchmark::DoNotOptimize(hull.extreme_count());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(y.size()));
}
BENCHMARK(BM_SlidingHull)->RangeMultiplier(8)->Range(8, 4096);

void BM_InnerProblem(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const GridIndex cells = 64;
    const auto method = static_cast<InnerMethod>(state.range(0));
    const double lo = 1.0;
    const double hi = static_cast<double>(cells);
    std::vector<BoundedStatistic> stats{{PiecewiseAffineStatistic::identity(lo, hi), {20.0, 30.0}}};
    if (method == InnerMethod::column_generation) {
        stats.push_back({PiecewiseAffineStatistic::absolute_deviation(lo, hi, 25.0, 1.0), {0.0, 8.0}});
    }
    const AmbiguitySet set(1.0, 1, cells, std::move(stats));
    const std::vector<double> u = random_values(rng, 2048);
    for (auto _ : state) {
        InnerProblem inner(set, method);
        double sum = 0.0;
        for (GridIndex k = cells; k < 2048; ++k) sum += inner.evaluate(k, GridWindow{0, u});
        benchmark::DoNotOptimize(sum);
    }
    state.SetItemsProcessed(state.iterations() * (2048 - cells));
}
BENCHMARK(BM_InnerProblem)
    ->Arg(static_cast<int>(InnerMethod::mean_only))
    ->Arg(static_cast<int>(InnerMethod::column_generation))
    ->Unit(benchmark::kMillisecond);

void BM_SolveNominal(benchmark::State& state) {
    const Instance inst = synthetic_two_route_network();
    NominalOptions opt;
    opt.engine = static_cast<ConvolutionEngine>(state.range(0));
    const BudgetGrid grid(1.0, 90.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_nominal(inst.graph, inst.pmfs, RiskFunction::on_time(), grid, opt));
    }
}
BENCHMARK(BM_SolveNominal)
    ->Arg(static_cast<int>(ConvolutionEngine::pointwise))
    ->Arg(static_cast<int>(ConvolutionEngine::fft_block))
    ->Arg(static_cast<int>(ConvolutionEngine::streaming))
    ->Unit(benchmark::kMillisecond);

void BM_SolveRobust(benchmark::State& state) {
    const Instance inst = synthetic_two_route_network();
    const auto samples = draw_samples(inst.pmfs, 25, 4);
    PresetConfig preset;
    preset.replicates = 200;
    std::vector<AmbiguitySet> sets;
    std::vector<double> lo;
    std::vector<double> hi;
    for (const auto& s : samples) {
        sets.push_back(state.range(0) ? preset_robust_md(s, preset) : preset_robust_m(s, preset));
        lo.push_back(static_cast<double>(sets.back().support_first()));
        hi.push_back(static_cast<double>(sets.back().support_last()));
    }
    const Graph graph = inst.graph.with_bounds(lo, hi);
    const BudgetGrid grid(1.0, 90.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_robust(graph, sets, RiskFunction::on_time(), grid));
}
BENCHMARK(BM_SolveRobust)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
