#include <benchmark/benchmark.h>

#include <random>

#include "morandim/dims.hpp"
#include "morandim/k2.hpp"
#include "morandim/selectors.hpp"
#include "morandim/sim.hpp"

using namespace morandim;

namespace {

k2::K2Spec ten_pair() {
    return k2::make_spec(0.5, {1.1, 1.3, 1.5, 1.8, 1.7, 1.9, 1.6, 2.9, 5, 7},
                         {10.1, 7.0, 4.6, 4.2, 2.8, 2.2, 1.7, 1.6, 2.8, 3},
                         std::vector<double>(10, 0.1));
}

// n scale atoms, K = 2, single weight
MoranModel chain_model(int n) {
    std::mt19937_64 rng(n);
    auto u = [&](double lo, double hi) {
        return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    };
    std::vector<MassIfs> ifs;
    for (int i = 0; i < n; ++i) {
        ifs.push_back({1.0 / n, {{u(0.05, 0.4), u(0.05, 0.4)}, {}}});
    }
    return make_independent_model(2, std::move(ifs), {{1.0, {{0.4, 0.6}}}});
}

void BM_hausdorff(benchmark::State& state) {
    MoranModel m = k2::to_model(ten_pair());
    auto em = expand(m);
    for (auto _ : state) benchmark::DoNotOptimize(hausdorff_dimension(em));
}
BENCHMARK(BM_hausdorff);

void BM_updim_bisect(benchmark::State& state) {
    auto em = expand(chain_model(static_cast<int>(state.range(0))));
    DimOptions opt;
    opt.method = Method::bisect;
    for (auto _ : state) benchmark::DoNotOptimize(upper_dimension(em, opt));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_updim_bisect)->RangeMultiplier(2)->Range(2, 16);

void BM_updim_enum(benchmark::State& state) {
    auto em = expand(chain_model(static_cast<int>(state.range(0))));
    DimOptions opt;
    opt.method = Method::enumeration;
    for (auto _ : state) benchmark::DoNotOptimize(upper_dimension(em, opt));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_updim_enum)->RangeMultiplier(2)->Range(2, 16)->Complexity();

void BM_min_by_transitions(benchmark::State& state) {
    auto spec = ten_pair();
    for (auto _ : state) benchmark::DoNotOptimize(k2::minimize_by_transitions(spec));
}
BENCHMARK(BM_min_by_transitions);

void BM_min_by_grid(benchmark::State& state) {
    auto spec = ten_pair();
    for (auto _ : state) benchmark::DoNotOptimize(k2::minimize_by_grid(spec));
}
BENCHMARK(BM_min_by_grid);

void BM_greedy_paths(benchmark::State& state) {
    MoranModel m = chain_model(4);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sim::empirical_dimensions(m, 100000, 1, 7));
    }
}
BENCHMARK(BM_greedy_paths);

}  // namespace

BENCHMARK_MAIN();
