// Serial reference against the OpenMP kernels on the hot paths.

#include <numeric>
#include <random>

#include <benchmark/benchmark.h>

#include "pgl/detection.hpp"
#include "pgl/extremal.hpp"

namespace {

using namespace pgl;

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

Family random_family(const GridShape& shape, double density, unsigned seed) {
    std::mt19937 rng(seed);
    std::bernoulli_distribution coin(density);
    Family f(shape);
    for (std::size_t i = 0; i < shape.size(); ++i)
        if (coin(rng)) f.insert_index(i);
    return f;
}

void BM_ExhaustiveChainFree(benchmark::State& state) {
    ExtremalOptions o;
    o.exec = exec_of(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(max_avoiding(GridShape::uniform(2, 4), Poset::chain(3), CopyMode::weak, o).optimum);
}
BENCHMARK(BM_ExhaustiveChainFree)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BranchAndBoundStrongChain(benchmark::State& state) {
    ExtremalOptions o;
    o.exec = exec_of(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(max_avoiding(GridShape::uniform(7, 2), Poset::chain(3), CopyMode::strong, o).optimum);
}
BENCHMARK(BM_BranchAndBoundStrongChain)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_CopySearch(benchmark::State& state) {
    const Family F = random_family(GridShape::uniform(6, 3), 0.08, 5);
    const Poset P = complete_multilevel(std::vector<int>{2, 2, 2});
    SearchOptions so;
    so.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(find_copy(F, P, CopyMode::induced, so).has_value());
}
BENCHMARK(BM_CopySearch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_JoinScan(benchmark::State& state) {
    // An antichain plus nothing above it: the scan has to exhaust every pair.
    const GridShape shape({400, 400});
    Family F(shape);
    for (int a = 1; a <= 400; ++a) F.insert({a, 401 - a});
    for (auto _ : state) benchmark::DoNotOptimize(find_join_triple(F, exec_of(state)).has_value());
}
BENCHMARK(BM_JoinScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GoodElements(benchmark::State& state) {
    const Family F = random_family(GridShape::uniform(27, 3), 0.2, 9);
    const auto ladder = ScaleLadder::powers(3, 3);
    for (auto _ : state) benchmark::DoNotOptimize(good_elements(F, ladder, exec_of(state)).size());
}
BENCHMARK(BM_GoodElements)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
