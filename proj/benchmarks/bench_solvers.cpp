#include <benchmark/benchmark.h>

#include <random>

#include "oblique/domain.hpp"
#include "oblique/game.hpp"
#include "oblique/oblique_rbsde.hpp"
#include "oblique/penalize.hpp"

using namespace oblique;

namespace {

CostTables uniform_costs(std::size_t m, double k, double l) {
    ModeMatrix K(m, m, k), L(m, m, l);
    for (std::size_t a = 0; a < m; ++a) K(a, a) = L(a, a) = 0;
    return {K, L};
}

GameSpec square_game(std::size_t m) {
    ModeMatrix c(m, m), beta(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            c(i, j) = i == j ? 2.0 : -1.0;
            beta(i, j) = 0.05 * (static_cast<double>(i) - static_cast<double>(j));
        }
    return {uniform_costs(m, 1.0, 0.7), GeneratorSpec::mode_constant(c), TerminalSpec::affine(ModeMatrix(m, m), beta),
            1.0, 1};
}

void BM_Projection(benchmark::State& state) {
    const std::size_t m = state.range(0);
    const ObliqueDomain dom(uniform_costs(m, 1.0, 0.7));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    ModeMatrix y(m, m);
    for (double& v : y.values()) v = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(dom.project(y));
}
BENCHMARK(BM_Projection)->Arg(2)->Arg(3)->Arg(4);

void BM_DirectSolveTree(benchmark::State& state) {
    const GameSpec g = square_game(state.range(1));
    const PathTree t = PathTree::build(state.range(0), 1, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_rbsde(g, t));
    state.counters["nodes"] = static_cast<double>(t.node_count());
}
BENCHMARK(BM_DirectSolveTree)->Args({8, 2})->Args({12, 2})->Args({12, 3})->Unit(benchmark::kMillisecond);

void BM_DirectSolveLattice(benchmark::State& state) {
    const GameSpec g = square_game(2);
    const PathTree t = PathTree::build_recombining(state.range(0), 1, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(solve_rbsde(g, t));
}
BENCHMARK(BM_DirectSolveLattice)->Arg(20)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_PenalizedSolve(benchmark::State& state) {
    const GameSpec g = square_game(2);
    const PathTree t = PathTree::build(10, 1, 1.0);
    const double n = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(solve_penalized(g, t, n));
}
BENCHMARK(BM_PenalizedSolve)->Arg(1)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SwitchedEvaluation(benchmark::State& state) {
    const GameSpec g = square_game(3);
    const PathTree t = PathTree::build(12, 1, 1.0);
    const SaddleStrategies s = extract_saddle(t, solve_rbsde(g, t).Y, g.costs);
    for (auto _ : state) benchmark::DoNotOptimize(eval_switched(g, t, s.a, s.b));
}
BENCHMARK(BM_SwitchedEvaluation)->Unit(benchmark::kMillisecond);

void BM_BruteForceTwoSteps(benchmark::State& state) {
    const GameSpec g = square_game(2);
    const PathTree t = PathTree::build(2, 1, 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(brute_force_values(g, t));
}
BENCHMARK(BM_BruteForceTwoSteps)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
