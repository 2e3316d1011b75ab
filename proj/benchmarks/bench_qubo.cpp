#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "gramqubo/encoding.hpp"

namespace {

void BM_BuildClassQubo(benchmark::State& state) {
    const auto bits = static_cast<std::size_t>(state.range(0));
    const auto [g, grad] = random_class_problem(1);
    const gramqubo::PrecisionVector p(bits, 0.5);
    for (auto _ : state) {
        auto problem = gramqubo::normalize(gramqubo::build_class_qubo(g, grad, p, false));
        benchmark::DoNotOptimize(problem.quadratic.data());
    }
    state.counters["vars"] = static_cast<double>(19 * bits);
}
BENCHMARK(BM_BuildClassQubo)->Arg(5)->Arg(10)->Arg(15)->Arg(20);

void BM_BruteForce(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    gramqubo::Rng rng(7);
    gramqubo::QuboProblem problem(n);
    for (std::size_t i = 0; i < n; ++i) {
        problem.linear(static_cast<Eigen::Index>(i)) = rng.normal();
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = 0.5 * rng.normal();
            problem.quadratic(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            problem.quadratic(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(gramqubo::brute_force_min(problem).energy);
}
BENCHMARK(BM_BruteForce)->Arg(12)->Arg(16)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
