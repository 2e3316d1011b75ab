#include <benchmark/benchmark.h>

#include "bench_common.hpp"
#include "gramqubo/annealer.hpp"
#include "gramqubo/encoding.hpp"

namespace {

// One class update as the trainer performs it; range(0) is bits per parameter,
// range(1) the sweep count.
void BM_AnnealClassUpdate(benchmark::State& state) {
    const auto bits = static_cast<std::size_t>(state.range(0));
    const auto [g, grad] = random_class_problem(3);
    const gramqubo::PrecisionVector p(bits, 0.5);
    const auto problem = gramqubo::normalize(gramqubo::build_class_qubo(g, grad, p, false));
    gramqubo::AnnealConfig cfg;
    cfg.num_sweeps = static_cast<std::size_t>(state.range(1));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        cfg.seed = seed++;
        benchmark::DoNotOptimize(gramqubo::anneal(problem, cfg).energy);
    }
    state.counters["flips_per_s"] = benchmark::Counter(
        static_cast<double>(problem.size() * cfg.num_sweeps), benchmark::Counter::kIsIterationInvariantRate);
}
BENCHMARK(BM_AnnealClassUpdate)
    ->Args({5, 100})
    ->Args({20, 100})
    ->Args({20, 1000})
    ->Unit(benchmark::kMillisecond);

}  // namespace
