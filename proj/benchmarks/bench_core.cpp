#include "stabcode/config.hpp"
#include "stabcode/mdc.hpp"
#include "stabcode/quantizer.hpp"
#include "stabcode/sim.hpp"
#include "stabcode/stability.hpp"

#include <benchmark/benchmark.h>

using namespace stabcode;

static void BM_assignment_r7k3(benchmark::State& state) {
    const LatticeParams params{1.0, 7, 3};
    for (auto _ : state) benchmark::DoNotOptimize(solve_assignment(params));
}
BENCHMARK(BM_assignment_r7k3);

static void BM_h2_norm(benchmark::State& state) {
    const ClosedLoopSystem loop = example_plant();
    for (auto _ : state) benchmark::DoNotOptimize(analyze_loop(loop));
}
BENCHMARK(BM_h2_norm);

static void BM_quantize(benchmark::State& state) {
    const DitheredQuantizer q{1.5, 7};
    std::uint64_t t = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(quantize(q, 3.7, t, 0));
        ++t;
    }
}
BENCHMARK(BM_quantize);

static void BM_mss_test(benchmark::State& state) {
    const ArtifactConfig cfg = default_config();
    const MJLSModel model =
        build_mjls(cfg.loop, cfg.code_by_name("md32_stab"), ErasureDistribution{0.3, 3});
    for (auto _ : state) benchmark::DoNotOptimize(mss_spectral_test(model));
}
BENCHMARK(BM_mss_test);

static void BM_closed_loop_10k(benchmark::State& state) {
    const ArtifactConfig cfg = default_config();
    SimulationConfig sim;
    sim.loop = cfg.loop;
    sim.code = cfg.code_by_name("md32");
    sim.channel = ErasureDistribution{0.1, 3};
    sim.horizon = 10000;
    sim.warmup = 100;
    sim.coder = CoderKind::entropy_measure;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run(sim));
        ++sim.seed;
    }
}
BENCHMARK(BM_closed_loop_10k);

BENCHMARK_MAIN();
