// Evaluator kernels (serial vs OpenMP) and plan dispatch (parallel vs sequential).

#include "ezb/eval/metrics.hpp"

#include "support.hpp"

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

using namespace ezb;

namespace {

struct Batch {
    std::size_t dim;
    std::vector<double> rows, query, out;

    Batch(std::size_t n, std::size_t d) : dim(d), rows(n * d), query(d), out(n) {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-1, 1);
        for (auto& x : rows) x = u(rng);
        for (auto& x : query) x = u(rng);
    }
};

constexpr std::size_t kDim = 512;

void BM_BatchCosineSerial(benchmark::State& state) {
    Batch b(static_cast<std::size_t>(state.range(0)), kDim);
    for (auto _ : state) {
        eval::batch_cosine_serial(b.rows, b.dim, b.query, b.out);
        benchmark::DoNotOptimize(b.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchCosineParallel(benchmark::State& state) {
    Batch b(static_cast<std::size_t>(state.range(0)), kDim);
    for (auto _ : state) {
        eval::batch_cosine(b.rows, b.dim, b.query, b.out);
        benchmark::DoNotOptimize(b.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchDotSerial(benchmark::State& state) {
    Batch b(static_cast<std::size_t>(state.range(0)), kDim);
    for (auto _ : state) {
        eval::batch_dot_serial(b.rows, b.dim, b.query, b.out);
        benchmark::DoNotOptimize(b.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_BatchDotParallel(benchmark::State& state) {
    Batch b(static_cast<std::size_t>(state.range(0)), kDim);
    for (auto _ : state) {
        eval::batch_dot(b.rows, b.dim, b.query, b.out);
        benchmark::DoNotOptimize(b.out.data());
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

// Five lanes, each model call delayed by state.range(0) ms.
void BM_Dispatch(benchmark::State& state, bool sequential) {
    std::vector<Directive> ds;
    ds.emplace_back(Domain::geo, "a big smile", "bench");
    ds.emplace_back(Domain::mat, "chrome skin", "bench");
    ds.emplace_back(Domain::light, "blue lighting", "bench");
    ds.emplace_back(Domain::cam, "a tight close-up", "bench");
    ds.emplace_back(Domain::bg, "red fog", "bench");
    Plan plan(UserIntent("bench"), std::move(ds), 0);
    auto profiles = ezb::testing::session_config().profiles;
    for (auto _ : state) {
        state.PauseTiming();
        auto provider = ezb::testing::replay("five_domain.json", static_cast<int>(state.range(0)));
        llm::Gateway gateway(provider);
        exec::MockExecutor executor(ezb::testing::studio());
        agents::DebugAgent debug(&gateway, ezb::testing::debug_prompt());
        VirtualClock clock;
        agents::SubAgentRuntime runtime(gateway, executor, debug, clock);
        state.ResumeTiming();
        auto out = runtime.execute_plan(plan, profiles, {sequential, true});
        benchmark::DoNotOptimize(out);
    }
}

} // namespace

BENCHMARK(BM_BatchCosineSerial)->Arg(1 << 10)->Arg(1 << 14);
BENCHMARK(BM_BatchCosineParallel)->Arg(1 << 10)->Arg(1 << 14);
BENCHMARK(BM_BatchDotSerial)->Arg(1 << 10)->Arg(1 << 14);
BENCHMARK(BM_BatchDotParallel)->Arg(1 << 10)->Arg(1 << 14);
BENCHMARK_CAPTURE(BM_Dispatch, parallel, false)->Arg(0)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK_CAPTURE(BM_Dispatch, sequential, true)->Arg(0)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
