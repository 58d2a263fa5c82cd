#include <benchmark/benchmark.h>

#include <random>

#include "qrng/entropy.hpp"
#include "qrng/extractor.hpp"
#include "qrng/sensor.hpp"
#include "qrng/stattests.hpp"

namespace {

void BM_SimulateFrame(benchmark::State& state) {
    const auto cfg = qrng::sensor_preset("nokia-n9");
    const double n_bar = static_cast<double>(state.range(0));
    std::uint64_t frame = 0;
    for (auto _ : state) {
        auto f = qrng::simulate_frame(cfg, n_bar, 512, 512, 9, frame++, 1);
        benchmark::DoNotOptimize(f.codes.data());
    }
    state.SetItemsProcessed(state.iterations() * 512 * 512);
}
// Below and above the Poisson sampler switch-over.
BENCHMARK(BM_SimulateFrame)->Arg(10)->Arg(410)->Arg(15000)->Unit(benchmark::kMillisecond);

void BM_PoissonEntropyExact(benchmark::State& state) {
    const double n_bar = static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(qrng::poisson_entropy_exact(n_bar));
}
BENCHMARK(BM_PoissonEntropyExact)->Arg(1)->Arg(410)->Arg(1000000);

void BM_Battery(benchmark::State& state) {
    std::mt19937_64 rng(2);
    qrng::BitVector bits(static_cast<std::size_t>(state.range(0)));
    for (auto& w : bits.mutable_words()) w = rng();
    for (auto _ : state) {
        auto r = qrng::run_battery(bits);
        benchmark::DoNotOptimize(r.passed);
    }
    state.SetBytesProcessed(state.iterations() * state.range(0) / 8);
}
BENCHMARK(BM_Battery)->Arg(1 << 24)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
