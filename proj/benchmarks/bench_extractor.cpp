#include <benchmark/benchmark.h>

#include <random>

#include "qrng/extractor.hpp"

namespace {

qrng::BitVector random_input(std::size_t n_bits) {
    std::mt19937_64 rng(1);
    qrng::BitVector b(n_bits);
    for (auto& w : b.mutable_words()) w = rng();
    b.resize(n_bits);
    return b;
}

// Single block through the packed kernel. Arguments: k, l.
void BM_ExtractBlock(benchmark::State& state) {
    const auto k = static_cast<std::size_t>(state.range(0));
    const auto l = static_cast<std::size_t>(state.range(1));
    const auto m = qrng::BinaryMatrix::generate(qrng::default_matrix_seed(), k, l);
    const auto in = random_input(l);
    std::vector<std::uint64_t> out((k + 63) / 64);
    for (auto _ : state) {
        qrng::extract_block(m, in.words(), out);
        benchmark::DoNotOptimize(out.data());
        benchmark::ClobberMemory();
    }
    state.counters["out_bps"] =
        benchmark::Counter(static_cast<double>(k) * static_cast<double>(state.iterations()), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ExtractBlock)->Args({500, 2000})->Args({64, 256})->Args({1024, 4096});

// Whole-stream extraction at the default geometry; second argument is the
// worker count (0 = QRNG_THREADS or hardware parallelism).
// The software floor is 1 Mbps of output; 100 Mbps is the stretch target.
void BM_ExtractStream(benchmark::State& state) {
    const auto m = qrng::BinaryMatrix::generate(qrng::default_matrix_seed(), 500, 2000);
    const auto in = random_input(static_cast<std::size_t>(state.range(0)));
    const auto workers = static_cast<std::size_t>(state.range(1));
    std::size_t out_bits = 0;
    for (auto _ : state) {
        auto out = qrng::extract(in, m, workers);
        out_bits = out.bits.size();
        benchmark::DoNotOptimize(out.bits.words().data());
    }
    const double total = static_cast<double>(out_bits) * static_cast<double>(state.iterations());
    state.counters["out_bps"] = benchmark::Counter(total, benchmark::Counter::kIsRate);
    state.counters["x_100Mbps"] = benchmark::Counter(total / 1e8, benchmark::Counter::kIsRate);
}
BENCHMARK(BM_ExtractStream)->Args({2000 * 1024, 1})->Args({2000 * 1024, 0})->Unit(benchmark::kMillisecond);

void BM_MatrixGenerate(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(qrng::BinaryMatrix::generate(qrng::default_matrix_seed(), 500, 2000).digest());
    }
}
BENCHMARK(BM_MatrixGenerate)->Unit(benchmark::kMicrosecond);

}  // namespace
