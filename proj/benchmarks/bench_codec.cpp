#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "fedx/quant.hpp"
#include "fedx/rng.hpp"

namespace {

std::vector<float> gaussian_vector(std::int64_t n) {
    const std::uint64_t key = fedx::rng::key_of(7, fedx::rng::Stream::TaskGen,
                                                static_cast<std::uint64_t>(n));
    std::vector<float> v(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] =
            static_cast<float>(fedx::rng::normal_at(key, static_cast<std::uint64_t>(i)));
    return v;
}

void bm_quantize(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const int q = static_cast<int>(state.range(1));
    const auto v = gaussian_vector(n);
    const std::uint64_t key = fedx::rng::key_of(7, fedx::rng::Stream::Quant,
                                                static_cast<std::uint64_t>(q));
    for (auto _ : state) {
        auto p = fedx::quant::quantize(v, q, key);
        benchmark::DoNotOptimize(p.bitstream.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
}

void bm_dequantize(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const int q = static_cast<int>(state.range(1));
    const auto v = gaussian_vector(n);
    const auto p = fedx::quant::quantize(
        v, q, fedx::rng::key_of(7, fedx::rng::Stream::Quant, static_cast<std::uint64_t>(q)));
    for (auto _ : state) {
        auto out = fedx::quant::dequantize(p);
        benchmark::DoNotOptimize(out.data());
    }
    state.SetItemsProcessed(state.iterations() * n);
    state.counters["bits_per_coord"] =
        static_cast<double>(p.encoded_bits) / static_cast<double>(n);
}

void bm_payload_validate(benchmark::State& state) {
    const std::int64_t n = state.range(0);
    const auto v = gaussian_vector(n);
    const auto p =
        fedx::quant::quantize(v, 8, fedx::rng::key_of(7, fedx::rng::Stream::Quant, 8));
    for (auto _ : state) {
        auto back = fedx::quant::payload_from_bytes(p.bitstream);
        benchmark::DoNotOptimize(back.encoded_bits);
    }
    state.SetItemsProcessed(state.iterations() * n);
}

}  // namespace

BENCHMARK(bm_quantize)
    ->ArgsProduct({{1 << 10, 1 << 14, 1 << 18}, {1, 4, 8, 16}})
    ->ArgNames({"n", "q"});
BENCHMARK(bm_dequantize)
    ->ArgsProduct({{1 << 10, 1 << 14, 1 << 18}, {1, 4, 8, 16}})
    ->ArgNames({"n", "q"});
BENCHMARK(bm_payload_validate)->Arg(1 << 10)->Arg(1 << 14)->Arg(1 << 18)->ArgName("n");

BENCHMARK_MAIN();
