#include <benchmark/benchmark.h>

#include <cstdint>
#include <utility>
#include <vector>

#include "fedx/decompose.hpp"
#include "fedx/nn.hpp"
#include "fedx/rng.hpp"
#include "fedx/simenv.hpp"

namespace {

fedx::nn::ElasticArch bench_arch() {
    fedx::nn::ElasticArch a;
    a.input_dim = 32;
    a.output_dim = 10;
    a.num_blocks = 2;
    a.max_depth_per_block = 2;
    a.max_width = 64;
    a.allowed_depths = {1, 2};
    a.allowed_widths = {16, 32, 64};
    return a;
}

fedx::Dataset bench_data() {
    fedx::simenv::TaskConfig tc;
    tc.num_classes = 10;
    tc.input_dim = 32;
    tc.samples_per_class = 64;
    return fedx::simenv::generate_task(tc, 7).train;
}

void bm_forward(benchmark::State& state) {
    const auto arch = bench_arch();
    const auto m = fedx::nn::init_model(arch, 7);
    const fedx::nn::SubNetworkSpec spec{static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1))};
    const auto batch = fedx::full_batch(bench_data());
    for (auto _ : state) {
        auto logits = fedx::nn::forward(m, spec, batch);
        benchmark::DoNotOptimize(logits.data());
    }
    state.SetItemsProcessed(state.iterations() * batch.batch_size);
    state.counters["flops_fwd"] = static_cast<double>(arch.forward_flops(spec));
}

void bm_loss_and_grad(benchmark::State& state) {
    const auto arch = bench_arch();
    const auto m = fedx::nn::init_model(arch, 7);
    const fedx::nn::SubNetworkSpec spec{static_cast<int>(state.range(0)),
                                        static_cast<int>(state.range(1))};
    const auto batch = fedx::full_batch(bench_data());
    for (auto _ : state) {
        auto lg = fedx::nn::loss_and_grad(m, spec, batch);
        benchmark::DoNotOptimize(lg.grad.data());
    }
    state.SetItemsProcessed(state.iterations() * batch.batch_size);
}

void bm_sgd_epoch(benchmark::State& state) {
    const auto arch = bench_arch();
    const auto data = bench_data();
    const fedx::nn::SubNetworkSpec spec = arch.full_spec();
    for (auto _ : state) {
        state.PauseTiming();
        auto m = fedx::nn::init_model(arch, 7);
        fedx::rng::Rng shuffle(fedx::rng::key_of(7, fedx::rng::Stream::LocalShuffle));
        state.ResumeTiming();
        double loss = fedx::nn::sgd_epoch(m, spec, data, 0.05, 32, shuffle);
        benchmark::DoNotOptimize(loss);
    }
    state.SetItemsProcessed(state.iterations() * data.size());
}

void bm_extract_embed(benchmark::State& state) {
    const auto arch = bench_arch();
    const auto m = fedx::nn::init_model(arch, 7);
    const fedx::nn::SubNetworkSpec spec{1, 32};
    for (auto _ : state) {
        auto slice = fedx::decompose::extract(m, spec);
        auto back = fedx::decompose::embed(m, spec, slice);
        benchmark::DoNotOptimize(back.params.data());
    }
    state.SetItemsProcessed(state.iterations() * arch.param_count());
}

void bm_aggregate(benchmark::State& state) {
    const auto arch = bench_arch();
    const auto m = fedx::nn::init_model(arch, 7);
    const int num_updates = static_cast<int>(state.range(0));
    const auto specs = fedx::decompose::family(arch);
    std::vector<std::pair<fedx::nn::SubNetworkSpec, std::vector<float>>> updates;
    for (int i = 0; i < num_updates; ++i) {
        const auto& s = specs[static_cast<std::size_t>(i) % specs.size()];
        updates.emplace_back(s, fedx::decompose::extract(m, s));
    }
    for (auto _ : state) {
        auto [next, mask] = fedx::decompose::aggregate(m, updates);
        benchmark::DoNotOptimize(next.params.data());
        benchmark::DoNotOptimize(mask.counts.data());
    }
    state.SetItemsProcessed(state.iterations() * num_updates * arch.param_count());
}

}  // namespace

BENCHMARK(bm_forward)->Args({1, 16})->Args({2, 32})->Args({2, 64})->ArgNames({"depth", "width"});
BENCHMARK(bm_loss_and_grad)
    ->Args({1, 16})
    ->Args({2, 32})
    ->Args({2, 64})
    ->ArgNames({"depth", "width"});
BENCHMARK(bm_sgd_epoch);
BENCHMARK(bm_extract_embed);
BENCHMARK(bm_aggregate)->Arg(5)->Arg(20)->ArgName("updates");

BENCHMARK_MAIN();
