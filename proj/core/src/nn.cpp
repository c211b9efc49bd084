#include "fedx/nn.hpp"

#include <numeric>

#include "fedx/nn_kernels.hpp"

namespace fedx::nn {

std::vector<float> forward(const ElasticModel& m, const SubNetworkSpec& spec, const Batch& b) {
    m.arch.require_spec(spec);
    if (b.input_dim != m.arch.input_dim) throw ShapeError("batch input_dim mismatch");
    auto cache = kernels::forward_pass<float>(m.arch, spec, std::span<const float>(m.params),
                                              std::span<const float>(b.inputs), b.batch_size);
    return std::move(cache.logits);
}

LossGrad loss_and_grad(const ElasticModel& m, const SubNetworkSpec& spec, const Batch& b) {
    m.arch.require_spec(spec);
    if (b.input_dim != m.arch.input_dim) throw ShapeError("batch input_dim mismatch");
    if (b.batch_size == 0) throw EmptyDataError("loss on empty batch");
    auto cache = kernels::forward_pass<float>(m.arch, spec, std::span<const float>(m.params),
                                              std::span<const float>(b.inputs), b.batch_size);
    LossGrad out;
    out.grad.assign(static_cast<std::size_t>(m.arch.param_count()), 0.0);
    std::vector<double> dlogits(cache.logits.size());
    out.loss = kernels::softmax_ce<float>(std::span<const float>(cache.logits),
                                          std::span<const int>(b.labels), m.arch.output_dim,
                                          dlogits.data());
    kernels::backward_pass<float>(m.arch, spec, std::span<const float>(m.params),
                                  std::span<const float>(b.inputs), cache,
                                  std::span<const double>(dlogits), std::span<double>(out.grad));
    return out;
}

double loss_only(const ElasticModel& m, const SubNetworkSpec& spec, const Batch& b) {
    m.arch.require_spec(spec);
    if (b.input_dim != m.arch.input_dim) throw ShapeError("batch input_dim mismatch");
    if (b.batch_size == 0) throw EmptyDataError("loss on empty batch");
    auto cache = kernels::forward_pass<float>(m.arch, spec, std::span<const float>(m.params),
                                              std::span<const float>(b.inputs), b.batch_size);
    return kernels::softmax_ce<float>(std::span<const float>(cache.logits),
                                      std::span<const int>(b.labels), m.arch.output_dim, nullptr);
}

void sgd_step(ElasticModel& m, std::span<const double> grad, double lr) {
    if (grad.size() != m.params.size()) throw ShapeError("gradient length mismatch");
    for (std::size_t i = 0; i < grad.size(); ++i)
        m.params[i] = static_cast<float>(static_cast<double>(m.params[i]) - lr * grad[i]);
}

double accuracy(const ElasticModel& m, const SubNetworkSpec& spec, const Dataset& data) {
    if (data.size() == 0) throw EmptyDataError("accuracy on empty dataset");
    if (data.input_dim != m.arch.input_dim) throw ShapeError("dataset input_dim mismatch");
    const int out = m.arch.output_dim;
    std::int64_t correct = 0;
    // chunked so big eval sets don't blow up the activation cache
    constexpr int kChunk = 512;
    std::vector<int> idx;
    for (int start = 0; start < data.size(); start += kChunk) {
        const int stop = std::min(data.size(), start + kChunk);
        idx.resize(stop - start);
        std::iota(idx.begin(), idx.end(), start);
        Batch b = gather(data, idx);
        std::vector<float> logits = forward(m, spec, b);
        for (int s = 0; s < b.batch_size; ++s) {
            const float* row = logits.data() + static_cast<std::size_t>(s) * out;
            int best = 0;
            for (int o = 1; o < out; ++o)
                if (row[o] > row[best]) best = o;
            if (best == b.labels[s]) ++correct;
        }
    }
    return static_cast<double>(correct) / data.size();
}

double sgd_epoch(ElasticModel& m, const SubNetworkSpec& spec, const Dataset& data, double lr,
                 int batch_size, rng::Rng& shuffle_rng) {
    if (data.size() == 0) throw EmptyDataError("training on empty dataset");
    if (batch_size <= 0) throw RangeError("batch_size must be positive");
    std::vector<int> order(static_cast<std::size_t>(data.size()));
    std::iota(order.begin(), order.end(), 0);
    rng::shuffle(order, shuffle_rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (int start = 0; start < data.size(); start += batch_size) {
        const int stop = std::min(data.size(), start + batch_size);
        Batch b = gather(data, std::span<const int>(order.data() + start,
                                                    static_cast<std::size_t>(stop - start)));
        LossGrad lg = loss_and_grad(m, spec, b);
        sgd_step(m, lg.grad, lr);
        loss_sum += lg.loss;
        ++batches;
    }
    return loss_sum / batches;
}

}  // namespace fedx::nn
