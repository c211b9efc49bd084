#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedx/dataset.hpp"
#include "fedx/elastic.hpp"
#include "fedx/rng.hpp"

namespace fedx::nn {

// Logits for a batch, sliced to the given sub-network.
std::vector<float> forward(const ElasticModel& m, const SubNetworkSpec& spec, const Batch& b);

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // full canonical length; zero outside the slice
};

LossGrad loss_and_grad(const ElasticModel& m, const SubNetworkSpec& spec, const Batch& b);

double loss_only(const ElasticModel& m, const SubNetworkSpec& spec, const Batch& b);

// params <- float(params - lr * grad), elementwise in double
void sgd_step(ElasticModel& m, std::span<const double> grad, double lr);

// Fraction correct by argmax (ties -> lowest class index). Throws
// EmptyDataError on an empty set.
double accuracy(const ElasticModel& m, const SubNetworkSpec& spec, const Dataset& data);

// One epoch of minibatch SGD over a seeded shuffle; the final short batch is
// kept. Returns the mean of the per-batch losses.
double sgd_epoch(ElasticModel& m, const SubNetworkSpec& spec, const Dataset& data, double lr,
                 int batch_size, rng::Rng& shuffle_rng);

}  // namespace fedx::nn
