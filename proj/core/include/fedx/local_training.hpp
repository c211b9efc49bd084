#pragma once

// Device-side training. A device receives plain sub-network values (whatever
// arrived over the wire has already been decoded by the transport), trains the
// materialized sub-model on its own data, and ships the updated values back.
// Nothing here knows that quantization exists; keep it that way.

#include <cstdint>
#include <vector>

#include "fedx/dataset.hpp"
#include "fedx/elastic.hpp"

namespace fedx::local_training {

struct LocalConfig {
    int epochs = 1;
    double lr = 0.01;
    int batch_size = 32;
};

struct LocalResult {
    std::vector<float> values;  // updated sub-network, canonical order
    double mean_loss = 0.0;     // mean per-batch loss across all epochs
    int batches = 0;
};

// Runs `epochs` of minibatch SGD on the sub-model built from (arch sliced to
// spec, values). The shuffle stream is keyed by (seed, round, device, epoch),
// so devices can run in any order or in parallel without changing results.
LocalResult train_local(const nn::ElasticArch& full_arch, const nn::SubNetworkSpec& spec,
                        const std::vector<float>& values, const Dataset& data,
                        const LocalConfig& cfg, std::uint64_t seed, int round, int device);

}  // namespace fedx::local_training
