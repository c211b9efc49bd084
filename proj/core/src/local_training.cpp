#include "fedx/local_training.hpp"

#include "fedx/decompose.hpp"
#include "fedx/nn.hpp"
#include "fedx/rng.hpp"

namespace fedx::local_training {

LocalResult train_local(const nn::ElasticArch& full_arch, const nn::SubNetworkSpec& spec,
                        const std::vector<float>& values, const Dataset& data,
                        const LocalConfig& cfg, std::uint64_t seed, int round, int device) {
    if (static_cast<std::int64_t>(values.size()) != full_arch.param_count(spec))
        throw ShapeError("local training: value count does not match the sub-network");
    if (cfg.epochs < 0) throw RangeError("epochs must be non-negative");

    nn::ElasticModel sub;
    sub.arch = decompose::shrink_arch(full_arch, spec);
    sub.params = values;

    LocalResult out;
    double loss_sum = 0.0;
    int batches = 0;
    for (int e = 0; e < cfg.epochs; ++e) {
        rng::Rng shuffle(rng::key_of(seed, rng::Stream::LocalShuffle,
                                     static_cast<std::uint64_t>(round),
                                     static_cast<std::uint64_t>(device),
                                     static_cast<std::uint64_t>(e)));
        const int nb = (data.size() + cfg.batch_size - 1) / cfg.batch_size;
        loss_sum += nn::sgd_epoch(sub, sub.arch.full_spec(), data, cfg.lr, cfg.batch_size,
                                  shuffle) * nb;
        batches += nb;
    }
    out.values = std::move(sub.params);
    out.mean_loss = batches ? loss_sum / batches : 0.0;
    out.batches = batches;
    return out;
}

}  // namespace fedx::local_training
