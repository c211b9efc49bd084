#include "fedx/selection.hpp"

#include <algorithm>

#include "fedx/decompose.hpp"
#include "fedx/nn.hpp"
#include "fedx/quant.hpp"
#include "fedx/rng.hpp"

namespace fedx::selection {

double train_time(const ElasticArch& arch, const SubNetworkSpec& spec, const DeviceProfile& dev,
                  int samples_per_epoch, int epochs) {
    if (dev.compute_rate <= 0) throw RangeError("compute_rate must be positive");
    // backward ~ 2x forward, so one sample costs ~3x forward FLOPs
    const double flops = 3.0 * static_cast<double>(arch.forward_flops(spec)) *
                         samples_per_epoch * epochs;
    return flops / dev.compute_rate;
}

double utility_drop(const ElasticModel& global_model, const SubNetworkSpec& spec, int q,
                    const Dataset& server_eval, std::uint64_t seed, double full_acc) {
    if (full_acc < 0)
        full_acc = nn::accuracy(global_model, global_model.arch.full_spec(), server_eval);
    // one shared dither per (spec, q): every device scores the same candidate
    // payload, so equal profiles get equal assignments
    const auto key = rng::key_of(seed, rng::Stream::SelectQuant,
                                 static_cast<std::uint64_t>(spec.depth),
                                 static_cast<std::uint64_t>(spec.width),
                                 static_cast<std::uint64_t>(q));
    auto payload = quant::quantize(decompose::extract(global_model, spec), q, key);
    auto candidate = decompose::embed(global_model, spec, quant::dequantize(payload));
    const double sub_acc = nn::accuracy(candidate, spec, server_eval);
    return full_acc - sub_acc;
}

SelectOutcome select(const ElasticModel& global_model,
                     const std::vector<SubNetworkSpec>& family, const DeviceProfile& dev,
                     const Dataset& server_eval, const SelectionConfig& cfg) {
    if (family.empty()) throw Error("select: empty sub-network family");
    if (dev.q_max < 1 || dev.q_max > 32) throw RangeError("q_max must be in [1, 32]");

    // cheap candidates first so equal drops resolve toward the lighter model
    std::vector<SubNetworkSpec> order = family;
    std::sort(order.begin(), order.end(), [&](const SubNetworkSpec& a, const SubNetworkSpec& b) {
        const auto ca = global_model.arch.param_count(a), cb = global_model.arch.param_count(b);
        if (ca != cb) return ca < cb;
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.width < b.width;
    });

    const double full_acc =
        nn::accuracy(global_model, global_model.arch.full_spec(), server_eval);

    SelectOutcome out;
    out.evaluations = 0;
    bool found = false;
    double best = 0.0;
    for (const auto& spec : order) {
        const double t = train_time(global_model.arch, spec, dev, cfg.samples_per_epoch,
                                    cfg.epochs);
        if (t > dev.mu_s) continue;
        for (int q = dev.q_max; q >= 1; --q) {
            const double drop = utility_drop(global_model, spec, q, server_eval, cfg.seed,
                                             full_acc);
            ++out.evaluations;
            if (!found || drop < best) {
                found = true;
                best = drop;
                out.assignment = {dev.id, spec, q, drop, t};
            }
            if (cfg.acceptable_drop >= 0 && found && best <= cfg.acceptable_drop) return out;
        }
    }
    if (!found)
        throw InfeasibleDeviceError("device " + std::to_string(dev.id) +
                                    ": no sub-network fits its training-time budget");
    return out;
}

}  // namespace fedx::selection
