#pragma once

#include <cstdint>
#include <vector>

#include "fedx/dataset.hpp"
#include "fedx/elastic.hpp"

namespace fedx::selection {

using nn::ElasticArch;
using nn::ElasticModel;
using nn::SubNetworkSpec;

// Static capability sheet for one device.
struct DeviceProfile {
    int id = 0;
    double compute_rate = 1e9;   // FLOPs per second the device sustains
    int q_max = 32;              // widest quantization it can decode
    double bandwidth_bps = 30e6; // link rate, bits per second
    double mu_s = 1.0;           // per-round training-time budget, seconds
    int tier = 0;                // index of the template this device came from
};

struct Assignment {
    int device_id = 0;
    SubNetworkSpec spec;
    int q = 0;
    double predicted_drop = 0.0;
    double predicted_train_time_s = 0.0;
};

struct SelectionConfig {
    int samples_per_epoch = 32;  // local samples one epoch touches
    int epochs = 1;
    double acceptable_drop = -1.0;  // early-exit threshold; < 0 disables
    std::uint64_t seed = 1;         // pins the shared evaluation dither
};

// Seconds one local round costs: forward+backward ~ 3x forward FLOPs.
double train_time(const ElasticArch& arch, const SubNetworkSpec& spec, const DeviceProfile& dev,
                  int samples_per_epoch, int epochs);

// Utility drop of serving (spec, q) instead of the full model: accuracy of the
// full network minus accuracy of the quantized sub-network, both on the
// server's held-out slice. full_acc can be passed in to avoid recomputing.
double utility_drop(const ElasticModel& global_model, const SubNetworkSpec& spec, int q,
                    const Dataset& server_eval, std::uint64_t seed, double full_acc = -1.0);

struct SelectOutcome {
    Assignment assignment;
    int evaluations = 0;  // candidate (spec, q) pairs actually scored
};

// Minimize the predicted drop over feasible (spec, q): spec must fit the time
// budget, q <= q_max. Ties prefer the cheaper spec, then the larger q. Throws
// InfeasibleDeviceError when no candidate fits.
SelectOutcome select(const ElasticModel& global_model,
                     const std::vector<SubNetworkSpec>& family, const DeviceProfile& dev,
                     const Dataset& server_eval, const SelectionConfig& cfg);

}  // namespace fedx::selection
