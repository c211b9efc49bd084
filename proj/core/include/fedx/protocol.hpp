#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedx/dataset.hpp"
#include "fedx/elastic.hpp"
#include "fedx/selection.hpp"

namespace fedx::protocol {

using nn::ElasticArch;
using nn::ElasticModel;
using nn::SubNetworkSpec;

enum class Mode { FedX, FedXNoFinetune, FedAvgUniform };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

struct ProtocolConfig {
    int rounds = 30;
    int sampled_per_round = 5;  // devices drawn each round
    int local_epochs = 1;
    double local_lr = 0.01;
    double server_lr = 0.01;  // fine-tune step size
    double gamma = 1e-4;      // pull toward the aggregate during fine-tuning
    int batch_size = 32;
    int pretrain_epochs = 3;
    double pretrain_lr = 0.01;
    int finetune_steps = 5;
    int finetune_sample = 256;  // server samples per fine-tune round (capped by data)
    bool uplink_quantize = false;
    int selection_samples = 64;     // per-epoch sample-count proxy used in time estimates
    double acceptable_drop = -1.0;  // selection early-exit; < 0 disables
    Mode mode = Mode::FedX;
    int uniform_q = 32;  // FedAvgUniform: one q for everyone
    std::uint64_t seed = 1;
    int workers = 1;
    // when non-empty, one (spec, q) per device replaces selection entirely
    std::vector<std::pair<SubNetworkSpec, int>> fixed_assignments;
};

// Everything the server can see about the outside world.
struct Env {
    Dataset server_train;
    Dataset server_eval;
    Dataset server_test;
    std::vector<Dataset> device_train;
    std::vector<Dataset> device_test;
    std::vector<selection::DeviceProfile> fleet;

    int num_devices() const { return static_cast<int>(fleet.size()); }
    void validate() const;
};

struct DeviceRoundStats {
    int device_id = 0;
    SubNetworkSpec spec;
    int q = 0;
    double bytes_down = 0.0;  // encoded payload, bits/8
    double bytes_up = 0.0;
    double train_time_s = 0.0;
    double comm_time_s = 0.0;  // down + up on this device's link
};

struct RoundReport {
    int round = 0;
    Mode mode = Mode::FedX;
    double global_loss = 0.0;       // full model on server training data
    double global_acc = 0.0;        // full model on server test data
    double mean_device_acc = 0.0;   // deployed (precision-rounded) sub-nets on device tests
    double objective_device_term = 0.0;  // sum of quantized sub-net losses on device data
    double objective_server_term = 0.0;  // == global_loss
    double total_bytes_down = 0.0;
    double total_bytes_up = 0.0;
    double max_device_train_time_s = 0.0;
    double comm_time_s = 0.0;  // slowest sampled device this round
    double quantization_time_proxy = 0.0;  // coordinates quantized (op count)
    double finetune_time_proxy = 0.0;      // fine-tune MACs (op count)
    std::vector<DeviceRoundStats> devices;  // sampled devices, ascending id
    std::vector<int> skipped;               // sampled but infeasible
    std::uint64_t hash_after_aggregate = 0;
    std::uint64_t hash_after_finetune = 0;  // == hash_after_aggregate when skipped
};

std::uint64_t hash_params(const std::vector<float>& params);

// Plain SGD on the server's own data before federation starts. Appends one
// mean epoch loss per epoch to *losses when given.
ElasticModel server_pretrain(ElasticModel model, const Dataset& server_data, int epochs,
                             double lr, int batch_size, std::uint64_t seed,
                             std::vector<double>* losses = nullptr);

// `steps` minibatch steps of  theta <- theta - lambda * (grad L + gamma (theta - anchor)),
// anchored at the aggregate it starts from.
ElasticModel finetune(const ElasticModel& aggregated, const Dataset& server_data, double lambda,
                      double gamma, int steps, int batch_size, int sample_cap,
                      std::uint64_t key);

struct ExperimentResult {
    ElasticModel final_model;
    std::vector<RoundReport> rounds;
    std::vector<double> pretrain_losses;  // one mean loss per pretrain epoch
};

using RoundSink = std::function<void(const RoundReport&)>;

// One full protocol round against `env`, mutating the model in place.
RoundReport run_round(ElasticModel& model, const ProtocolConfig& cfg, const Env& env, int round);

// Pretrain, then cfg.rounds rounds; streams every report through sink (if any).
ExperimentResult run_experiment(const ElasticArch& arch, const ProtocolConfig& cfg,
                                const Env& env, const RoundSink& sink = nullptr);

}  // namespace fedx::protocol
