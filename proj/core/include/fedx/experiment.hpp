#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "fedx/config.hpp"
#include "fedx/convergence.hpp"
#include "fedx/protocol.hpp"
#include "fedx/simenv.hpp"

namespace fedx::experiment {

// Mix-ablation shape: a fraction of devices runs the medium sub-network at a
// coarse q, the rest run the small one at a finer q. Keep the coarse side at
// q >= 5: below that the dequantized weights are violent enough to blow up
// local SGD on this task.
struct MixConfig {
    nn::SubNetworkSpec medium{2, 8};
    int medium_q = 5;
    nn::SubNetworkSpec small{1, 4};
    int small_q = 10;
    std::vector<double> fractions = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
};

struct ExperimentConfig {
    std::string name = "default";
    nn::ElasticArch arch;  // input/output dims bound from the task at build time
    simenv::TaskConfig task;
    simenv::PartitionPlan plan;
    std::vector<simenv::TierTemplate> tiers;
    int num_devices = 20;
    protocol::ProtocolConfig protocol;
    MixConfig mix;
    convergence::ConvergenceConfig convergence;
};

ExperimentConfig default_config();
std::vector<std::string> preset_names();
// "default", "fedx_vs_noft", "fedavg_uniform", "mix_sweep", "dirichlet_skew"
ExperimentConfig preset(const std::string& name);
// the preset expressed in the config-file grammar (what --dry-run prints)
std::string preset_text(const std::string& name);

// Applies file overrides onto the defaults; rejects unknown keys.
ExperimentConfig from_config(const config::Config& cfg);

// Renders a config back into the file grammar (round-trips through
// from_config to the same values).
std::string to_config_text(const ExperimentConfig& ec);

// Architecture with input/output dims filled in from the task.
nn::ElasticArch bound_arch(const ExperimentConfig& ec);

protocol::Env build_env(const ExperimentConfig& ec, std::uint64_t seed);

// CSV emitters (schemas documented in docs/outputs.md)
void write_rounds_csv(std::ostream& os, const std::vector<protocol::RoundReport>& rounds);
void write_objective_csv(std::ostream& os, const std::vector<protocol::RoundReport>& rounds);
void write_assignments_csv(std::ostream& os, const protocol::Env& env,
                           const std::vector<protocol::DeviceRoundStats>& stats);

struct RunResult {
    protocol::ExperimentResult result;
    std::vector<std::string> files_written;
};

// Full run: build env, run the protocol, write rounds/objective/assignments
// CSVs and the final model under out_dir.
RunResult run_to_dir(const ExperimentConfig& ec, const std::string& out_dir);

// Runs fedx and fedx_noft on the same seed/env; emits comparison.csv.
RunResult run_fedx_vs_noft(const ExperimentConfig& ec, const std::string& out_dir);

struct MixPoint {
    double fraction = 0.0;
    double mean_device_acc = 0.0;  // mean over the trailing quarter of rounds
    double global_acc = 0.0;
    double total_bytes_down = 0.0;
};

std::vector<MixPoint> mix_sweep(const ExperimentConfig& ec);
void write_mix_csv(std::ostream& os, const std::vector<MixPoint>& points);

struct CodecBenchRow {
    int q = 0;
    int n = 0;
    double bits_per_coord = 0.0;
    double compression_vs_dense = 0.0;  // 32n / encoded bits
};

std::vector<CodecBenchRow> codec_bench(const std::vector<int>& qs, const std::vector<int>& sizes,
                                       std::uint64_t seed);
void write_codec_csv(std::ostream& os, const std::vector<CodecBenchRow>& rows);

void write_convergence_csv(std::ostream& os, const convergence::ConvergenceReport& rep);

}  // namespace fedx::experiment
