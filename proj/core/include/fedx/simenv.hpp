#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedx/dataset.hpp"
#include "fedx/selection.hpp"

namespace fedx::simenv {

// Synthetic classification task: class c is an isotropic Gaussian blob around
// mean_scale * e_c (first num_classes axes of the input space).
struct TaskConfig {
    int num_classes = 10;
    int input_dim = 20;
    int samples_per_class = 200;
    double mean_scale = 3.0;
    double noise_sigma = 1.0;
    double train_fraction = 0.8;
};

struct Task {
    Dataset train;
    Dataset test;
};

Task generate_task(const TaskConfig& cfg, std::uint64_t seed);

enum class Scheme { IID, Dirichlet };

struct PartitionPlan {
    // class-disjoint ownership: these classes' training data lives on the
    // server, the rest on devices
    std::vector<int> server_classes;
    Scheme scheme = Scheme::IID;
    double alpha = 1.0;  // Dirichlet concentration (per class, across devices)
    // when true, devices draw from all classes and the server keeps a uniform
    // subsample instead of whole classes
    bool dirichlet_all_classes = false;
    double server_data_fraction = 0.2;    // only used by dirichlet_all_classes
    double selection_eval_fraction = 0.2; // server split held out for selection
};

struct Partition {
    Dataset server_train;
    Dataset server_eval;  // held-out slice scored during sub-network selection
    Dataset server_test;  // the full task test set (global view)
    std::vector<Dataset> device_train;
    std::vector<Dataset> device_test;  // disjoint stratified split of the test set
};

Partition partition(const Task& task, const PartitionPlan& plan, int num_devices,
                    std::uint64_t seed);

// Round-trip seconds for a payload on this device's link.
double comm_time(double payload_bits, const selection::DeviceProfile& dev);

// Fleet construction from tier templates via largest-remainder apportionment.
struct TierTemplate {
    std::string name;
    double fraction = 0.0;
    double compute_rate = 1e9;
    int q_max = 32;
    double bandwidth_bps = 30e6;
    double mu_s = 1.0;
};

std::vector<selection::DeviceProfile> build_fleet(const std::vector<TierTemplate>& tiers, int n,
                                                  std::uint64_t seed);

// Largest-remainder apportionment of `total` into counts proportional to
// weights; remainder ties go to the lower index.
std::vector<int> apportion(const std::vector<double>& weights, int total);

}  // namespace fedx::simenv
