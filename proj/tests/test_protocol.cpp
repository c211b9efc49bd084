#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "fedx/decompose.hpp"
#include "fedx/errors.hpp"
#include "fedx/local_training.hpp"
#include "fedx/nn.hpp"
#include "fedx/protocol.hpp"
#include "fedx/quant.hpp"
#include "fedx/rng.hpp"
#include "fedx/selection.hpp"
#include "fedx/simenv.hpp"

#include "protocol_oracle.hpp"

using namespace fedx;
using protocol::Env;
using protocol::Mode;
using protocol::ProtocolConfig;

namespace {

nn::ElasticArch tiny_arch() {
    nn::ElasticArch a;
    a.input_dim = 6;
    a.output_dim = 4;
    a.num_blocks = 1;
    a.max_depth_per_block = 2;
    a.max_width = 6;
    a.allowed_depths = {1, 2};
    a.allowed_widths = {4, 6};
    a.validate();
    return a;
}

Env tiny_env(int n_devices, std::uint64_t seed) {
    simenv::TaskConfig tc;
    tc.num_classes = 4;
    tc.input_dim = 6;
    tc.samples_per_class = 30;
    simenv::Task task = simenv::generate_task(tc, seed);

    simenv::PartitionPlan plan;
    plan.server_classes = {2, 3};
    simenv::Partition part = simenv::partition(task, plan, n_devices, seed);

    Env env;
    env.server_train = std::move(part.server_train);
    env.server_eval = std::move(part.server_eval);
    env.server_test = std::move(part.server_test);
    env.device_train = std::move(part.device_train);
    env.device_test = std::move(part.device_test);
    env.fleet = simenv::build_fleet({{"only", 1.0, 1e7, 8, 30e6, 1.0}}, n_devices, seed);
    return env;
}

ProtocolConfig tiny_cfg() {
    ProtocolConfig cfg;
    cfg.rounds = 3;
    cfg.sampled_per_round = 2;
    cfg.local_epochs = 1;
    cfg.local_lr = 0.05;
    cfg.server_lr = 0.05;
    cfg.gamma = 1e-3;
    cfg.batch_size = 8;
    cfg.pretrain_epochs = 2;
    cfg.pretrain_lr = 0.05;
    cfg.finetune_steps = 2;
    cfg.finetune_sample = 16;
    cfg.selection_samples = 12;
    cfg.seed = 31;
    return cfg;
}

}  // namespace

TEST_CASE("three protocol rounds match the straight-line oracle") {
    const auto arch = tiny_arch();
    const auto env = tiny_env(4, 13);
    const auto cfg = tiny_cfg();

    const auto res = protocol::run_experiment(arch, cfg, env);
    const auto want = oracle::protocol_run(arch, cfg, env);

    REQUIRE(res.final_model.params.size() == want.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < want.size(); ++i)
        worst = std::max(worst,
                         std::abs(static_cast<double>(res.final_model.params[i]) - want[i]));
    CHECK(worst <= 1e-6);

    CHECK(res.rounds.size() == 3);
    CHECK(res.pretrain_losses.size() == 2);
    // pretraining on a learnable blob task should reduce the loss
    CHECK(res.pretrain_losses.back() < res.pretrain_losses.front());
}

TEST_CASE("reruns and worker counts do not change a single bit") {
    const auto arch = tiny_arch();
    const auto env = tiny_env(4, 17);
    auto cfg = tiny_cfg();

    const auto a = protocol::run_experiment(arch, cfg, env);
    const auto b = protocol::run_experiment(arch, cfg, env);
    cfg.workers = 4;
    const auto c = protocol::run_experiment(arch, cfg, env);

    REQUIRE(a.rounds.size() == b.rounds.size());
    REQUIRE(a.rounds.size() == c.rounds.size());
    for (std::size_t i = 0; i < a.rounds.size(); ++i) {
        CHECK(a.rounds[i].hash_after_aggregate == b.rounds[i].hash_after_aggregate);
        CHECK(a.rounds[i].hash_after_finetune == b.rounds[i].hash_after_finetune);
        CHECK(a.rounds[i].hash_after_aggregate == c.rounds[i].hash_after_aggregate);
        CHECK(a.rounds[i].hash_after_finetune == c.rounds[i].hash_after_finetune);
        CHECK(a.rounds[i].mean_device_acc == c.rounds[i].mean_device_acc);
        CHECK(a.rounds[i].total_bytes_down == c.rounds[i].total_bytes_down);
    }
    CHECK(a.final_model.params == c.final_model.params);
}

TEST_CASE("fedavg_uniform pushes the full network at one q") {
    const auto arch = tiny_arch();
    const auto env = tiny_env(3, 19);
    auto cfg = tiny_cfg();
    cfg.mode = Mode::FedAvgUniform;
    cfg.uniform_q = 16;
    cfg.rounds = 2;
    cfg.sampled_per_round = 3;

    const auto res = protocol::run_experiment(arch, cfg, env);
    for (const auto& r : res.rounds) {
        CHECK(r.devices.size() == 3);
        for (const auto& d : r.devices) {
            CHECK(d.spec == arch.full_spec());
            CHECK(d.q == 16);
        }
        // no fine-tuning in this mode
        CHECK(r.hash_after_finetune == r.hash_after_aggregate);
        CHECK(r.finetune_time_proxy == 0.0);
    }
}

TEST_CASE("devices that fit nothing are skipped, not fatal") {
    const auto arch = tiny_arch();
    auto env = tiny_env(4, 23);
    // device 1 cannot fit any sub-network in its time budget
    env.fleet[1].mu_s = 1e-12;
    auto cfg = tiny_cfg();
    cfg.rounds = 2;
    cfg.sampled_per_round = 4;

    const auto res = protocol::run_experiment(arch, cfg, env);
    for (const auto& r : res.rounds) {
        REQUIRE(r.skipped.size() == 1);
        CHECK(r.skipped[0] == 1);
        CHECK(r.devices.size() == 3);
        for (const auto& d : r.devices) CHECK(d.device_id != 1);
        CHECK(r.mean_device_acc > 0.0);  // averaged over the feasible ones
    }
}

TEST_CASE("zero local epochs return the downloaded values unchanged") {
    const auto arch = tiny_arch();
    const auto env = tiny_env(2, 29);
    const auto model = nn::init_model(arch, 5);

    const auto spec = arch.full_spec();
    auto payload = quant::quantize(decompose::extract(model, spec), 8,
                                   rng::key_of(5, rng::Stream::Quant, 0, 0));
    const auto values = quant::dequantize(payload);
    local_training::LocalConfig lcfg{0, 0.05, 8};
    const auto out = local_training::train_local(arch, spec, values, env.device_train[0], lcfg,
                                                 5, 0, 0);
    CHECK(out.values == values);
    CHECK(out.batches == 0);
    CHECK(out.mean_loss == 0.0);
}

TEST_CASE("fine-tuning pulls the model toward the server task") {
    const auto arch = tiny_arch();
    const auto env = tiny_env(2, 37);
    auto model = nn::init_model(arch, 11);
    model = protocol::server_pretrain(std::move(model), env.server_train, 1, 0.05, 8, 11);

    const double before = nn::loss_only(model, arch.full_spec(), full_batch(env.server_train));
    const auto after = protocol::finetune(model, env.server_train, 0.05, 1e-3, 20, 8, 64,
                                          rng::key_of(11, rng::Stream::Finetune, 0));
    const double loss_after =
        nn::loss_only(after, arch.full_spec(), full_batch(env.server_train));
    CHECK(loss_after < before);

    // gamma keeps the result near its anchor: an enormous gamma freezes it
    const auto frozen = protocol::finetune(model, env.server_train, 1e-8, 1e8, 5, 8, 64,
                                           rng::key_of(11, rng::Stream::Finetune, 1));
    for (std::size_t i = 0; i < model.params.size(); ++i)
        CHECK(std::abs(frozen.params[i] - model.params[i]) < 1e-3);
}

TEST_CASE("round report bookkeeping adds up") {
    const auto arch = tiny_arch();
    const auto env = tiny_env(4, 41);
    auto cfg = tiny_cfg();
    cfg.rounds = 1;
    cfg.sampled_per_round = 3;

    const auto res = protocol::run_experiment(arch, cfg, env);
    const auto& r = res.rounds[0];
    REQUIRE(r.devices.size() == 3);

    double down = 0.0, up = 0.0, worst_comm = 0.0, worst_train = 0.0;
    for (const auto& d : r.devices) {
        CHECK(d.bytes_down > 0.0);
        CHECK(d.bytes_up > 0.0);
        down += d.bytes_down;
        up += d.bytes_up;
        worst_comm = std::max(worst_comm, d.comm_time_s);
        worst_train = std::max(worst_train, d.train_time_s);
        // uncompressed uplink: 4 bytes per live coordinate
        CHECK(d.bytes_up ==
              doctest::Approx(4.0 * static_cast<double>(arch.param_count(d.spec))));
    }
    CHECK(r.total_bytes_down == doctest::Approx(down));
    CHECK(r.total_bytes_up == doctest::Approx(up));
    CHECK(r.comm_time_s == doctest::Approx(worst_comm));
    CHECK(r.max_device_train_time_s == doctest::Approx(worst_train));
    CHECK(r.global_loss > 0.0);
    CHECK(r.global_acc > 0.0);
    CHECK(r.objective_server_term == r.global_loss);
    CHECK(r.objective_device_term > 0.0);
    CHECK(r.quantization_time_proxy > 0.0);
    CHECK(r.finetune_time_proxy > 0.0);
    // devices arrive in ascending id order
    for (std::size_t i = 0; i + 1 < r.devices.size(); ++i)
        CHECK(r.devices[i].device_id < r.devices[i + 1].device_id);
}

TEST_CASE("quantized uplink shrinks upstream traffic") {
    const auto arch = tiny_arch();
    const auto env = tiny_env(4, 43);
    auto cfg = tiny_cfg();
    cfg.rounds = 1;

    const auto plain = protocol::run_experiment(arch, cfg, env);
    cfg.uplink_quantize = true;
    const auto packed = protocol::run_experiment(arch, cfg, env);
    CHECK(packed.rounds[0].total_bytes_up < plain.rounds[0].total_bytes_up);
}

TEST_CASE("env validation catches mismatched shapes") {
    const auto env = tiny_env(3, 47);
    Env broken = env;
    broken.device_train.pop_back();
    CHECK_THROWS_AS(broken.validate(), ShapeError);

    broken = env;
    broken.fleet.clear();
    CHECK_THROWS_AS(broken.validate(), Error);

    broken = env;
    broken.device_train[0] = Dataset{};
    broken.device_train[0].input_dim = env.server_train.input_dim;
    broken.device_train[0].num_classes = env.server_train.num_classes;
    CHECK_THROWS_AS(broken.validate(), EmptyDataError);
}

TEST_CASE("hash_params separates nearby parameter vectors") {
    CHECK(protocol::hash_params({}) == 0xcbf29ce484222325ULL);
    std::vector<float> a = {1.0f, 2.0f, 3.0f};
    std::vector<float> b = a;
    b[2] = std::nextafter(b[2], 4.0f);
    CHECK(protocol::hash_params(a) != protocol::hash_params(b));
    CHECK(protocol::hash_params(a) == protocol::hash_params({1.0f, 2.0f, 3.0f}));
}

TEST_CASE("fixed assignments bypass selection entirely") {
    const auto arch = tiny_arch();
    const auto env = tiny_env(3, 53);
    auto cfg = tiny_cfg();
    cfg.rounds = 1;
    cfg.sampled_per_round = 3;
    cfg.fixed_assignments = {
        {{1, 4}, 2}, {{2, 6}, 5}, {{1, 6}, 8},
    };

    const auto res = protocol::run_experiment(arch, cfg, env);
    const auto& devs = res.rounds[0].devices;
    REQUIRE(devs.size() == 3);
    CHECK(devs[0].spec == nn::SubNetworkSpec{1, 4});
    CHECK(devs[0].q == 2);
    CHECK(devs[1].spec == nn::SubNetworkSpec{2, 6});
    CHECK(devs[1].q == 5);
    CHECK(devs[2].spec == nn::SubNetworkSpec{1, 6});
    CHECK(devs[2].q == 8);

    cfg.fixed_assignments.pop_back();
    CHECK_THROWS_AS(protocol::run_experiment(arch, cfg, env), ShapeError);
}
