#include "fedx/protocol.hpp"

#include <algorithm>
#include <cstring>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "fedx/decompose.hpp"
#include "fedx/local_training.hpp"
#include "fedx/nn.hpp"
#include "fedx/quant.hpp"
#include "fedx/rng.hpp"

namespace fedx::protocol {

std::string to_string(Mode m) {
    switch (m) {
        case Mode::FedX: return "fedx";
        case Mode::FedXNoFinetune: return "fedx_noft";
        case Mode::FedAvgUniform: return "fedavg_uniform";
    }
    throw RangeError("unknown mode");
}

Mode mode_from_string(const std::string& s) {
    if (s == "fedx") return Mode::FedX;
    if (s == "fedx_noft") return Mode::FedXNoFinetune;
    if (s == "fedavg_uniform") return Mode::FedAvgUniform;
    throw RangeError("unknown mode: " + s);
}

void Env::validate() const {
    if (fleet.empty()) throw Error("env: empty fleet");
    if (device_train.size() != fleet.size() || device_test.size() != fleet.size())
        throw ShapeError("env: per-device datasets must match the fleet size");
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        if (fleet[i].id != static_cast<int>(i)) throw Error("env: fleet ids must be 0..N-1");
        if (device_train[i].size() == 0) throw EmptyDataError("env: device has no training data");
    }
    if (server_train.size() == 0) throw EmptyDataError("env: server has no training data");
}

std::uint64_t hash_params(const std::vector<float>& params) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (float f : params) {
        std::uint32_t u;
        std::memcpy(&u, &f, 4);
        for (int b = 0; b < 4; ++b) {
            h ^= (u >> (8 * b)) & 0xFF;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

namespace {

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::mutex err_mu;
    std::exception_ptr first_error;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (int i = w; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(err_mu);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

ElasticModel server_pretrain(ElasticModel model, const Dataset& server_data, int epochs,
                             double lr, int batch_size, std::uint64_t seed,
                             std::vector<double>* losses) {
    for (int e = 0; e < epochs; ++e) {
        rng::Rng shuffle(rng::key_of(seed, rng::Stream::Pretrain, static_cast<std::uint64_t>(e)));
        const double loss = nn::sgd_epoch(model, model.arch.full_spec(), server_data, lr,
                                          batch_size, shuffle);
        if (losses) losses->push_back(loss);
    }
    return model;
}

ElasticModel finetune(const ElasticModel& aggregated, const Dataset& server_data, double lambda,
                      double gamma, int steps, int batch_size, int sample_cap,
                      std::uint64_t key) {
    if (server_data.size() == 0) throw EmptyDataError("finetune: no server data");
    if (steps < 0) throw RangeError("finetune: steps must be non-negative");
    ElasticModel model = aggregated;
    const std::vector<float> anchor = aggregated.params;
    const auto spec = model.arch.full_spec();

    rng::Rng r(key);
    const int pool_n = std::min(sample_cap, server_data.size());
    const auto pool = rng::sample_without_replacement(server_data.size(), pool_n, r);

    for (int t = 0; t < steps; ++t) {
        const int bs = std::min(batch_size, pool_n);
        auto pick = rng::sample_without_replacement(pool_n, bs, r);
        std::vector<int> idx(pick.size());
        for (std::size_t i = 0; i < pick.size(); ++i)
            idx[i] = pool[static_cast<std::size_t>(pick[i])];
        Batch b = gather(server_data, idx);
        nn::LossGrad lg = nn::loss_and_grad(model, spec, b);
        for (std::size_t i = 0; i < model.params.size(); ++i) {
            const double prox = gamma * (static_cast<double>(model.params[i]) - anchor[i]);
            model.params[i] = static_cast<float>(static_cast<double>(model.params[i]) -
                                                 lambda * (lg.grad[i] + prox));
        }
    }
    return model;
}

namespace {

struct Resolved {
    bool feasible = false;
    selection::Assignment assignment;
};

// Assignments for every device this round. Profiles that look identical share
// one evaluation (and therefore one assignment).
std::vector<Resolved> resolve_assignments(const ElasticModel& model, const ProtocolConfig& cfg,
                                          const Env& env) {
    const int n = env.num_devices();
    std::vector<Resolved> out(static_cast<std::size_t>(n));
    if (!cfg.fixed_assignments.empty()) {
        if (static_cast<int>(cfg.fixed_assignments.size()) != n)
            throw ShapeError("fixed_assignments must cover every device");
        for (int u = 0; u < n; ++u) {
            const auto& [spec, q] = cfg.fixed_assignments[static_cast<std::size_t>(u)];
            model.arch.require_spec(spec);
            if (q < 1 || q > 32) throw RangeError("fixed assignment q out of range");
            out[u].feasible = true;
            out[u].assignment = {u, spec, q, 0.0, 0.0};
        }
        return out;
    }
    if (cfg.mode == Mode::FedAvgUniform) {
        for (int u = 0; u < n; ++u) {
            out[u].feasible = true;
            out[u].assignment = {u, model.arch.full_spec(), cfg.uniform_q, 0.0, 0.0};
        }
        return out;
    }
    const auto fam = decompose::family(model.arch);
    selection::SelectionConfig scfg;
    scfg.samples_per_epoch = cfg.selection_samples;
    scfg.epochs = cfg.local_epochs;
    scfg.acceptable_drop = cfg.acceptable_drop;
    scfg.seed = cfg.seed;

    std::map<std::tuple<double, int, double>, Resolved> memo;
    for (int u = 0; u < n; ++u) {
        const auto& dev = env.fleet[static_cast<std::size_t>(u)];
        const auto key = std::make_tuple(dev.compute_rate, dev.q_max, dev.mu_s);
        auto it = memo.find(key);
        if (it == memo.end()) {
            Resolved r;
            try {
                r.assignment = selection::select(model, fam, dev, env.server_eval, scfg).assignment;
                r.feasible = true;
            } catch (const InfeasibleDeviceError&) {
                r.feasible = false;
            }
            it = memo.emplace(key, r).first;
        }
        out[u] = it->second;
        out[u].assignment.device_id = u;
    }
    return out;
}

}  // namespace

RoundReport run_round(ElasticModel& model, const ProtocolConfig& cfg, const Env& env,
                      int round) {
    env.validate();
    const int n = env.num_devices();
    const ElasticArch& arch = model.arch;

    RoundReport rep;
    rep.round = round;
    rep.mode = cfg.mode;

    const auto resolved = resolve_assignments(model, cfg, env);

    // draw this round's participants
    rng::Rng sampler(rng::key_of(cfg.seed, rng::Stream::DeviceSample,
                                 static_cast<std::uint64_t>(round)));
    auto ids = rng::sample_without_replacement(n, std::min(cfg.sampled_per_round, n), sampler);
    std::sort(ids.begin(), ids.end());

    std::vector<int> active;
    for (int u : ids) {
        if (resolved[static_cast<std::size_t>(u)].feasible)
            active.push_back(u);
        else
            rep.skipped.push_back(u);
    }

    struct DeviceWork {
        DeviceRoundStats stats;
        std::vector<float> values;  // what the server receives back
        double quant_ops = 0.0;
    };
    std::vector<DeviceWork> work(active.size());

    parallel_for(static_cast<int>(active.size()), cfg.workers, [&](int slot) {
        const int u = active[static_cast<std::size_t>(slot)];
        const auto& asg = resolved[static_cast<std::size_t>(u)].assignment;
        const auto& dev = env.fleet[static_cast<std::size_t>(u)];
        DeviceWork& w = work[static_cast<std::size_t>(slot)];

        auto sub = decompose::extract(model, asg.spec);
        auto payload = quant::quantize(sub, asg.q,
                                       rng::key_of(cfg.seed, rng::Stream::Quant,
                                                   static_cast<std::uint64_t>(round),
                                                   static_cast<std::uint64_t>(u)));
        w.stats.bytes_down = static_cast<double>(payload.encoded_bits) / 8.0;
        w.quant_ops += static_cast<double>(sub.size());

        local_training::LocalConfig lcfg{cfg.local_epochs, cfg.local_lr, cfg.batch_size};
        auto local = local_training::train_local(arch, asg.spec, quant::dequantize(payload),
                                                 env.device_train[static_cast<std::size_t>(u)],
                                                 lcfg, cfg.seed, round, u);

        double bits_up;
        if (cfg.uplink_quantize) {
            auto up = quant::quantize(local.values, asg.q,
                                      rng::key_of(cfg.seed, rng::Stream::Uplink,
                                                  static_cast<std::uint64_t>(round),
                                                  static_cast<std::uint64_t>(u)));
            w.values = quant::dequantize(up);
            bits_up = static_cast<double>(up.encoded_bits);
            w.quant_ops += static_cast<double>(local.values.size());
        } else {
            w.values = std::move(local.values);
            bits_up = 32.0 * static_cast<double>(w.values.size());
        }
        w.stats.bytes_up = bits_up / 8.0;
        w.stats.device_id = u;
        w.stats.spec = asg.spec;
        w.stats.q = asg.q;
        w.stats.train_time_s =
            selection::train_time(arch, asg.spec, dev,
                                  env.device_train[static_cast<std::size_t>(u)].size(),
                                  cfg.local_epochs);
        w.stats.comm_time_s =
            (static_cast<double>(payload.encoded_bits) + bits_up) / dev.bandwidth_bps;
    });

    std::vector<std::pair<SubNetworkSpec, std::vector<float>>> updates;
    updates.reserve(work.size());
    for (auto& w : work) {
        rep.devices.push_back(w.stats);
        rep.total_bytes_down += w.stats.bytes_down;
        rep.total_bytes_up += w.stats.bytes_up;
        rep.max_device_train_time_s = std::max(rep.max_device_train_time_s, w.stats.train_time_s);
        rep.comm_time_s = std::max(rep.comm_time_s, w.stats.comm_time_s);
        rep.quantization_time_proxy += w.quant_ops;
        updates.emplace_back(w.stats.spec, std::move(w.values));
    }

    if (!updates.empty()) model = decompose::aggregate(model, updates).first;
    rep.hash_after_aggregate = hash_params(model.params);

    if (cfg.mode == Mode::FedX && cfg.finetune_steps > 0) {
        model = finetune(model, env.server_train, cfg.server_lr, cfg.gamma, cfg.finetune_steps,
                         cfg.batch_size, cfg.finetune_sample,
                         rng::key_of(cfg.seed, rng::Stream::Finetune,
                                     static_cast<std::uint64_t>(round)));
        const int bs = std::min({cfg.batch_size, cfg.finetune_sample, env.server_train.size()});
        rep.finetune_time_proxy = 3.0 * static_cast<double>(arch.forward_flops(arch.full_spec())) *
                                  bs * cfg.finetune_steps;
    }
    rep.hash_after_finetune = hash_params(model.params);

    // metrics: global view plus per-device deployment view
    rep.global_loss = nn::loss_only(model, arch.full_spec(), full_batch(env.server_train));
    rep.objective_server_term = rep.global_loss;
    if (env.server_test.size() > 0)
        rep.global_acc = nn::accuracy(model, arch.full_spec(), env.server_test);

    std::vector<double> dev_loss(static_cast<std::size_t>(n), 0.0);
    std::vector<double> dev_acc(static_cast<std::size_t>(n), -1.0);
    parallel_for(n, cfg.workers, [&](int u) {
        if (!resolved[static_cast<std::size_t>(u)].feasible) return;
        const auto& asg = resolved[static_cast<std::size_t>(u)].assignment;
        auto sub = decompose::extract(model, asg.spec);

        // the training objective sees the assigned q
        auto obj = quant::quantize(sub, asg.q,
                                   rng::key_of(cfg.seed, rng::Stream::EvalQuant,
                                               static_cast<std::uint64_t>(round),
                                               static_cast<std::uint64_t>(u), 0));
        auto obj_model = decompose::embed(model, asg.spec, quant::dequantize(obj));
        dev_loss[static_cast<std::size_t>(u)] =
            nn::loss_only(obj_model, asg.spec,
                          full_batch(env.device_train[static_cast<std::size_t>(u)]));

        // deployment rounds q up to the device's arithmetic class
        const int dep_q = quant::precision_bits(quant::precision_class(asg.q));
        auto dep = quant::quantize(sub, dep_q,
                                   rng::key_of(cfg.seed, rng::Stream::EvalQuant,
                                               static_cast<std::uint64_t>(round),
                                               static_cast<std::uint64_t>(u), 1));
        auto dep_model = decompose::embed(model, asg.spec, quant::dequantize(dep));
        if (env.device_test[static_cast<std::size_t>(u)].size() > 0)
            dev_acc[static_cast<std::size_t>(u)] =
                nn::accuracy(dep_model, asg.spec, env.device_test[static_cast<std::size_t>(u)]);
    });
    int acc_count = 0;
    for (int u = 0; u < n; ++u) {
        rep.objective_device_term += dev_loss[static_cast<std::size_t>(u)];
        if (dev_acc[static_cast<std::size_t>(u)] >= 0.0) {
            rep.mean_device_acc += dev_acc[static_cast<std::size_t>(u)];
            ++acc_count;
        }
    }
    if (acc_count) rep.mean_device_acc /= acc_count;
    return rep;
}

ExperimentResult run_experiment(const ElasticArch& arch, const ProtocolConfig& cfg,
                                const Env& env, const RoundSink& sink) {
    arch.validate();
    env.validate();
    if (cfg.rounds < 0 || cfg.sampled_per_round < 1) throw RangeError("bad protocol config");

    ExperimentResult res;
    ElasticModel model = nn::init_model(arch, cfg.seed);
    model = server_pretrain(std::move(model), env.server_train, cfg.pretrain_epochs,
                            cfg.pretrain_lr, cfg.batch_size, cfg.seed, &res.pretrain_losses);

    res.rounds.reserve(static_cast<std::size_t>(cfg.rounds));
    for (int t = 0; t < cfg.rounds; ++t) {
        RoundReport rep = run_round(model, cfg, env, t);
        if (sink) sink(rep);
        res.rounds.push_back(std::move(rep));
    }
    res.final_model = std::move(model);
    return res;
}

}  // namespace fedx::protocol
