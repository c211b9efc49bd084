#include "fedx/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedx/csv.hpp"
#include "fedx/quant.hpp"
#include "fedx/rng.hpp"

namespace fedx::experiment {

namespace fs = std::filesystem;

ExperimentConfig default_config() {
    ExperimentConfig ec;
    ec.arch.num_blocks = 2;
    ec.arch.max_depth_per_block = 2;
    ec.arch.max_width = 16;
    ec.arch.allowed_depths = {1, 2};
    ec.arch.allowed_widths = {4, 8, 16};

    ec.task = simenv::TaskConfig{};  // 10 classes in R^20, 200 samples each

    ec.plan.server_classes = {6, 7, 8, 9};
    ec.plan.scheme = simenv::Scheme::IID;
    ec.plan.alpha = 1.0;
    ec.plan.selection_eval_fraction = 0.2;

    // small tier cannot fit width-16 slices in its budget; q ceilings differ
    ec.tiers = {
        {"small", 0.25, 2.5e5, 8, 30e6, 0.5},
        {"medium", 0.25, 1e6, 16, 30e6, 0.5},
        {"large", 0.25, 4e6, 32, 30e6, 0.5},
        {"xl", 0.25, 1.6e7, 32, 30e6, 0.5},
    };
    ec.num_devices = 20;
    return ec;
}

std::vector<std::string> preset_names() {
    return {"default", "fedx_vs_noft", "fedavg_uniform", "mix_sweep", "dirichlet_skew"};
}

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig ec = default_config();
    ec.name = name;
    if (name == "default") {
        return ec;
    }
    if (name == "fedx_vs_noft") {
        ec.protocol.rounds = 50;
        // local steps must stay small: coarse-q downlinks can kick a device's
        // copy hard, and without the server pull the no-finetune arm never
        // recovers from an overshoot. The drop threshold keeps q near q_max.
        ec.protocol.local_lr = 0.01;
        ec.protocol.server_lr = 0.05;
        ec.protocol.pretrain_lr = 0.05;
        ec.protocol.acceptable_drop = 0.05;
        return ec;
    }
    if (name == "fedavg_uniform") {
        ec.protocol.mode = protocol::Mode::FedAvgUniform;
        return ec;
    }
    if (name == "mix_sweep") {
        // The capacity-vs-precision tradeoff only shows when the server pass
        // is too weak to repair downlink noise by itself: few fine-tune steps,
        // gentler step, more devices per round so the aggregate carries the
        // signal.
        ec.protocol.rounds = 60;
        ec.protocol.sampled_per_round = 10;
        ec.protocol.local_lr = 0.01;
        ec.protocol.server_lr = 0.02;
        ec.protocol.pretrain_lr = 0.05;
        ec.protocol.finetune_steps = 2;
        ec.protocol.gamma = 1e-3;
        return ec;
    }
    if (name == "dirichlet_skew") {
        ec.plan.scheme = simenv::Scheme::Dirichlet;
        ec.plan.alpha = 0.01;
        return ec;
    }
    throw ConfigError("unknown preset '" + name + "'", 0);
}

namespace {

std::string scheme_to_string(simenv::Scheme s) {
    return s == simenv::Scheme::IID ? "iid" : "dirichlet";
}

simenv::Scheme scheme_from_string(const std::string& s, int line) {
    if (s == "iid") return simenv::Scheme::IID;
    if (s == "dirichlet") return simenv::Scheme::Dirichlet;
    throw ConfigError("unknown partition scheme '" + s + "'", line);
}

std::string join_ints(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

std::string join_doubles(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += csv::format_double(v[i]);
    }
    return out;
}

std::vector<int> to_ints(const std::vector<long long>& v) {
    return std::vector<int>(v.begin(), v.end());
}

}  // namespace

ExperimentConfig from_config(const config::Config& cfg) {
    ExperimentConfig ec = default_config();

    // tier names first: they define part of the key space
    std::vector<std::string> tier_names;
    for (const auto& t : ec.tiers) tier_names.push_back(t.name);
    if (cfg.has("fleet.tiers")) tier_names = cfg.get_string_list("fleet.tiers");

    std::vector<std::string> known = {
        "experiment.name", "experiment.seed", "experiment.num_devices", "experiment.mode",
        "experiment.workers",
        "arch.num_blocks", "arch.max_depth_per_block", "arch.max_width", "arch.allowed_depths",
        "arch.allowed_widths",
        "task.num_classes", "task.input_dim", "task.samples_per_class", "task.mean_scale",
        "task.noise_sigma", "task.train_fraction",
        "partition.server_classes", "partition.scheme", "partition.alpha",
        "partition.dirichlet_all_classes", "partition.server_data_fraction",
        "partition.selection_eval_fraction",
        "fleet.tiers",
        "protocol.rounds", "protocol.sampled_per_round", "protocol.local_epochs",
        "protocol.local_lr", "protocol.server_lr", "protocol.gamma", "protocol.batch_size",
        "protocol.pretrain_epochs", "protocol.pretrain_lr", "protocol.finetune_steps",
        "protocol.finetune_sample", "protocol.uplink_quantize", "protocol.selection_samples",
        "protocol.acceptable_drop", "protocol.uniform_q",
        "mix.medium_depth", "mix.medium_width", "mix.medium_q", "mix.small_depth",
        "mix.small_width", "mix.small_q", "mix.fractions",
        "convergence.dim", "convergence.G", "convergence.Q", "convergence.noise_sigma",
        "convergence.eta", "convergence.gamma", "convergence.log2_T_min",
        "convergence.log2_T_max", "convergence.trials",
    };
    for (const auto& t : tier_names)
        for (const char* f : {"fraction", "compute_rate", "q_max", "bandwidth_bps", "mu_s"})
            known.push_back("fleet." + t + "." + f);
    config::reject_unknown_keys(cfg, known);

    auto geti = [&](const char* k, auto& dst) {
        if (cfg.has(k)) dst = static_cast<std::remove_reference_t<decltype(dst)>>(cfg.get_int(k));
    };
    auto getd = [&](const char* k, double& dst) {
        if (cfg.has(k)) dst = cfg.get_double(k);
    };
    auto getb = [&](const char* k, bool& dst) {
        if (cfg.has(k)) dst = cfg.get_bool(k);
    };

    if (cfg.has("experiment.name")) ec.name = cfg.get_string("experiment.name");
    if (cfg.has("experiment.seed"))
        ec.protocol.seed = static_cast<std::uint64_t>(cfg.get_int("experiment.seed"));
    geti("experiment.num_devices", ec.num_devices);
    geti("experiment.workers", ec.protocol.workers);
    if (cfg.has("experiment.mode")) {
        try {
            ec.protocol.mode = protocol::mode_from_string(cfg.get_string("experiment.mode"));
        } catch (const RangeError& e) {
            throw ConfigError(e.what(), cfg.line_of("experiment.mode"));
        }
    }

    geti("arch.num_blocks", ec.arch.num_blocks);
    geti("arch.max_depth_per_block", ec.arch.max_depth_per_block);
    geti("arch.max_width", ec.arch.max_width);
    if (cfg.has("arch.allowed_depths"))
        ec.arch.allowed_depths = to_ints(cfg.get_int_list("arch.allowed_depths"));
    if (cfg.has("arch.allowed_widths"))
        ec.arch.allowed_widths = to_ints(cfg.get_int_list("arch.allowed_widths"));

    geti("task.num_classes", ec.task.num_classes);
    geti("task.input_dim", ec.task.input_dim);
    geti("task.samples_per_class", ec.task.samples_per_class);
    getd("task.mean_scale", ec.task.mean_scale);
    getd("task.noise_sigma", ec.task.noise_sigma);
    getd("task.train_fraction", ec.task.train_fraction);

    if (cfg.has("partition.server_classes"))
        ec.plan.server_classes = to_ints(cfg.get_int_list("partition.server_classes"));
    if (cfg.has("partition.scheme"))
        ec.plan.scheme = scheme_from_string(cfg.get_string("partition.scheme"),
                                            cfg.line_of("partition.scheme"));
    getd("partition.alpha", ec.plan.alpha);
    getb("partition.dirichlet_all_classes", ec.plan.dirichlet_all_classes);
    getd("partition.server_data_fraction", ec.plan.server_data_fraction);
    getd("partition.selection_eval_fraction", ec.plan.selection_eval_fraction);

    if (cfg.has("fleet.tiers")) {
        ec.tiers.clear();
        for (const auto& t : tier_names) {
            simenv::TierTemplate tt;
            tt.name = t;
            const std::string base = "fleet." + t + ".";
            tt.fraction = cfg.get_double(base + "fraction");
            if (cfg.has(base + "compute_rate")) tt.compute_rate = cfg.get_double(base + "compute_rate");
            if (cfg.has(base + "q_max")) tt.q_max = static_cast<int>(cfg.get_int(base + "q_max"));
            if (cfg.has(base + "bandwidth_bps"))
                tt.bandwidth_bps = cfg.get_double(base + "bandwidth_bps");
            if (cfg.has(base + "mu_s")) tt.mu_s = cfg.get_double(base + "mu_s");
            ec.tiers.push_back(tt);
        }
    }

    geti("protocol.rounds", ec.protocol.rounds);
    geti("protocol.sampled_per_round", ec.protocol.sampled_per_round);
    geti("protocol.local_epochs", ec.protocol.local_epochs);
    getd("protocol.local_lr", ec.protocol.local_lr);
    getd("protocol.server_lr", ec.protocol.server_lr);
    getd("protocol.gamma", ec.protocol.gamma);
    geti("protocol.batch_size", ec.protocol.batch_size);
    geti("protocol.pretrain_epochs", ec.protocol.pretrain_epochs);
    getd("protocol.pretrain_lr", ec.protocol.pretrain_lr);
    geti("protocol.finetune_steps", ec.protocol.finetune_steps);
    geti("protocol.finetune_sample", ec.protocol.finetune_sample);
    getb("protocol.uplink_quantize", ec.protocol.uplink_quantize);
    geti("protocol.selection_samples", ec.protocol.selection_samples);
    getd("protocol.acceptable_drop", ec.protocol.acceptable_drop);
    geti("protocol.uniform_q", ec.protocol.uniform_q);

    geti("mix.medium_depth", ec.mix.medium.depth);
    geti("mix.medium_width", ec.mix.medium.width);
    geti("mix.medium_q", ec.mix.medium_q);
    geti("mix.small_depth", ec.mix.small.depth);
    geti("mix.small_width", ec.mix.small.width);
    geti("mix.small_q", ec.mix.small_q);
    if (cfg.has("mix.fractions")) ec.mix.fractions = cfg.get_double_list("mix.fractions");

    geti("convergence.dim", ec.convergence.dim);
    getd("convergence.G", ec.convergence.G);
    getd("convergence.Q", ec.convergence.Q);
    getd("convergence.noise_sigma", ec.convergence.noise_sigma);
    getd("convergence.eta", ec.convergence.eta);
    getd("convergence.gamma", ec.convergence.gamma);
    geti("convergence.log2_T_min", ec.convergence.log2_T_min);
    geti("convergence.log2_T_max", ec.convergence.log2_T_max);
    geti("convergence.trials", ec.convergence.trials);

    ec.convergence.seed = ec.protocol.seed;
    return ec;
}

std::string to_config_text(const ExperimentConfig& ec) {
    std::ostringstream os;
    os << "[experiment]\n";
    os << "name = " << ec.name << "\n";
    os << "seed = " << ec.protocol.seed << "\n";
    os << "num_devices = " << ec.num_devices << "\n";
    os << "mode = " << protocol::to_string(ec.protocol.mode) << "\n";
    os << "workers = " << ec.protocol.workers << "\n\n";

    os << "[arch]\n";
    os << "num_blocks = " << ec.arch.num_blocks << "\n";
    os << "max_depth_per_block = " << ec.arch.max_depth_per_block << "\n";
    os << "max_width = " << ec.arch.max_width << "\n";
    os << "allowed_depths = " << join_ints(ec.arch.allowed_depths) << "\n";
    os << "allowed_widths = " << join_ints(ec.arch.allowed_widths) << "\n\n";

    os << "[task]\n";
    os << "num_classes = " << ec.task.num_classes << "\n";
    os << "input_dim = " << ec.task.input_dim << "\n";
    os << "samples_per_class = " << ec.task.samples_per_class << "\n";
    os << "mean_scale = " << csv::format_double(ec.task.mean_scale) << "\n";
    os << "noise_sigma = " << csv::format_double(ec.task.noise_sigma) << "\n";
    os << "train_fraction = " << csv::format_double(ec.task.train_fraction) << "\n\n";

    os << "[partition]\n";
    os << "server_classes = " << join_ints(ec.plan.server_classes) << "\n";
    os << "scheme = " << scheme_to_string(ec.plan.scheme) << "\n";
    os << "alpha = " << csv::format_double(ec.plan.alpha) << "\n";
    os << "dirichlet_all_classes = " << (ec.plan.dirichlet_all_classes ? "true" : "false") << "\n";
    os << "server_data_fraction = " << csv::format_double(ec.plan.server_data_fraction) << "\n";
    os << "selection_eval_fraction = " << csv::format_double(ec.plan.selection_eval_fraction)
       << "\n\n";

    os << "[fleet]\n";
    std::string tier_list;
    for (std::size_t i = 0; i < ec.tiers.size(); ++i) {
        if (i) tier_list += ",";
        tier_list += ec.tiers[i].name;
    }
    os << "tiers = " << tier_list << "\n\n";
    for (const auto& t : ec.tiers) {
        os << "[fleet." << t.name << "]\n";
        os << "fraction = " << csv::format_double(t.fraction) << "\n";
        os << "compute_rate = " << csv::format_double(t.compute_rate) << "\n";
        os << "q_max = " << t.q_max << "\n";
        os << "bandwidth_bps = " << csv::format_double(t.bandwidth_bps) << "\n";
        os << "mu_s = " << csv::format_double(t.mu_s) << "\n\n";
    }

    os << "[protocol]\n";
    os << "rounds = " << ec.protocol.rounds << "\n";
    os << "sampled_per_round = " << ec.protocol.sampled_per_round << "\n";
    os << "local_epochs = " << ec.protocol.local_epochs << "\n";
    os << "local_lr = " << csv::format_double(ec.protocol.local_lr) << "\n";
    os << "server_lr = " << csv::format_double(ec.protocol.server_lr) << "\n";
    os << "gamma = " << csv::format_double(ec.protocol.gamma) << "\n";
    os << "batch_size = " << ec.protocol.batch_size << "\n";
    os << "pretrain_epochs = " << ec.protocol.pretrain_epochs << "\n";
    os << "pretrain_lr = " << csv::format_double(ec.protocol.pretrain_lr) << "\n";
    os << "finetune_steps = " << ec.protocol.finetune_steps << "\n";
    os << "finetune_sample = " << ec.protocol.finetune_sample << "\n";
    os << "uplink_quantize = " << (ec.protocol.uplink_quantize ? "true" : "false") << "\n";
    os << "selection_samples = " << ec.protocol.selection_samples << "\n";
    os << "acceptable_drop = " << csv::format_double(ec.protocol.acceptable_drop) << "\n";
    os << "uniform_q = " << ec.protocol.uniform_q << "\n\n";

    os << "[mix]\n";
    os << "medium_depth = " << ec.mix.medium.depth << "\n";
    os << "medium_width = " << ec.mix.medium.width << "\n";
    os << "medium_q = " << ec.mix.medium_q << "\n";
    os << "small_depth = " << ec.mix.small.depth << "\n";
    os << "small_width = " << ec.mix.small.width << "\n";
    os << "small_q = " << ec.mix.small_q << "\n";
    os << "fractions = " << join_doubles(ec.mix.fractions) << "\n\n";

    os << "[convergence]\n";
    os << "dim = " << ec.convergence.dim << "\n";
    os << "G = " << csv::format_double(ec.convergence.G) << "\n";
    os << "Q = " << csv::format_double(ec.convergence.Q) << "\n";
    os << "noise_sigma = " << csv::format_double(ec.convergence.noise_sigma) << "\n";
    os << "eta = " << csv::format_double(ec.convergence.eta) << "\n";
    os << "gamma = " << csv::format_double(ec.convergence.gamma) << "\n";
    os << "log2_T_min = " << ec.convergence.log2_T_min << "\n";
    os << "log2_T_max = " << ec.convergence.log2_T_max << "\n";
    os << "trials = " << ec.convergence.trials << "\n";
    return os.str();
}

std::string preset_text(const std::string& name) { return to_config_text(preset(name)); }

nn::ElasticArch bound_arch(const ExperimentConfig& ec) {
    nn::ElasticArch a = ec.arch;
    a.input_dim = ec.task.input_dim;
    a.output_dim = ec.task.num_classes;
    a.validate();
    return a;
}

protocol::Env build_env(const ExperimentConfig& ec, std::uint64_t seed) {
    simenv::Task task = simenv::generate_task(ec.task, seed);
    simenv::Partition part = simenv::partition(task, ec.plan, ec.num_devices, seed);
    protocol::Env env;
    env.server_train = std::move(part.server_train);
    env.server_eval = std::move(part.server_eval);
    env.server_test = std::move(part.server_test);
    env.device_train = std::move(part.device_train);
    env.device_test = std::move(part.device_test);
    env.fleet = simenv::build_fleet(ec.tiers, ec.num_devices, seed);
    return env;
}

void write_rounds_csv(std::ostream& os, const std::vector<protocol::RoundReport>& rounds) {
    os << "round,mode,global_loss,global_acc,mean_device_acc,total_bytes_down,total_bytes_up,"
          "max_device_train_time_s,comm_time_s,finetune_time_proxy\n";
    for (const auto& r : rounds) {
        os << r.round << ',' << protocol::to_string(r.mode) << ','
           << csv::format_double(r.global_loss) << ',' << csv::format_double(r.global_acc) << ','
           << csv::format_double(r.mean_device_acc) << ','
           << csv::format_double(r.total_bytes_down) << ','
           << csv::format_double(r.total_bytes_up) << ','
           << csv::format_double(r.max_device_train_time_s) << ','
           << csv::format_double(r.comm_time_s) << ','
           << csv::format_double(r.finetune_time_proxy) << '\n';
    }
}

void write_objective_csv(std::ostream& os, const std::vector<protocol::RoundReport>& rounds) {
    os << "round,objective_device_term,objective_server_term,objective_total,"
          "quantization_time_proxy\n";
    for (const auto& r : rounds) {
        os << r.round << ',' << csv::format_double(r.objective_device_term) << ','
           << csv::format_double(r.objective_server_term) << ','
           << csv::format_double(r.objective_device_term + r.objective_server_term) << ','
           << csv::format_double(r.quantization_time_proxy) << '\n';
    }
}

void write_assignments_csv(std::ostream& os, const protocol::Env& env,
                           const std::vector<protocol::DeviceRoundStats>& stats) {
    os << "device,tier,depth,width,q,bytes_down,bytes_up,train_time_s,comm_time_s\n";
    for (const auto& s : stats) {
        os << s.device_id << ',' << env.fleet[static_cast<std::size_t>(s.device_id)].tier << ','
           << s.spec.depth << ',' << s.spec.width << ',' << s.q << ','
           << csv::format_double(s.bytes_down) << ',' << csv::format_double(s.bytes_up) << ','
           << csv::format_double(s.train_time_s) << ',' << csv::format_double(s.comm_time_s)
           << '\n';
    }
}

namespace {

std::ofstream open_out(const std::string& dir, const std::string& name,
                       std::vector<std::string>& written) {
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    written.push_back(path);
    return f;
}

}  // namespace

RunResult run_to_dir(const ExperimentConfig& ec, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto arch = bound_arch(ec);
    const auto env = build_env(ec, ec.protocol.seed);

    RunResult rr;
    rr.result = protocol::run_experiment(arch, ec.protocol, env);

    {
        auto f = open_out(out_dir, "rounds.csv", rr.files_written);
        write_rounds_csv(f, rr.result.rounds);
    }
    {
        auto f = open_out(out_dir, "objective.csv", rr.files_written);
        write_objective_csv(f, rr.result.rounds);
    }
    {
        auto f = open_out(out_dir, "assignments.csv", rr.files_written);
        std::vector<protocol::DeviceRoundStats> all;
        for (const auto& r : rr.result.rounds)
            all.insert(all.end(), r.devices.begin(), r.devices.end());
        write_assignments_csv(f, env, all);
    }
    const std::string model_path = (fs::path(out_dir) / "final_model.bin").string();
    nn::save_model(rr.result.final_model, model_path);
    rr.files_written.push_back(model_path);
    return rr;
}

RunResult run_fedx_vs_noft(const ExperimentConfig& ec, const std::string& out_dir) {
    ExperimentConfig fedx = ec;
    fedx.protocol.mode = protocol::Mode::FedX;
    RunResult rr = run_to_dir(fedx, out_dir);  // rounds.csv etc. describe the fedx arm

    ExperimentConfig noft_ec = ec;
    noft_ec.protocol.mode = protocol::Mode::FedXNoFinetune;
    const auto arch = bound_arch(noft_ec);
    const auto env = build_env(noft_ec, noft_ec.protocol.seed);
    auto noft = protocol::run_experiment(arch, noft_ec.protocol, env);

    {
        auto f = open_out(out_dir, "rounds_noft.csv", rr.files_written);
        write_rounds_csv(f, noft.rounds);
    }
    {
        auto f = open_out(out_dir, "comparison.csv", rr.files_written);
        f << "round,fedx_mean_device_acc,noft_mean_device_acc,fedx_global_acc,noft_global_acc,"
             "fedx_global_loss,noft_global_loss\n";
        for (std::size_t i = 0; i < rr.result.rounds.size(); ++i) {
            const auto& x = rr.result.rounds[i];
            const auto& y = noft.rounds[i];
            f << x.round << ',' << csv::format_double(x.mean_device_acc) << ','
              << csv::format_double(y.mean_device_acc) << ','
              << csv::format_double(x.global_acc) << ',' << csv::format_double(y.global_acc)
              << ',' << csv::format_double(x.global_loss) << ','
              << csv::format_double(y.global_loss) << '\n';
        }
    }
    return rr;
}

std::vector<MixPoint> mix_sweep(const ExperimentConfig& ec) {
    const auto arch = bound_arch(ec);
    arch.require_spec(ec.mix.medium);
    arch.require_spec(ec.mix.small);
    const auto env = build_env(ec, ec.protocol.seed);
    const int n = env.num_devices();

    std::vector<MixPoint> points;
    for (double f : ec.mix.fractions) {
        if (f < 0.0 || f > 1.0) throw RangeError("mix fraction must lie in [0, 1]");
        const int k = static_cast<int>(std::lround(f * n));

        // which devices get the medium network: a seeded draw, stable per seed
        std::vector<int> ids(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) ids[static_cast<std::size_t>(i)] = i;
        rng::Rng r(rng::key_of(ec.protocol.seed, rng::Stream::MixAssign));
        rng::shuffle(ids, r);

        protocol::ProtocolConfig pc = ec.protocol;
        pc.fixed_assignments.assign(static_cast<std::size_t>(n), {ec.mix.small, ec.mix.small_q});
        for (int i = 0; i < k; ++i)
            pc.fixed_assignments[static_cast<std::size_t>(ids[static_cast<std::size_t>(i)])] = {
                ec.mix.medium, ec.mix.medium_q};

        auto res = protocol::run_experiment(arch, pc, env);

        MixPoint p;
        p.fraction = f;
        const std::size_t total = res.rounds.size();
        const std::size_t tail = std::max<std::size_t>(1, total / 4);
        for (std::size_t i = total - tail; i < total; ++i) {
            p.mean_device_acc += res.rounds[i].mean_device_acc;
            p.global_acc += res.rounds[i].global_acc;
        }
        p.mean_device_acc /= tail;
        p.global_acc /= tail;
        for (const auto& rep : res.rounds) p.total_bytes_down += rep.total_bytes_down;
        points.push_back(p);
    }
    return points;
}

void write_mix_csv(std::ostream& os, const std::vector<MixPoint>& points) {
    os << "medium_fraction,mean_device_acc,global_acc,total_bytes_down\n";
    for (const auto& p : points)
        os << csv::format_double(p.fraction) << ',' << csv::format_double(p.mean_device_acc)
           << ',' << csv::format_double(p.global_acc) << ','
           << csv::format_double(p.total_bytes_down) << '\n';
}

std::vector<CodecBenchRow> codec_bench(const std::vector<int>& qs, const std::vector<int>& sizes,
                                       std::uint64_t seed) {
    std::vector<CodecBenchRow> rows;
    for (int n : sizes) {
        if (n < 0) throw RangeError("negative vector size");
        std::vector<float> v(static_cast<std::size_t>(n));
        const auto gen_key = rng::key_of(seed, rng::Stream::TaskGen, static_cast<std::uint64_t>(n));
        for (int i = 0; i < n; ++i)
            v[static_cast<std::size_t>(i)] =
                static_cast<float>(rng::normal_at(gen_key, static_cast<std::uint64_t>(i)));
        for (int q : qs) {
            auto p = quant::quantize(v, q,
                                     rng::key_of(seed, rng::Stream::Quant,
                                                 static_cast<std::uint64_t>(q),
                                                 static_cast<std::uint64_t>(n)));
            CodecBenchRow row;
            row.q = q;
            row.n = n;
            row.bits_per_coord = n > 0 ? static_cast<double>(p.encoded_bits) / n : 0.0;
            row.compression_vs_dense =
                p.encoded_bits > 0 ? 32.0 * n / static_cast<double>(p.encoded_bits) : 0.0;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_codec_csv(std::ostream& os, const std::vector<CodecBenchRow>& rows) {
    os << "q,n,bits_per_coord,compression_vs_dense\n";
    for (const auto& r : rows)
        os << r.q << ',' << r.n << ',' << csv::format_double(r.bits_per_coord) << ','
           << csv::format_double(r.compression_vs_dense) << '\n';
}

void write_convergence_csv(std::ostream& os, const convergence::ConvergenceReport& rep) {
    os << "T,mean_gap,slope,intercept\n";
    for (const auto& p : rep.points)
        os << p.T << ',' << csv::format_double(p.mean_gap) << ','
           << csv::format_double(rep.slope) << ',' << csv::format_double(rep.intercept) << '\n';
}

}  // namespace fedx::experiment
