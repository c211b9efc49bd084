#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <tuple>

#include "fedx/csv.hpp"
#include "fedx/decompose.hpp"
#include "fedx/errors.hpp"
#include "fedx/experiment.hpp"
#include "fedx/nn.hpp"
#include "fedx/protocol.hpp"
#include "fedx/selection.hpp"

namespace fs = std::filesystem;
using namespace fedx;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset = "default";
    std::string out;
    std::uint64_t seed = 0;
    int workers = 0;
    bool dry_run = false;

    CLI::Option* seed_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
};

void attach_common(CLI::App* cmd, CommonOpts& o, bool with_out = true) {
    cmd->add_option("--config", o.config_path, "experiment config file")
        ->check(CLI::ExistingFile);
    cmd->add_option("--preset", o.preset, "built-in experiment preset")
        ->check(CLI::IsMember(experiment::preset_names()));
    if (with_out)
        cmd->add_option("--out", o.out, "output directory (default: $FEDX_OUT_DIR or ./fedx_out)");
    o.seed_opt = cmd->add_option("--seed", o.seed, "override the experiment seed");
    o.workers_opt = cmd->add_option("--workers", o.workers, "parallel device workers");
    cmd->add_flag("--dry-run", o.dry_run, "validate and print the resolved plan, then stop");
}

experiment::ExperimentConfig load_config(const CommonOpts& o) {
    experiment::ExperimentConfig ec =
        o.config_path.empty()
            ? experiment::preset(o.preset)
            : experiment::from_config(config::parse_config_file(o.config_path));
    if (o.seed_opt && o.seed_opt->count()) {
        ec.protocol.seed = o.seed;
        ec.convergence.seed = o.seed;
    }
    if (o.workers_opt && o.workers_opt->count()) ec.protocol.workers = o.workers;
    return ec;
}

std::string out_dir_of(const CommonOpts& o) {
    if (!o.out.empty()) return o.out;
    if (const char* env = std::getenv("FEDX_OUT_DIR")) return env;
    return "fedx_out";
}

std::ofstream open_out_file(const std::string& dir, const std::string& name) {
    fs::create_directories(dir);
    const std::string path = (fs::path(dir) / name).string();
    std::ofstream f(path);
    if (!f) throw Error("cannot write " + path);
    return f;
}

int cmd_run(const CommonOpts& o) {
    const auto ec = load_config(o);
    if (o.dry_run) {
        std::cout << experiment::to_config_text(ec);
        return 0;
    }
    const std::string dir = out_dir_of(o);
    const bool compare = ec.name == "fedx_vs_noft";
    const experiment::RunResult rr = compare ? experiment::run_fedx_vs_noft(ec, dir)
                                             : experiment::run_to_dir(ec, dir);
    const auto& last = rr.result.rounds.back();
    std::cout << "experiment " << ec.name << ": " << rr.result.rounds.size() << " rounds, mode "
              << protocol::to_string(ec.protocol.mode) << "\n";
    std::cout << "final global_acc " << csv::format_double(last.global_acc)
              << ", mean_device_acc " << csv::format_double(last.mean_device_acc)
              << ", global_loss " << csv::format_double(last.global_loss) << "\n";
    for (const auto& f : rr.files_written) std::cout << "wrote " << f << "\n";
    return 0;
}

int cmd_select(const CommonOpts& o) {
    const auto ec = load_config(o);
    if (o.dry_run) {
        std::cout << experiment::to_config_text(ec);
        return 0;
    }
    const auto arch = experiment::bound_arch(ec);
    const auto env = experiment::build_env(ec, ec.protocol.seed);

    auto model = nn::init_model(arch, ec.protocol.seed);
    model = protocol::server_pretrain(std::move(model), env.server_train,
                                      ec.protocol.pretrain_epochs, ec.protocol.pretrain_lr,
                                      ec.protocol.batch_size, ec.protocol.seed);

    const auto fam = decompose::family(arch);
    selection::SelectionConfig scfg;
    scfg.samples_per_epoch = ec.protocol.selection_samples;
    scfg.epochs = ec.protocol.local_epochs;
    scfg.acceptable_drop = ec.protocol.acceptable_drop;
    scfg.seed = ec.protocol.seed;

    auto f = open_out_file(out_dir_of(o), "assignments.csv");
    f << "device_id,depth,width,q,drop,time_s\n";
    std::map<std::tuple<double, int, double>, selection::Assignment> memo;
    int infeasible = 0;
    for (const auto& dev : env.fleet) {
        const auto key = std::make_tuple(dev.compute_rate, dev.q_max, dev.mu_s);
        auto it = memo.find(key);
        if (it == memo.end()) {
            try {
                it = memo.emplace(key, selection::select(model, fam, dev, env.server_eval, scfg)
                                           .assignment)
                         .first;
            } catch (const InfeasibleDeviceError& e) {
                std::cerr << "device " << dev.id << ": " << e.what() << "\n";
                ++infeasible;
                continue;
            }
        }
        const auto& a = it->second;
        f << dev.id << ',' << a.spec.depth << ',' << a.spec.width << ',' << a.q << ','
          << csv::format_double(a.predicted_drop) << ','
          << csv::format_double(a.predicted_train_time_s) << '\n';
        std::cout << "device " << dev.id << ": depth " << a.spec.depth << " width "
                  << a.spec.width << " q " << a.q << " (drop "
                  << csv::format_double(a.predicted_drop) << ", "
                  << csv::format_double(a.predicted_train_time_s) << " s)\n";
    }
    if (infeasible) std::cerr << infeasible << " device(s) fit no sub-network\n";
    return 0;
}

int cmd_mix_sweep(const CommonOpts& o) {
    const auto ec = load_config(o);
    if (o.dry_run) {
        std::cout << experiment::to_config_text(ec);
        return 0;
    }
    const auto pts = experiment::mix_sweep(ec);
    auto f = open_out_file(out_dir_of(o), "mix.csv");
    experiment::write_mix_csv(f, pts);
    const experiment::MixPoint* best = &pts.front();
    for (const auto& p : pts) {
        std::cout << "medium fraction " << csv::format_double(p.fraction)
                  << ": mean_device_acc " << csv::format_double(p.mean_device_acc)
                  << ", global_acc " << csv::format_double(p.global_acc) << ", bytes down "
                  << csv::format_double(p.total_bytes_down) << "\n";
        if (p.mean_device_acc > best->mean_device_acc) best = &p;
    }
    std::cout << "best fraction " << csv::format_double(best->fraction) << "\n";
    return 0;
}

int cmd_convergence(const CommonOpts& o) {
    const auto ec = load_config(o);
    if (o.dry_run) {
        std::cout << experiment::to_config_text(ec);
        return 0;
    }
    const auto rep = convergence::run_convergence(ec.convergence);
    auto f = open_out_file(out_dir_of(o), "convergence.csv");
    experiment::write_convergence_csv(f, rep);
    for (const auto& p : rep.points)
        std::cout << "T " << p.T << ": gap " << csv::format_double(p.mean_gap) << "\n";
    std::cout << "fitted slope " << csv::format_double(rep.slope) << " (rate holds at <= -0.4)\n";
    return 0;
}

int cmd_codec_bench(const CommonOpts& o, const std::vector<int>& qs,
                    const std::vector<int>& sizes) {
    const auto rows = experiment::codec_bench(qs, sizes, o.seed_opt->count() ? o.seed : 1);
    auto f = open_out_file(out_dir_of(o), "codec_bench.csv");
    experiment::write_codec_csv(f, rows);
    for (const auto& r : rows)
        std::cout << "q " << r.q << " n " << r.n << ": "
                  << csv::format_double(r.bits_per_coord) << " bits/coord, "
                  << csv::format_double(r.compression_vs_dense) << "x vs dense\n";
    return 0;
}

int cmd_gen_data(const CommonOpts& o) {
    const auto ec = load_config(o);
    if (o.dry_run) {
        std::cout << experiment::to_config_text(ec);
        return 0;
    }
    const std::string dir = out_dir_of(o);
    fs::create_directories(dir);
    const auto env = experiment::build_env(ec, ec.protocol.seed);

    auto put = [&](const std::string& name, const Dataset& d) {
        const std::string path = (fs::path(dir) / name).string();
        save_dataset(d, path);
        std::cout << "wrote " << path << " (" << d.size() << " rows)\n";
    };
    put("server_train.bin", env.server_train);
    put("server_eval.bin", env.server_eval);
    put("server_test.bin", env.server_test);
    for (int u = 0; u < env.num_devices(); ++u) {
        put("device_" + std::to_string(u) + "_train.bin",
            env.device_train[static_cast<std::size_t>(u)]);
        put("device_" + std::to_string(u) + "_test.bin",
            env.device_test[static_cast<std::size_t>(u)]);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fedx: federated sub-network training simulator"};
    app.require_subcommand(1);

    CommonOpts run_o, select_o, mix_o, conv_o, bench_o, gen_o;
    attach_common(app.add_subcommand("run", "run a federated experiment"), run_o);
    attach_common(app.add_subcommand("select", "print per-device sub-network assignments"),
                  select_o);
    attach_common(app.add_subcommand("mix-sweep", "sweep the medium-network fraction"), mix_o);
    attach_common(app.add_subcommand("convergence", "verify the server-update rate"), conv_o);
    attach_common(app.add_subcommand("gen-data", "materialize the synthetic datasets"), gen_o);

    auto* bench = app.add_subcommand("codec-bench", "measure encoded bits per coordinate");
    std::vector<int> bench_qs = {1, 2, 4, 8, 16, 32};
    std::vector<int> bench_sizes = {64, 1024, 16384};
    bench->add_option("--q", bench_qs, "quantization bit-widths");
    bench->add_option("--n", bench_sizes, "vector lengths");
    attach_common(bench, bench_o);

    // --preset mix_sweep is the natural default for the sweep
    if (mix_o.preset == "default") mix_o.preset = "mix_sweep";

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand("run")) return cmd_run(run_o);
        if (app.got_subcommand("select")) return cmd_select(select_o);
        if (app.got_subcommand("mix-sweep")) return cmd_mix_sweep(mix_o);
        if (app.got_subcommand("convergence")) return cmd_convergence(conv_o);
        if (app.got_subcommand("codec-bench")) return cmd_codec_bench(bench_o, bench_qs, bench_sizes);
        if (app.got_subcommand("gen-data")) return cmd_gen_data(gen_o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";  // what() carries "line N: ..."
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
