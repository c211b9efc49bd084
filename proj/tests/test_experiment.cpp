#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedx/csv.hpp"
#include "fedx/errors.hpp"
#include "fedx/experiment.hpp"

using namespace fedx;
using namespace fedx::experiment;

namespace {

// shrunk everything: 4 classes, 4 devices, 2 rounds
ExperimentConfig tiny_ec() {
    ExperimentConfig ec = default_config();
    ec.name = "tiny";
    ec.task.num_classes = 4;
    ec.task.input_dim = 8;
    ec.task.samples_per_class = 25;
    ec.plan.server_classes = {2, 3};
    ec.arch.num_blocks = 1;
    ec.arch.max_depth_per_block = 1;
    ec.arch.max_width = 8;
    ec.arch.allowed_depths = {1};
    ec.arch.allowed_widths = {4, 8};
    ec.tiers = {{"only", 1.0, 1e7, 8, 30e6, 1.0}};
    ec.num_devices = 4;
    ec.protocol.rounds = 2;
    ec.protocol.sampled_per_round = 2;
    ec.protocol.pretrain_epochs = 1;
    ec.protocol.finetune_steps = 1;
    ec.protocol.selection_samples = 8;
    ec.mix.medium = {1, 8};
    ec.mix.medium_q = 8;  // same q on both arms: byte deltas isolate slice size
    ec.mix.small = {1, 4};
    ec.mix.small_q = 8;
    ec.mix.fractions = {0.0, 1.0};
    return ec;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    REQUIRE(f);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("presets parse and round-trip through the config grammar") {
    CHECK(preset_names().size() == 5);
    CHECK_THROWS_AS(preset("no_such_thing"), ConfigError);

    for (const auto& name : preset_names()) {
        const std::string text = preset_text(name);
        const ExperimentConfig ec = from_config(config::parse_config_string(text));
        CHECK(ec.name == name);
        CHECK(to_config_text(ec) == text);  // fixpoint of parse/print
    }

    const auto skew = preset("dirichlet_skew");
    CHECK(skew.plan.scheme == simenv::Scheme::Dirichlet);
    CHECK(skew.plan.alpha == 0.01);
    const auto uni = preset("fedavg_uniform");
    CHECK(uni.protocol.mode == protocol::Mode::FedAvgUniform);
}

TEST_CASE("file overrides land on top of defaults") {
    const auto cfg = config::parse_config_string(
        "[protocol]\n"
        "rounds = 7\n"
        "gamma = 0.5\n"
        "[experiment]\n"
        "seed = 99\n"
        "num_devices = 11\n"
        "[arch]\n"
        "allowed_widths = 4,16\n");
    const ExperimentConfig ec = from_config(cfg);
    CHECK(ec.protocol.rounds == 7);
    CHECK(ec.protocol.gamma == 0.5);
    CHECK(ec.protocol.seed == 99);
    CHECK(ec.num_devices == 11);
    CHECK(ec.arch.allowed_widths == std::vector<int>{4, 16});
    // untouched keys keep their defaults
    CHECK(ec.protocol.sampled_per_round == default_config().protocol.sampled_per_round);
    CHECK(ec.convergence.seed == 99);  // follows the experiment seed
}

TEST_CASE("unknown keys and bad values are rejected with line numbers") {
    try {
        from_config(config::parse_config_string("[protocol]\nroundz = 5\n"));
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("protocol.roundz") != std::string::npos);
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(from_config(config::parse_config_string("[experiment]\nmode = banana\n")),
                    ConfigError);
    CHECK_THROWS_AS(
        from_config(config::parse_config_string("[partition]\nscheme = sorted\n")),
        ConfigError);
}

TEST_CASE("custom fleets replace the stock tiers") {
    const auto cfg = config::parse_config_string(
        "[fleet]\n"
        "tiers = a,b\n"
        "[fleet.a]\n"
        "fraction = 0.75\n"
        "compute_rate = 1e6\n"
        "q_max = 4\n"
        "[fleet.b]\n"
        "fraction = 0.25\n");
    const ExperimentConfig ec = from_config(cfg);
    REQUIRE(ec.tiers.size() == 2);
    CHECK(ec.tiers[0].name == "a");
    CHECK(ec.tiers[0].fraction == 0.75);
    CHECK(ec.tiers[0].q_max == 4);
    CHECK(ec.tiers[1].name == "b");
    CHECK(ec.tiers[1].compute_rate == simenv::TierTemplate{}.compute_rate);

    // stock tier keys become unknown once the fleet is redefined
    CHECK_THROWS_AS(from_config(config::parse_config_string(
                        "[fleet]\ntiers = a\n[fleet.a]\nfraction = 1\n"
                        "[fleet.small]\nfraction = 0.5\n")),
                    ConfigError);
}

TEST_CASE("build_env wires the partition into a protocol environment") {
    const ExperimentConfig ec = tiny_ec();
    const auto env = build_env(ec, 7);
    CHECK(env.num_devices() == 4);
    CHECK_NOTHROW(env.validate());
    CHECK(env.server_train.size() > 0);
    CHECK(env.server_eval.size() > 0);
    CHECK(env.server_test.size() == 4 * 5);  // the full test split
    for (const auto& d : env.device_train)
        for (int lab : d.labels) CHECK(lab < 2);

    const auto arch = bound_arch(ec);
    CHECK(arch.input_dim == 8);
    CHECK(arch.output_dim == 4);
}

TEST_CASE("run_to_dir writes the expected artifacts, bit-stable across reruns") {
    const ExperimentConfig ec = tiny_ec();
    const auto base = std::filesystem::temp_directory_path() / "fedx_experiment_test";
    std::filesystem::remove_all(base);
    const auto dir_a = (base / "a").string();
    const auto dir_b = (base / "b").string();

    const RunResult ra = run_to_dir(ec, dir_a);
    CHECK(ra.files_written.size() == 4);
    for (const auto& f : ra.files_written) CHECK(std::filesystem::exists(f));

    std::istringstream rounds_is(slurp(dir_a + "/rounds.csv"));
    const csv::Table t = csv::read_csv(rounds_is);
    const std::vector<std::string> want_header = {
        "round", "mode", "global_loss", "global_acc", "mean_device_acc", "total_bytes_down",
        "total_bytes_up", "max_device_train_time_s", "comm_time_s", "finetune_time_proxy"};
    CHECK(t.header == want_header);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][0] == "0");
    CHECK(t.rows[0][1] == "fedx");
    // every numeric field parses back
    for (const auto& row : t.rows)
        for (std::size_t c = 2; c < row.size(); ++c) CHECK_NOTHROW(csv::parse_double(row[c]));

    std::istringstream asg_is(slurp(dir_a + "/assignments.csv"));
    const csv::Table asg = csv::read_csv(asg_is);
    CHECK(asg.rows.size() == 4);  // 2 rounds x 2 sampled devices

    const RunResult rb = run_to_dir(ec, dir_b);
    CHECK(slurp(dir_a + "/rounds.csv") == slurp(dir_b + "/rounds.csv"));
    CHECK(slurp(dir_a + "/objective.csv") == slurp(dir_b + "/objective.csv"));
    CHECK(slurp(dir_a + "/final_model.bin") == slurp(dir_b + "/final_model.bin"));
    CHECK(ra.result.final_model.params == rb.result.final_model.params);
    std::filesystem::remove_all(base);
}

TEST_CASE("fedx_vs_noft comparison spans both modes on one seed") {
    ExperimentConfig ec = tiny_ec();
    const auto base = std::filesystem::temp_directory_path() / "fedx_vs_noft_test";
    std::filesystem::remove_all(base);

    const RunResult rr = run_fedx_vs_noft(ec, base.string());
    CHECK(rr.files_written.size() == 6);  // the full fedx run artifacts + noft + comparison
    CHECK(std::filesystem::exists(base / "rounds.csv"));
    CHECK(std::filesystem::exists(base / "rounds_noft.csv"));
    CHECK(std::filesystem::exists(base / "final_model.bin"));
    std::istringstream is(slurp((base / "comparison.csv").string()));
    const csv::Table t = csv::read_csv(is);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.column("fedx_mean_device_acc") == 1);
    CHECK(t.column("noft_mean_device_acc") == 2);
    std::filesystem::remove_all(base);
}

TEST_CASE("mix_sweep runs one experiment per fraction") {
    const ExperimentConfig ec = tiny_ec();
    const auto pts = mix_sweep(ec);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].fraction == 0.0);
    CHECK(pts[1].fraction == 1.0);
    for (const auto& p : pts) {
        CHECK(p.mean_device_acc > 0.0);
        CHECK(p.total_bytes_down > 0.0);
    }
    // the all-medium end ships a wider slice, so more bytes go down
    CHECK(pts[1].total_bytes_down > pts[0].total_bytes_down);

    ExperimentConfig bad = ec;
    bad.mix.fractions = {1.5};
    CHECK_THROWS_AS(mix_sweep(bad), RangeError);

    std::ostringstream os;
    write_mix_csv(os, pts);
    std::istringstream is(os.str());
    CHECK(csv::read_csv(is).rows.size() == 2);
}

TEST_CASE("codec_bench: more levels cost more bits, sparse regime compresses") {
    const auto rows = codec_bench({1, 4, 8, 16}, {512, 4096}, 5);
    REQUIRE(rows.size() == 8);
    // within one size, bits per coordinate grow with q
    for (std::size_t i = 1; i < 4; ++i) CHECK(rows[i].bits_per_coord > rows[i - 1].bits_per_coord);
    for (std::size_t i = 5; i < 8; ++i) CHECK(rows[i].bits_per_coord > rows[i - 1].bits_per_coord);
    // q = 8 on a long Gaussian vector stays well under dense float32
    CHECK(rows[6].q == 8);
    CHECK(rows[6].n == 4096);
    CHECK(rows[6].compression_vs_dense >= 3.0);

    std::ostringstream os;
    write_codec_csv(os, rows);
    std::istringstream is(os.str());
    CHECK(csv::read_csv(is).rows.size() == 8);
}

TEST_CASE("convergence csv carries the fitted rate") {
    convergence::ConvergenceConfig cc;
    cc.trials = 2;
    cc.log2_T_max = 8;
    const auto rep = convergence::run_convergence(cc);
    std::ostringstream os;
    write_convergence_csv(os, rep);
    std::istringstream is(os.str());
    const auto t = csv::read_csv(is);
    CHECK(t.rows.size() == rep.points.size());
    CHECK(csv::parse_double(t.rows[0][2]) == rep.slope);
}
