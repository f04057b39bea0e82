// Command-line front end over the swarm C API.
//
// Subcommands: synth, partition, run-node, run-sim, scenario, report.
// Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "swarm/swarm.h"

namespace {

int runtime_fail(const char* what) {
    std::fprintf(stderr, "%s: %s\n", what, swarm_last_error());
    return 2;
}

swarm_node* g_node = nullptr;

void on_sigint(int) {
    if (g_node) swarm_node_signal_stop(g_node);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"peer-to-peer swarm learning harness"};
    app.require_subcommand(1);
    const bool verbose = std::getenv("SWARM_VERBOSE") != nullptr;

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic two-class CSV dataset");
    std::uint64_t n = 10000, d = 16;
    double class_sep = 0.45, positive_frac = 0.5;
    std::int64_t seed = 1;
    std::string out_path = "dataset.csv";
    synth->add_option("--n", n, "sample count");
    synth->add_option("--d", d, "feature count");
    synth->add_option("--sep", class_sep, "class separation");
    synth->add_option("--positive-frac", positive_frac, "positive class fraction");
    synth->add_option("--seed", seed, "rng seed");
    synth->add_option("--out", out_path, "output CSV path")->required();

    // partition
    auto* part = app.add_subcommand("partition", "split a CSV into per-node shards");
    std::string in_path, out_dir = "shards";
    std::vector<double> fractions;
    std::vector<double> class_bias;
    double val_frac = 0.125;
    std::int64_t part_seed = 1;
    part->add_option("--in", in_path, "input CSV")->required();
    part->add_option("--fractions", fractions, "per-node fractions")->required();
    part->add_option("--class-bias", class_bias, "per-node positive proportion targets");
    part->add_option("--val-frac", val_frac, "per-node validation fraction");
    part->add_option("--seed", part_seed, "rng seed");
    part->add_option("--out", out_dir, "output directory");

    // run-node
    auto* run_node_cmd = app.add_subcommand("run-node", "start one real-TCP node from a config file");
    std::string node_config;
    run_node_cmd->add_option("--config", node_config, "node config JSON")->required();

    // run-sim
    auto* run_sim = app.add_subcommand("run-sim", "run an N-node simulated swarm");
    std::uint32_t nodes = 4;
    std::int64_t sim_seed = 1;
    std::string sim_out = "results";
    run_sim->add_option("--nodes", nodes, "node count");
    run_sim->add_option("--seed", sim_seed, "rng seed");
    run_sim->add_option("--out", sim_out, "results directory");

    // scenario
    auto* scenario = app.add_subcommand("scenario", "execute a scenario spec");
    std::string spec_path, scenario_out = "results";
    scenario->add_option("--spec", spec_path, "scenario spec JSON")->required();
    scenario->add_option("--out", scenario_out, "results directory");

    // report
    auto* report = app.add_subcommand("report", "render stored run results");
    std::string results_dir, format = "text";
    report->add_option("--in", results_dir, "results directory")->required();
    report->add_option("--format", format, "text or csv")
        ->check(CLI::IsMember({"text", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    if (synth->parsed()) {
        swarm_dataset* ds = nullptr;
        if (swarm_dataset_synth(n, d, class_sep, positive_frac, seed, &ds) != SWARM_OK) {
            return runtime_fail("synth");
        }
        if (swarm_dataset_write_csv(ds, out_path.c_str()) != SWARM_OK) {
            swarm_dataset_free(ds);
            return runtime_fail("synth");
        }
        std::printf("wrote %llu rows x %llu features to %s\n",
                    (unsigned long long)swarm_dataset_rows(ds),
                    (unsigned long long)swarm_dataset_cols(ds), out_path.c_str());
        swarm_dataset_free(ds);
        return 0;
    }

    if (part->parsed()) {
        if (!class_bias.empty() && class_bias.size() != fractions.size()) {
            std::fprintf(stderr, "--class-bias must match --fractions length\n");
            return 1;
        }
        swarm_dataset* ds = nullptr;
        if (swarm_dataset_load_csv(in_path.c_str(), &ds) != SWARM_OK) {
            return runtime_fail("partition");
        }
        const swarm_status rc = swarm_partition_csv(
            ds, fractions.data(), fractions.size(),
            class_bias.empty() ? nullptr : class_bias.data(), part_seed, val_frac,
            out_dir.c_str());
        swarm_dataset_free(ds);
        if (rc != SWARM_OK) return runtime_fail("partition");
        std::printf("wrote %zu node shards to %s\n", fractions.size(), out_dir.c_str());
        return 0;
    }

    if (run_node_cmd->parsed()) {
        swarm_node* node = nullptr;
        if (swarm_node_start(node_config.c_str(), verbose ? 1 : 0, &node) != SWARM_OK) {
            return runtime_fail("run-node");
        }
        g_node = node;
        std::signal(SIGINT, on_sigint);  // Ctrl-C requests a manual stop
        char* summary = nullptr;
        const swarm_status rc = swarm_node_wait(node, &summary);
        g_node = nullptr;
        if (rc != SWARM_OK) {
            swarm_node_free(node);
            return runtime_fail("run-node");
        }
        std::printf("%s\n", summary);
        swarm_text_free(summary);
        swarm_node_free(node);
        return 0;
    }

    if (run_sim->parsed()) {
        if (swarm_run_sim(nodes, sim_seed, sim_out.c_str()) != SWARM_OK) {
            return runtime_fail("run-sim");
        }
        std::printf("results written to %s\n", sim_out.c_str());
        return 0;
    }

    if (scenario->parsed()) {
        if (swarm_run_scenario(spec_path.c_str(), scenario_out.c_str(), verbose ? 1 : 0) !=
            SWARM_OK) {
            return runtime_fail("scenario");
        }
        std::printf("results written to %s\n", scenario_out.c_str());
        return 0;
    }

    if (report->parsed()) {
        char* text = nullptr;
        if (swarm_report(results_dir.c_str(), format.c_str(), &text) != SWARM_OK) {
            return runtime_fail("report");
        }
        std::printf("%s", text);
        swarm_text_free(text);
        return 0;
    }

    return 1;
}
