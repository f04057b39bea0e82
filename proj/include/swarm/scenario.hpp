#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "swarm/metrics.hpp"
#include "swarm/node.hpp"

namespace swarm {

// One experiment: dataset recipe, per-node allocation, downsample overrides,
// seeds, node template, and which arms (centralized / standalone / swarm)
// to run. Loaded from a versioned JSON file.
struct ScenarioSpec {
    std::string name;
    std::size_t data_n = 10000;
    std::size_t data_d = 16;
    double class_sep = 0.45;
    double positive_frac = 0.5;
    double train_frac = 0.7;
    double val_frac = 0.1;
    std::vector<double> fractions{0.10, 0.30, 0.30, 0.30};
    std::optional<std::vector<double>> class_bias;
    std::map<std::size_t, double> downsample;  // node -> fraction of nominal
    std::vector<std::int64_t> seeds{1, 2, 3, 4, 5};
    NodeConfig node_template;
    SimNetConfig net;
    bool arm_centralized = true;
    bool arm_standalone = true;
    bool arm_swarm = true;
    std::vector<std::uint32_t> adversary_zero_nodes;

    static ScenarioSpec from_json_file(const std::string& path);
    static ScenarioSpec from_json_text(const std::string& text);
    std::string to_json_text() const;
};

// One scored model: (node, arm) cell of a seed's run.
struct ResultCell {
    int node = -1;  // -1 for the centralized arm
    std::string arm;
    MetricsReport metrics;
    double dbi = 0.0;
    bool dbi_on_raw_features = false;
    bool failed = false;
    std::string error;
};

struct RunResult {
    std::string scenario;
    std::int64_t seed = 0;
    std::string test_hash;
    std::vector<ResultCell> cells;
    std::map<int, std::vector<RoundReport>> rounds;  // swarm arm, by node

    std::string to_json_text() const;
    static RunResult from_json_file(const std::string& path);
};

// Runs every seed of the scenario; one result file per seed under out_dir
// when out_dir is non-empty.
std::vector<RunResult> run_scenario(const ScenarioSpec& spec, const std::string& out_dir,
                                    std::ostream* log = nullptr);

struct ArmStats {
    int node;
    std::string arm;
    std::size_t n_seeds = 0;
    double auc_mean = 0.0, auc_std = 0.0;
    double gap_mean = 0.0;
    double sens_mean = 0.0, spec_mean = 0.0, f1_mean = 0.0;
};

struct Summary {
    std::vector<ArmStats> per_arm;                 // keyed (node, arm)
    std::map<int, double> uplift;                  // mean(swarm) - mean(standalone) per node
    std::map<std::string, double> mean_gap_by_arm;
    std::vector<std::string> missing_cells;
    bool single_seed = false;
};

Summary compare_report(const std::vector<RunResult>& results);

std::string render_summary_text(const Summary& s);
// Per-cell table, stable column order:
// scenario,seed,node,arm,auc,sens,spec,f1,gap
std::string render_cells_csv(const std::vector<RunResult>& results);

// Deterministic content hash used to pin the shared test set.
std::string dataset_hash(const Dataset& ds);

// Starts one real-TCP node from a JSON config file (bind address, seed
// peers, CSV shard paths, training parameters, optional hex pre-shared
// key). Blocks until the run finishes or `handle` requests a stop.
NodeRunOutcome run_real_node(const std::string& config_path, RunHandle* handle = nullptr,
                             std::ostream* log = nullptr);

// Result of a quick N-node simulated swarm with equal shares of a default
// synthetic dataset; used by the run-sim command.
RunResult run_quick_sim(std::size_t nodes, std::int64_t seed);

}  // namespace swarm
