#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "swarm/aggregation.hpp"
#include "swarm/data.hpp"
#include "swarm/sim_transport.hpp"
#include "swarm/trainer.hpp"
#include "swarm/transport.hpp"

namespace swarm {

struct NodeConfig {
    std::uint32_t node_id = 0;
    ModelSpec model;
    TrainConfig train;
    std::size_t exchange_interval = 3;  // epochs between exchanges (K)
    GatePolicy gate;
    MergeScheme scheme = MergeScheme::fedavg;
    std::size_t max_epochs = 20;
    std::uint64_t collect_window_ms = 200;
    std::vector<std::string> seed_peers;
    std::uint64_t join_timeout_ms = 2000;
    std::optional<std::string> checkpoint_path;
    // Fault-injection knob: broadcast all-zero weights instead of the
    // trained ones (the node still trains and merges normally).
    bool adversary_zero_weights = false;

    void validate() const;
};

struct RoundReport {
    std::uint32_t round = 0;
    std::size_t epochs_run = 0;
    double local_val_auc = 0.0;
    double candidate_val_auc = 0.0;
    bool gate_accepted = false;
    std::size_t peers_heard = 0;
    double weights_l2_delta = 0.0;
};

enum class StopReason { max_epochs, early_stop, manual };

const char* stop_reason_name(StopReason r);

// Cooperative stop flag, observed at epoch granularity.
class RunHandle {
public:
    void request_stop();  // throws AlreadyStopped once the run finished
    bool stop_requested() const { return stop_.load(); }
    bool finished() const { return done_.load(); }
    void mark_done() { done_.store(true); }

private:
    std::atomic<bool> stop_{false};
    std::atomic<bool> done_{false};
};

struct NodeRunOutcome {
    WeightVector final_weights;  // best-validation weights seen
    std::vector<RoundReport> reports;
    EpochHistory history;
    StopReason reason = StopReason::max_epochs;
};

// One node of the swarm, stepped phase by phase so a single-threaded driver
// can interleave several nodes over one simulated network.
class NodeRunner {
public:
    NodeRunner(NodeConfig cfg, NodeShard shard, Transport& transport,
               std::ostream* log = nullptr);

    void join();
    bool done() const;
    void train_phase(RunHandle* handle = nullptr);
    void broadcast_phase();
    void collect_and_merge();

    NodeRunOutcome finish(RunHandle* handle = nullptr);

    const Trainer& trainer() const { return trainer_; }
    const std::vector<RoundReport>& reports() const { return reports_; }
    std::uint32_t round() const { return round_; }
    const NodeNet& net() const { return net_; }
    const NodeConfig& config() const { return cfg_; }

    void save_checkpoint(const std::string& path) const;
    void restore_checkpoint(const std::string& path);

private:
    NodeConfig cfg_;
    NodeShard shard_;
    NodeNet net_;
    Trainer trainer_;
    std::ostream* log_ = nullptr;
    std::uint32_t round_ = 0;
    std::size_t epochs_this_round_ = 0;
    std::vector<RoundReport> reports_;
    bool manual_stop_ = false;
};

// Full node loop on one transport endpoint (join, rounds, stop control).
NodeRunOutcome run_node(const NodeConfig& cfg, const NodeShard& shard, Transport& transport,
                        RunHandle* handle = nullptr, std::ostream* log = nullptr);

// Local training only, no networking.
struct StandaloneOutcome {
    WeightVector weights;
    EpochHistory history;
};
StandaloneOutcome run_standalone(const NodeConfig& cfg, const NodeShard& shard);

// Standalone training on the union of all shards.
StandaloneOutcome run_centralized(const Dataset& train, const Dataset& validation,
                                  const NodeConfig& cfg);

void signal_stop(RunHandle& handle);

// Lockstep N-node swarm over a fresh deterministic simulator.
struct SwarmSimResult {
    std::vector<NodeRunOutcome> nodes;
    std::vector<std::string> transcript;
};
SwarmSimResult run_swarm_sim(const std::vector<NodeConfig>& configs,
                             const std::vector<NodeShard>& shards, const SimNetConfig& net_cfg,
                             std::ostream* log = nullptr);

}  // namespace swarm
