#include "swarm/node.hpp"

#include <fstream>

#include <json.hpp>

#include "swarm/metrics.hpp"

namespace swarm {

using nlohmann::json;

void NodeConfig::validate() const {
    train.validate();
    gate.validate();
    if (exchange_interval < 1 || max_epochs < exchange_interval) {
        throw SwarmError(ErrorCode::InvalidConfig,
                         "NodeConfig: need 1 <= exchange_interval <= max_epochs");
    }
}

const char* stop_reason_name(StopReason r) {
    switch (r) {
        case StopReason::max_epochs: return "max_epochs";
        case StopReason::early_stop: return "early_stop";
        case StopReason::manual: return "manual";
    }
    return "unknown";
}

void RunHandle::request_stop() {
    if (done_.load()) {
        throw SwarmError(ErrorCode::AlreadyStopped, "run already finished");
    }
    stop_.store(true);
}

void signal_stop(RunHandle& handle) { handle.request_stop(); }

namespace {

TrainConfig trainer_config(const NodeConfig& cfg) {
    TrainConfig tc = cfg.train;
    tc.epochs = cfg.max_epochs;  // one cosine schedule spans the whole run
    return tc;
}

}  // namespace

NodeRunner::NodeRunner(NodeConfig cfg, NodeShard shard, Transport& transport,
                       std::ostream* log)
    : cfg_(std::move(cfg)),
      shard_(std::move(shard)),
      net_(cfg_.node_id, transport),
      trainer_(cfg_.model, trainer_config(cfg_), init_model(cfg_.model, cfg_.train.seed)),
      log_(log) {
    cfg_.validate();
    if (shard_.train.rows() == 0) {
        throw SwarmError(ErrorCode::EmptyInput, "NodeRunner: empty shard");
    }
}

void NodeRunner::join() { net_.join(cfg_.seed_peers, cfg_.join_timeout_ms); }

bool NodeRunner::done() const {
    return manual_stop_ || trainer_.stopped() || trainer_.epoch() >= cfg_.max_epochs;
}

void NodeRunner::train_phase(RunHandle* handle) {
    const std::size_t budget =
        std::min(cfg_.exchange_interval, cfg_.max_epochs - trainer_.epoch());
    epochs_this_round_ = 0;
    for (std::size_t e = 0; e < budget && !done(); ++e) {
        if (handle && handle->stop_requested()) {
            manual_stop_ = true;
            break;
        }
        trainer_.run_epochs(shard_, 1);
        ++epochs_this_round_;
        if (log_) {
            const EpochRecord& r = trainer_.history().back();
            (*log_) << "ts=" << net_.self_id() << ':' << r.epoch << " node=" << cfg_.node_id
                    << " epoch=" << r.epoch << " round=" << round_
                    << " train_auc=" << r.train_auc << " val_auc=" << r.val_auc
                    << " gate=- peers=-\n";
        }
    }
}

void NodeRunner::broadcast_phase() {
    ModelUpdate update{trainer_.current_weights(), shard_.sample_count(), cfg_.node_id, round_,
                       static_cast<std::uint32_t>(trainer_.epoch())};
    if (cfg_.adversary_zero_weights) {
        update.weights = WeightVector(std::vector<double>(trainer_.current_weights().size(), 0.0),
                                      trainer_.current_weights().shape());
    }
    net_.broadcast_weights(update);
}

void NodeRunner::collect_and_merge() {
    const std::vector<ModelUpdate> peers =
        net_.collect_updates(round_, cfg_.collect_window_ms, cfg_.model.shape());

    const ModelUpdate local{trainer_.current_weights(), shard_.sample_count(), cfg_.node_id,
                            round_, static_cast<std::uint32_t>(trainer_.epoch())};
    const WeightVector pre = trainer_.current_weights();
    MergeOutcome merged =
        merge_round(local, peers, shard_.validation, cfg_.gate, cfg_.scheme, cfg_.model);

    RoundReport report;
    report.round = round_;
    report.epochs_run = epochs_this_round_;
    report.local_val_auc = merged.local_val_auc;
    report.candidate_val_auc = merged.candidate_val_auc;
    report.gate_accepted = merged.accepted;
    report.peers_heard = merged.peers_used;
    if (merged.accepted && merged.peers_used > 0) {
        trainer_.adopt_weights(merged.weights);
        trainer_.observe_validation(merged.candidate_val_auc, merged.weights,
                                    /*counts_toward_patience=*/false);
    }
    report.weights_l2_delta = l2_distance(pre, trainer_.current_weights());
    reports_.push_back(report);
    if (log_) {
        (*log_) << "ts=" << net_.self_id() << ':' << trainer_.epoch() << " node=" << cfg_.node_id
                << " epoch=" << trainer_.epoch() << " round=" << round_
                << " train_auc=- val_auc=" << merged.candidate_val_auc
                << " gate=" << (merged.accepted ? "accept" : "reject")
                << " peers=" << merged.peers_used << "\n";
    }
    if (cfg_.checkpoint_path) save_checkpoint(*cfg_.checkpoint_path);
    ++round_;
}

NodeRunOutcome NodeRunner::finish(RunHandle* handle) {
    StopReason reason = StopReason::max_epochs;
    if (manual_stop_) {
        reason = StopReason::manual;
    } else if (trainer_.stopped()) {
        reason = StopReason::early_stop;
    }
    if (handle) handle->mark_done();
    return NodeRunOutcome{trainer_.best_weights(), reports_, trainer_.history(), reason};
}

NodeRunOutcome run_node(const NodeConfig& cfg, const NodeShard& shard, Transport& transport,
                        RunHandle* handle, std::ostream* log) {
    NodeRunner runner(cfg, shard, transport, log);
    runner.join();
    while (!runner.done()) {
        runner.train_phase(handle);
        runner.broadcast_phase();
        runner.collect_and_merge();
    }
    NodeRunOutcome out = runner.finish(handle);
    return out;
}

StandaloneOutcome run_standalone(const NodeConfig& cfg, const NodeShard& shard) {
    cfg.validate();
    Trainer t(cfg.model, trainer_config(cfg), init_model(cfg.model, cfg.train.seed));
    t.run_epochs(shard, cfg.max_epochs);
    return StandaloneOutcome{t.best_weights(), t.history()};
}

StandaloneOutcome run_centralized(const Dataset& train, const Dataset& validation,
                                  const NodeConfig& cfg) {
    NodeShard shard;
    shard.node_id = -1;
    shard.train = train;
    shard.validation = validation;
    return run_standalone(cfg, shard);
}

SwarmSimResult run_swarm_sim(const std::vector<NodeConfig>& configs,
                             const std::vector<NodeShard>& shards, const SimNetConfig& net_cfg,
                             std::ostream* log) {
    if (configs.empty() || configs.size() != shards.size()) {
        throw SwarmError(ErrorCode::InvalidConfig, "run_swarm_sim: config/shard count mismatch");
    }
    SimNet net(net_cfg);
    std::vector<SimEndpoint*> endpoints;
    for (const auto& cfg : configs) endpoints.push_back(&net.create_endpoint(cfg.node_id));

    std::vector<std::unique_ptr<NodeRunner>> runners;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        NodeConfig cfg = configs[i];
        // Discovery: every node after the first seeds from node 0.
        if (i > 0 && cfg.seed_peers.empty()) {
            cfg.seed_peers = {endpoints[0]->local_address()};
        }
        runners.push_back(std::make_unique<NodeRunner>(cfg, shards[i], *endpoints[i], log));
    }
    for (auto& r : runners) r->join();
    // One settling gossip pass so late joiners appear in every table.
    for (auto& r : runners) r->join();

    auto all_done = [&] {
        for (const auto& r : runners) {
            if (!r->done()) return false;
        }
        return true;
    };
    while (!all_done()) {
        // A node active at round start completes the whole round, so the
        // final training chunk still gets its broadcast and merge.
        std::vector<bool> active;
        active.reserve(runners.size());
        for (const auto& r : runners) active.push_back(!r->done());
        for (std::size_t i = 0; i < runners.size(); ++i) {
            if (active[i]) runners[i]->train_phase();
        }
        for (std::size_t i = 0; i < runners.size(); ++i) {
            if (active[i]) runners[i]->broadcast_phase();
        }
        for (std::size_t i = 0; i < runners.size(); ++i) {
            if (active[i]) runners[i]->collect_and_merge();
        }
    }

    SwarmSimResult result;
    for (auto& r : runners) result.nodes.push_back(r->finish());
    result.transcript = net.transcript();
    return result;
}

void NodeRunner::save_checkpoint(const std::string& path) const {
    json j;
    j["version"] = 1;
    j["node_id"] = cfg_.node_id;
    j["round"] = round_;
    j["epoch"] = trainer_.epoch();
    j["weights"] = trainer_.current_weights().values();
    j["best_weights"] = trainer_.best_weights().values();
    j["best_val_auc"] = trainer_.best_val_auc();
    j["since_improve"] = trainer_.epochs_since_improve();
    j["stopped"] = trainer_.stopped();
    j["first_moment"] = trainer_.optimizer().first_moment;
    j["second_moment"] = trainer_.optimizer().second_moment;
    j["step_count"] = trainer_.optimizer().step_count;
    json hist = json::array();
    for (const auto& r : trainer_.history()) {
        hist.push_back({{"epoch", r.epoch},
                        {"train_auc", r.train_auc},
                        {"val_auc", r.val_auc},
                        {"train_loss", r.train_loss},
                        {"lr_used", r.lr_used}});
    }
    j["history"] = std::move(hist);
    std::ofstream out(path);
    if (!out) {
        throw SwarmError(ErrorCode::IoError, "save_checkpoint: cannot open " + path);
    }
    out << j.dump();
}

void NodeRunner::restore_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SwarmError(ErrorCode::IoError, "restore_checkpoint: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SwarmError(ErrorCode::ParseError, std::string("restore_checkpoint: ") + e.what());
    }
    const ShapeSpec shape = cfg_.model.shape();
    OptimizerState opt = trainer_.optimizer();
    opt.first_moment = j.at("first_moment").get<std::vector<double>>();
    opt.second_moment = j.at("second_moment").get<std::vector<double>>();
    opt.step_count = j.at("step_count").get<std::size_t>();
    EpochHistory hist;
    for (const auto& r : j.at("history")) {
        hist.push_back(EpochRecord{r.at("epoch").get<std::size_t>(),
                                   r.at("train_auc").get<double>(),
                                   r.at("val_auc").get<double>(),
                                   r.at("train_loss").get<double>(),
                                   r.at("lr_used").get<double>()});
    }
    trainer_.restore(WeightVector(j.at("weights").get<std::vector<double>>(), shape),
                     WeightVector(j.at("best_weights").get<std::vector<double>>(), shape),
                     j.at("best_val_auc").get<double>(), std::move(opt),
                     j.at("epoch").get<std::size_t>(), j.at("since_improve").get<std::size_t>(),
                     j.at("stopped").get<bool>(), std::move(hist));
    round_ = j.at("round").get<std::uint32_t>();
}

}  // namespace swarm
