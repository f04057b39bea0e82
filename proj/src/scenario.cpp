#include "swarm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "swarm/tcp_transport.hpp"
#include "swarm/trainer.hpp"

namespace swarm {

using nlohmann::json;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

json gate_to_json(const GatePolicy& g) {
    const char* mode = g.mode == GateMode::relative ? "relative"
                       : g.mode == GateMode::absolute ? "absolute"
                                                      : "off";
    return json{{"mode", mode}, {"theta", g.theta}};
}

json cell_to_json(const ResultCell& c) {
    return json{{"node", c.node},
                {"arm", c.arm},
                {"failed", c.failed},
                {"error", c.error},
                {"auc", c.metrics.auc},
                {"sensitivity", c.metrics.sensitivity},
                {"specificity", c.metrics.specificity},
                {"precision", c.metrics.precision},
                {"recall", c.metrics.recall},
                {"f1", c.metrics.f1},
                {"gap", c.metrics.gap},
                {"dbi", c.dbi},
                {"dbi_on_raw_features", c.dbi_on_raw_features}};
}

ResultCell cell_from_json(const json& j) {
    ResultCell c;
    c.node = j.at("node").get<int>();
    c.arm = j.at("arm").get<std::string>();
    c.failed = j.at("failed").get<bool>();
    c.error = j.at("error").get<std::string>();
    c.metrics.auc = j.at("auc").get<double>();
    c.metrics.sensitivity = j.at("sensitivity").get<double>();
    c.metrics.specificity = j.at("specificity").get<double>();
    c.metrics.precision = j.at("precision").get<double>();
    c.metrics.recall = j.at("recall").get<double>();
    c.metrics.f1 = j.at("f1").get<double>();
    c.metrics.gap = j.at("gap").get<double>();
    c.dbi = j.at("dbi").get<double>();
    c.dbi_on_raw_features = j.at("dbi_on_raw_features").get<bool>();
    return c;
}

}  // namespace

std::string dataset_hash(const Dataset& ds) {
    // FNV-1a over the raw feature/label bytes.
    std::uint64_t h = 14695981039346656037ULL;
    auto mix = [&h](const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 1099511628211ULL;
        }
    };
    mix(ds.features.data(), ds.features.size() * sizeof(double));
    mix(ds.labels.data(), ds.labels.size() * sizeof(int));
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ScenarioSpec ScenarioSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SwarmError(ErrorCode::IoError, "scenario: cannot open " + path);
    }
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

ScenarioSpec ScenarioSpec::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SwarmError(ErrorCode::ParseError, std::string("scenario: ") + e.what());
    }
    if (j.value("version", 0) != 1) {
        throw SwarmError(ErrorCode::InvalidConfig, "scenario: unsupported version");
    }
    ScenarioSpec s;
    s.name = j.at("name").get<std::string>();
    const json& d = j.at("dataset");
    s.data_n = d.at("n").get<std::size_t>();
    s.data_d = d.at("d").get<std::size_t>();
    s.class_sep = d.at("class_sep").get<double>();
    s.positive_frac = d.value("positive_frac", 0.5);
    if (j.contains("split")) {
        s.train_frac = j["split"].value("train", 0.7);
        s.val_frac = j["split"].value("val", 0.1);
    }
    s.fractions = j.at("fractions").get<std::vector<double>>();
    if (j.contains("class_bias") && !j["class_bias"].is_null()) {
        s.class_bias = j["class_bias"].get<std::vector<double>>();
    }
    if (j.contains("downsample")) {
        for (const auto& [k, v] : j["downsample"].items()) {
            s.downsample[std::stoul(k)] = v.get<double>();
        }
    }
    s.seeds = j.at("seeds").get<std::vector<std::int64_t>>();
    if (s.seeds.empty()) {
        throw SwarmError(ErrorCode::InvalidConfig, "scenario: seeds must be non-empty");
    }

    const json& n = j.at("node");
    NodeConfig& nc = s.node_template;
    nc.model.hidden_dim = n.value("hidden_dim", 16);
    nc.model.input_dim = s.data_d;
    nc.train.epochs = n.value("epochs", 20);
    nc.train.batch_size = n.value("batch_size", 32);
    nc.train.lr_initial = n.value("lr_initial", 1e-4);
    nc.train.lr_min = n.value("lr_min", 0.0);
    nc.train.patience = n.value("patience", 5);
    nc.max_epochs = nc.train.epochs;
    nc.exchange_interval = n.value("exchange_interval", 3);
    nc.collect_window_ms = n.value("collect_window_ms", 200);
    if (n.contains("gate")) {
        nc.gate.mode = gate_mode_from_string(n["gate"].value("mode", "relative"));
        nc.gate.theta = n["gate"].value("theta", 0.8);
    }
    nc.scheme = merge_scheme_from_string(n.value("scheme", "fedavg"));

    if (j.contains("net")) {
        const json& net = j["net"];
        s.net.latency_mean_ms = net.value("latency_mean_ms", 10.0);
        s.net.latency_jitter_ms = net.value("latency_jitter_ms", 0.0);
        s.net.drop_prob = net.value("drop_prob", 0.0);
    }
    if (j.contains("arms")) {
        s.arm_centralized = j["arms"].value("centralized", true);
        s.arm_standalone = j["arms"].value("standalone", true);
        s.arm_swarm = j["arms"].value("swarm", true);
    }
    if (j.contains("adversary_zero_nodes")) {
        s.adversary_zero_nodes = j["adversary_zero_nodes"].get<std::vector<std::uint32_t>>();
    }
    return s;
}

std::string ScenarioSpec::to_json_text() const {
    json j;
    j["version"] = 1;
    j["name"] = name;
    j["dataset"] = {{"n", data_n}, {"d", data_d}, {"class_sep", class_sep},
                    {"positive_frac", positive_frac}};
    j["split"] = {{"train", train_frac}, {"val", val_frac}};
    j["fractions"] = fractions;
    if (class_bias) {
        j["class_bias"] = *class_bias;
    } else {
        j["class_bias"] = nullptr;
    }
    json ds = json::object();
    for (const auto& [k, v] : downsample) ds[std::to_string(k)] = v;
    j["downsample"] = ds;
    j["seeds"] = seeds;
    j["node"] = {{"hidden_dim", node_template.model.hidden_dim},
                 {"epochs", node_template.train.epochs},
                 {"batch_size", node_template.train.batch_size},
                 {"lr_initial", node_template.train.lr_initial},
                 {"lr_min", node_template.train.lr_min},
                 {"patience", node_template.train.patience},
                 {"exchange_interval", node_template.exchange_interval},
                 {"collect_window_ms", node_template.collect_window_ms},
                 {"gate", gate_to_json(node_template.gate)},
                 {"scheme", node_template.scheme == MergeScheme::fedavg ? "fedavg" : "uniform"}};
    j["net"] = {{"latency_mean_ms", net.latency_mean_ms},
                {"latency_jitter_ms", net.latency_jitter_ms},
                {"drop_prob", net.drop_prob}};
    j["arms"] = {{"centralized", arm_centralized},
                 {"standalone", arm_standalone},
                 {"swarm", arm_swarm}};
    j["adversary_zero_nodes"] = adversary_zero_nodes;
    return j.dump(2);
}

std::string RunResult::to_json_text() const {
    json j;
    j["version"] = 1;
    j["scenario"] = scenario;
    j["seed"] = seed;
    j["test_hash"] = test_hash;
    json cells_j = json::array();
    for (const auto& c : cells) cells_j.push_back(cell_to_json(c));
    j["cells"] = std::move(cells_j);
    json rounds_j = json::object();
    for (const auto& [node, reports] : rounds) {
        json arr = json::array();
        for (const auto& r : reports) {
            arr.push_back({{"round", r.round},
                           {"epochs_run", r.epochs_run},
                           {"local_val_auc", r.local_val_auc},
                           {"candidate_val_auc", r.candidate_val_auc},
                           {"gate_accepted", r.gate_accepted},
                           {"peers_heard", r.peers_heard},
                           {"weights_l2_delta", r.weights_l2_delta}});
        }
        rounds_j[std::to_string(node)] = std::move(arr);
    }
    j["rounds"] = std::move(rounds_j);
    return j.dump(2);
}

RunResult RunResult::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw SwarmError(ErrorCode::IoError, "result: cannot open " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SwarmError(ErrorCode::ParseError, std::string("result: ") + e.what());
    }
    RunResult r;
    r.scenario = j.at("scenario").get<std::string>();
    r.seed = j.at("seed").get<std::int64_t>();
    r.test_hash = j.at("test_hash").get<std::string>();
    for (const auto& c : j.at("cells")) r.cells.push_back(cell_from_json(c));
    if (j.contains("rounds")) {
        for (const auto& [k, arr] : j["rounds"].items()) {
            std::vector<RoundReport> reports;
            for (const auto& rr : arr) {
                reports.push_back(RoundReport{rr.at("round").get<std::uint32_t>(),
                                              rr.at("epochs_run").get<std::size_t>(),
                                              rr.at("local_val_auc").get<double>(),
                                              rr.at("candidate_val_auc").get<double>(),
                                              rr.at("gate_accepted").get<bool>(),
                                              rr.at("peers_heard").get<std::size_t>(),
                                              rr.at("weights_l2_delta").get<double>()});
            }
            r.rounds[std::stoi(k)] = std::move(reports);
        }
    }
    return r;
}

namespace {

ResultCell score_model(int node, const std::string& arm, const ModelSpec& spec,
                       const WeightVector& weights, const EpochHistory& history,
                       const Dataset& test) {
    ResultCell cell;
    cell.node = node;
    cell.arm = arm;
    cell.metrics = classification_report(forward(spec, weights, test), test.labels, 0.5);
    if (!history.empty()) {
        const EpochRecord& last = history.back();
        cell.metrics.gap = last.train_auc - last.val_auc;
    }
    std::size_t feat_dim = 0;
    const std::vector<double> acts = hidden_activations(spec, weights, test, feat_dim);
    cell.dbi_on_raw_features = spec.hidden_dim == 0;
    try {
        cell.dbi = davies_bouldin(acts, feat_dim, test.labels);
    } catch (const SwarmError&) {
        cell.dbi = 0.0;  // coincident centroids on a degenerate model
    }
    return cell;
}

ResultCell failed_cell(int node, const std::string& arm, const std::string& error) {
    ResultCell cell;
    cell.node = node;
    cell.arm = arm;
    cell.failed = true;
    cell.error = error;
    return cell;
}

}  // namespace

std::vector<RunResult> run_scenario(const ScenarioSpec& spec, const std::string& out_dir,
                                    std::ostream* log) {
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
    }
    std::vector<RunResult> results;
    for (const std::int64_t seed : spec.seeds) {
        RunResult result;
        result.scenario = spec.name;
        result.seed = seed;

        const Dataset ds =
            synth_dataset(spec.data_n, spec.data_d, spec.class_sep, spec.positive_frac, seed);
        const SplitResult sr = split(ds, spec.train_frac, spec.val_frac, seed * 31 + 1);
        result.test_hash = dataset_hash(sr.test);

        // Per-node shards come from the pooled train+val portion; each node
        // keeps the global val proportion as its local validation split.
        PartitionPlan plan;
        plan.fractions = spec.fractions;
        for (const auto& [node, factor] : spec.downsample) {
            if (node >= plan.fractions.size()) {
                throw SwarmError(ErrorCode::InvalidConfig, "scenario: downsample node out of range");
            }
            plan.fractions[node] *= factor;
        }
        plan.class_bias = spec.class_bias;
        plan.seed = seed * 31 + 2;
        const double local_val_frac = spec.val_frac / (spec.train_frac + spec.val_frac);
        const std::vector<NodeShard> shards =
            partition(concat({sr.train, sr.validation}), plan, local_val_frac);

        NodeConfig base = spec.node_template;
        base.model.input_dim = spec.data_d;
        base.train.seed = seed * 100 + 7;  // shared init across nodes and arms

        if (spec.arm_centralized) {
            try {
                StandaloneOutcome c = run_centralized(sr.train, sr.validation, base);
                result.cells.push_back(
                    score_model(-1, "centralized", base.model, c.weights, c.history, sr.test));
            } catch (const std::exception& e) {
                result.cells.push_back(failed_cell(-1, "centralized", e.what()));
            }
        }
        if (spec.arm_standalone) {
            for (const auto& shard : shards) {
                try {
                    StandaloneOutcome s = run_standalone(base, shard);
                    result.cells.push_back(score_model(shard.node_id, "standalone", base.model,
                                                       s.weights, s.history, sr.test));
                } catch (const std::exception& e) {
                    result.cells.push_back(failed_cell(shard.node_id, "standalone", e.what()));
                }
            }
        }
        if (spec.arm_swarm) {
            try {
                std::vector<NodeConfig> configs;
                for (const auto& shard : shards) {
                    NodeConfig cfg = base;
                    cfg.node_id = static_cast<std::uint32_t>(shard.node_id);
                    cfg.adversary_zero_weights =
                        std::count(spec.adversary_zero_nodes.begin(),
                                   spec.adversary_zero_nodes.end(), cfg.node_id) > 0;
                    configs.push_back(cfg);
                }
                SimNetConfig net = spec.net;
                net.seed = seed * 31 + 3;
                SwarmSimResult sim = run_swarm_sim(configs, shards, net, log);
                for (std::size_t i = 0; i < sim.nodes.size(); ++i) {
                    result.cells.push_back(score_model(shards[i].node_id, "swarm", base.model,
                                                       sim.nodes[i].final_weights,
                                                       sim.nodes[i].history, sr.test));
                    result.rounds[shards[i].node_id] = sim.nodes[i].reports;
                }
            } catch (const std::exception& e) {
                for (const auto& shard : shards) {
                    result.cells.push_back(failed_cell(shard.node_id, "swarm", e.what()));
                }
            }
        }

        if (!out_dir.empty()) {
            const std::string path =
                out_dir + "/" + spec.name + "_seed" + std::to_string(seed) + ".json";
            std::ofstream out(path);
            if (!out) {
                throw SwarmError(ErrorCode::IoError, "scenario: cannot write " + path);
            }
            out << result.to_json_text() << "\n";
        }
        if (log) {
            (*log) << "scenario=" << spec.name << " seed=" << seed << " cells="
                   << result.cells.size() << "\n";
        }
        results.push_back(std::move(result));
    }
    return results;
}

Summary compare_report(const std::vector<RunResult>& results) {
    if (results.empty()) {
        throw SwarmError(ErrorCode::EmptyInput, "compare_report: no results");
    }
    std::map<std::pair<int, std::string>, std::vector<const ResultCell*>> groups;
    std::set<std::pair<int, std::string>> expected;
    std::set<std::int64_t> seeds;
    for (const auto& r : results) {
        seeds.insert(r.seed);
        for (const auto& c : r.cells) {
            expected.insert({c.node, c.arm});
            if (!c.failed) groups[{c.node, c.arm}].push_back(&c);
        }
    }

    Summary s;
    s.single_seed = seeds.size() == 1;
    for (const auto& key : expected) {
        const auto it = groups.find(key);
        const std::size_t have = it == groups.end() ? 0 : it->second.size();
        if (have < seeds.size()) {
            s.missing_cells.push_back("node=" + std::to_string(key.first) + " arm=" + key.second +
                                      " (" + std::to_string(seeds.size() - have) + " seed(s))");
        }
        if (have == 0) continue;
        ArmStats st;
        st.node = key.first;
        st.arm = key.second;
        st.n_seeds = have;
        double sum = 0.0, sum_gap = 0.0, sum_sens = 0.0, sum_spec = 0.0, sum_f1 = 0.0;
        for (const ResultCell* c : it->second) {
            sum += c->metrics.auc;
            sum_gap += c->metrics.gap;
            sum_sens += c->metrics.sensitivity;
            sum_spec += c->metrics.specificity;
            sum_f1 += c->metrics.f1;
        }
        st.auc_mean = sum / have;
        st.gap_mean = sum_gap / have;
        st.sens_mean = sum_sens / have;
        st.spec_mean = sum_spec / have;
        st.f1_mean = sum_f1 / have;
        if (have > 1) {
            double ss = 0.0;
            for (const ResultCell* c : it->second) {
                const double d = c->metrics.auc - st.auc_mean;
                ss += d * d;
            }
            st.auc_std = std::sqrt(ss / (have - 1));  // sample std dev
        }
        s.per_arm.push_back(st);
    }

    std::map<int, double> swarm_mean, standalone_mean;
    std::map<std::string, std::pair<double, std::size_t>> gap_acc;
    for (const auto& st : s.per_arm) {
        if (st.arm == "swarm") swarm_mean[st.node] = st.auc_mean;
        if (st.arm == "standalone") standalone_mean[st.node] = st.auc_mean;
        auto& [g, n] = gap_acc[st.arm];
        g += st.gap_mean;
        ++n;
    }
    for (const auto& [node, m] : swarm_mean) {
        const auto it = standalone_mean.find(node);
        if (it != standalone_mean.end()) s.uplift[node] = m - it->second;
    }
    for (const auto& [arm, acc] : gap_acc) {
        s.mean_gap_by_arm[arm] = acc.first / acc.second;
    }
    return s;
}

std::string render_summary_text(const Summary& s) {
    std::ostringstream out;
    out << "node  arm          seeds  auc(mean±std)       gap      sens    spec    f1\n";
    for (const auto& st : s.per_arm) {
        char line[160];
        std::snprintf(line, sizeof(line), "%4d  %-11s  %5zu  %.4f ± %.4f    %+.4f  %.4f  %.4f  %.4f\n",
                      st.node, st.arm.c_str(), st.n_seeds, st.auc_mean, st.auc_std, st.gap_mean,
                      st.sens_mean, st.spec_mean, st.f1_mean);
        out << line;
    }
    out << "\nuplift (swarm - standalone mean AUC per node):\n";
    for (const auto& [node, u] : s.uplift) {
        out << "  node " << node << ": " << (u >= 0 ? "+" : "") << fmt(u) << "\n";
    }
    out << "\nmean generalization gap by arm:\n";
    for (const auto& [arm, g] : s.mean_gap_by_arm) {
        out << "  " << arm << ": " << fmt(g) << "\n";
    }
    if (s.single_seed) {
        out << "\nnote: single seed; std devs reported as 0\n";
    }
    if (!s.missing_cells.empty()) {
        out << "\nmissing cells:\n";
        for (const auto& m : s.missing_cells) out << "  " << m << "\n";
    }
    return out.str();
}

NodeRunOutcome run_real_node(const std::string& config_path, RunHandle* handle,
                             std::ostream* log) {
    std::ifstream in(config_path);
    if (!in) {
        throw SwarmError(ErrorCode::IoError, "run_real_node: cannot open " + config_path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw SwarmError(ErrorCode::ParseError, std::string("node config: ") + e.what());
    }

    NodeConfig cfg;
    cfg.node_id = j.at("node_id").get<std::uint32_t>();
    cfg.model.hidden_dim = j.contains("model") ? j["model"].value("hidden_dim", 16) : 16;
    if (j.contains("train")) {
        const json& t = j["train"];
        cfg.train.epochs = t.value("epochs", 20);
        cfg.train.batch_size = t.value("batch_size", 32);
        cfg.train.lr_initial = t.value("lr_initial", 1e-4);
        cfg.train.lr_min = t.value("lr_min", 0.0);
        cfg.train.patience = t.value("patience", 5);
        cfg.train.seed = t.value("seed", 0);
    }
    cfg.max_epochs = j.value("max_epochs", cfg.train.epochs);
    cfg.train.epochs = cfg.max_epochs;
    cfg.exchange_interval = j.value("exchange_interval", 3);
    cfg.collect_window_ms = j.value("collect_window_ms", 5000);
    cfg.join_timeout_ms = j.value("join_timeout_ms", 5000);
    if (j.contains("gate")) {
        cfg.gate.mode = gate_mode_from_string(j["gate"].value("mode", "relative"));
        cfg.gate.theta = j["gate"].value("theta", 0.8);
    }
    cfg.scheme = merge_scheme_from_string(j.value("scheme", "fedavg"));
    if (j.contains("checkpoint") && !j["checkpoint"].is_null()) {
        cfg.checkpoint_path = j["checkpoint"].get<std::string>();
    }
    cfg.seed_peers = j.value("seed_peers", std::vector<std::string>{});

    NodeShard shard;
    shard.node_id = static_cast<int>(cfg.node_id);
    shard.train = load_csv(j.at("train_csv").get<std::string>());
    shard.validation = load_csv(j.at("val_csv").get<std::string>());
    cfg.model.input_dim = shard.train.cols;

    std::optional<std::vector<std::uint8_t>> psk;
    if (j.contains("psk_hex") && !j["psk_hex"].is_null()) {
        const std::string hex = j["psk_hex"].get<std::string>();
        if (hex.size() % 2 != 0) {
            throw SwarmError(ErrorCode::InvalidConfig, "psk_hex: odd length");
        }
        std::vector<std::uint8_t> key;
        for (std::size_t i = 0; i < hex.size(); i += 2) {
            key.push_back(static_cast<std::uint8_t>(std::stoul(hex.substr(i, 2), nullptr, 16)));
        }
        psk = std::move(key);
    }

    TcpTransport transport(j.at("bind").get<std::string>(), std::move(psk));
    return run_node(cfg, shard, transport, handle, log);
}

RunResult run_quick_sim(std::size_t nodes, std::int64_t seed) {
    if (nodes < 2) {
        throw SwarmError(ErrorCode::InvalidConfig, "run_quick_sim: need >= 2 nodes");
    }
    ScenarioSpec spec;
    spec.name = "run_sim_" + std::to_string(nodes) + "nodes";
    spec.seeds = {seed};
    spec.fractions.assign(nodes, 1.0 / static_cast<double>(nodes));
    spec.arm_centralized = false;
    spec.arm_standalone = false;
    spec.node_template.train.lr_initial = 0.02;
    return run_scenario(spec, "").front();
}

std::string render_cells_csv(const std::vector<RunResult>& results) {
    std::ostringstream out;
    out << "scenario,seed,node,arm,auc,sens,spec,f1,gap\n";
    for (const auto& r : results) {
        for (const auto& c : r.cells) {
            if (c.failed) continue;
            out << r.scenario << ',' << r.seed << ',' << c.node << ',' << c.arm << ','
                << fmt(c.metrics.auc) << ',' << fmt(c.metrics.sensitivity) << ','
                << fmt(c.metrics.specificity) << ',' << fmt(c.metrics.f1) << ','
                << fmt(c.metrics.gap) << "\n";
        }
    }
    return out.str();
}

}  // namespace swarm
