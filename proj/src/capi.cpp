#include "swarm/swarm.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <fstream>
#include <future>
#include <iostream>
#include <string>

#include <json.hpp>

#include "swarm/data.hpp"
#include "swarm/node.hpp"
#include "swarm/scenario.hpp"

namespace {

thread_local std::string g_last_error;

swarm_status fail(swarm_status code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

swarm_status classify(const swarm::SwarmError& e) {
    using swarm::ErrorCode;
    switch (e.code()) {
        case ErrorCode::ShapeMismatch:
        case ErrorCode::EmptyInput:
        case ErrorCode::NonFinite:
        case ErrorCode::InvalidFraction:
        case ErrorCode::InvalidConfig:
        case ErrorCode::RangeError:
            return SWARM_ERR_INVALID_ARG;
        default:
            return SWARM_ERR_RUNTIME;
    }
}

template <typename Fn>
swarm_status guarded(Fn&& fn) {
    try {
        fn();
        return SWARM_OK;
    } catch (const swarm::SwarmError& e) {
        return fail(classify(e), std::string(swarm::error_code_name(e.code())) + ": " + e.what());
    } catch (const std::exception& e) {
        return fail(SWARM_ERR_RUNTIME, e.what());
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

}  // namespace

struct swarm_dataset {
    swarm::Dataset ds;
};

struct swarm_node {
    swarm::RunHandle handle;
    std::future<swarm::NodeRunOutcome> result;
};

extern "C" {

const char* swarm_last_error(void) { return g_last_error.c_str(); }

swarm_status swarm_dataset_synth(uint64_t n, uint64_t d, double class_sep,
                                 double positive_frac, int64_t seed, swarm_dataset** out) {
    if (!out) return fail(SWARM_ERR_INVALID_ARG, "out is NULL");
    return guarded([&] {
        *out = new swarm_dataset{swarm::synth_dataset(n, d, class_sep, positive_frac, seed)};
    });
}

swarm_status swarm_dataset_load_csv(const char* path, swarm_dataset** out) {
    if (!path || !out) return fail(SWARM_ERR_INVALID_ARG, "path/out is NULL");
    return guarded([&] { *out = new swarm_dataset{swarm::load_csv(path)}; });
}

swarm_status swarm_dataset_write_csv(const swarm_dataset* ds, const char* path) {
    if (!ds || !path) return fail(SWARM_ERR_INVALID_ARG, "ds/path is NULL");
    return guarded([&] { swarm::write_csv(ds->ds, path); });
}

uint64_t swarm_dataset_rows(const swarm_dataset* ds) { return ds ? ds->ds.rows() : 0; }
uint64_t swarm_dataset_cols(const swarm_dataset* ds) { return ds ? ds->ds.cols : 0; }
void swarm_dataset_free(swarm_dataset* ds) { delete ds; }

swarm_status swarm_partition_csv(const swarm_dataset* ds, const double* fractions,
                                 uint64_t n_nodes, const double* class_bias, int64_t seed,
                                 double val_frac, const char* out_dir) {
    if (!ds || !fractions || !out_dir || n_nodes == 0) {
        return fail(SWARM_ERR_INVALID_ARG, "ds/fractions/out_dir is NULL or n_nodes == 0");
    }
    return guarded([&] {
        swarm::PartitionPlan plan;
        plan.fractions.assign(fractions, fractions + n_nodes);
        if (class_bias) {
            plan.class_bias = std::vector<double>(class_bias, class_bias + n_nodes);
        }
        plan.seed = seed;
        const auto shards = swarm::partition(ds->ds, plan, val_frac);
        std::filesystem::create_directories(out_dir);
        for (const auto& shard : shards) {
            const std::string base =
                std::string(out_dir) + "/node" + std::to_string(shard.node_id);
            swarm::write_csv(shard.train, base + "_train.csv");
            swarm::write_csv(shard.validation, base + "_val.csv");
        }
    });
}

swarm_status swarm_run_scenario(const char* spec_path, const char* out_dir, int verbose) {
    if (!spec_path || !out_dir) return fail(SWARM_ERR_INVALID_ARG, "spec_path/out_dir is NULL");
    return guarded([&] {
        const auto spec = swarm::ScenarioSpec::from_json_file(spec_path);
        swarm::run_scenario(spec, out_dir, verbose ? &std::cerr : nullptr);
    });
}

swarm_status swarm_run_sim(uint32_t nodes, int64_t seed, const char* out_dir) {
    if (!out_dir) return fail(SWARM_ERR_INVALID_ARG, "out_dir is NULL");
    return guarded([&] {
        const swarm::RunResult result = swarm::run_quick_sim(nodes, seed);
        std::filesystem::create_directories(out_dir);
        const std::string path = std::string(out_dir) + "/" + result.scenario + "_seed" +
                                 std::to_string(result.seed) + ".json";
        std::ofstream out(path);
        if (!out) {
            throw swarm::SwarmError(swarm::ErrorCode::IoError, "cannot write " + path);
        }
        out << result.to_json_text() << "\n";
    });
}

swarm_status swarm_report(const char* results_dir, const char* format, char** out) {
    if (!results_dir || !format || !out) {
        return fail(SWARM_ERR_INVALID_ARG, "results_dir/format/out is NULL");
    }
    const std::string fmt_s = format;
    if (fmt_s != "text" && fmt_s != "csv") {
        return fail(SWARM_ERR_INVALID_ARG, "format must be \"text\" or \"csv\"");
    }
    return guarded([&] {
        std::vector<swarm::RunResult> results;
        std::vector<std::filesystem::path> paths;
        for (const auto& entry : std::filesystem::directory_iterator(results_dir)) {
            if (entry.path().extension() == ".json") paths.push_back(entry.path());
        }
        std::sort(paths.begin(), paths.end());
        for (const auto& p : paths) {
            results.push_back(swarm::RunResult::from_json_file(p.string()));
        }
        if (results.empty()) {
            throw swarm::SwarmError(swarm::ErrorCode::EmptyInput,
                                    std::string("no result files in ") + results_dir);
        }
        if (fmt_s == "csv") {
            *out = dup_string(swarm::render_cells_csv(results));
        } else {
            *out = dup_string(swarm::render_summary_text(swarm::compare_report(results)));
        }
    });
}

void swarm_text_free(char* text) { std::free(text); }

swarm_status swarm_node_start(const char* config_path, int verbose, swarm_node** out) {
    if (!config_path || !out) return fail(SWARM_ERR_INVALID_ARG, "config_path/out is NULL");
    return guarded([&] {
        auto node = std::make_unique<swarm_node>();
        const std::string path = config_path;
        swarm::RunHandle* handle = &node->handle;
        std::ostream* log = verbose ? &std::cerr : nullptr;
        node->result = std::async(std::launch::async, [path, handle, log] {
            return swarm::run_real_node(path, handle, log);
        });
        *out = node.release();
    });
}

swarm_status swarm_node_signal_stop(swarm_node* node) {
    if (!node) return fail(SWARM_ERR_INVALID_ARG, "node is NULL");
    return guarded([&] { swarm::signal_stop(node->handle); });
}

swarm_status swarm_node_wait(swarm_node* node, char** summary) {
    if (!node) return fail(SWARM_ERR_INVALID_ARG, "node is NULL");
    return guarded([&] {
        const swarm::NodeRunOutcome outcome = node->result.get();
        if (summary) {
            nlohmann::json j;
            j["stop_reason"] = swarm::stop_reason_name(outcome.reason);
            j["epochs"] = outcome.history.size();
            nlohmann::json rounds = nlohmann::json::array();
            for (const auto& r : outcome.reports) {
                rounds.push_back({{"round", r.round},
                                  {"epochs_run", r.epochs_run},
                                  {"local_val_auc", r.local_val_auc},
                                  {"candidate_val_auc", r.candidate_val_auc},
                                  {"gate_accepted", r.gate_accepted},
                                  {"peers_heard", r.peers_heard}});
            }
            j["rounds"] = std::move(rounds);
            *summary = dup_string(j.dump(2));
        }
    });
}

void swarm_node_free(swarm_node* node) {
    if (!node) return;
    if (node->result.valid()) {
        if (!node->handle.finished()) {
            try {
                node->handle.request_stop();
            } catch (const swarm::SwarmError&) {
            }
        }
        try {
            node->result.wait();
        } catch (...) {
        }
    }
    delete node;
}

}  // extern "C"
