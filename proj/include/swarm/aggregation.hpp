#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "swarm/data.hpp"
#include "swarm/params.hpp"
#include "swarm/trainer.hpp"

namespace swarm {

struct ModelUpdate {
    WeightVector weights;
    std::uint64_t sample_count = 1;  // n_k
    std::uint32_t node_id = 0;
    std::uint32_t round = 0;
    std::uint32_t epoch = 0;
};

enum class GateMode { relative, absolute, off };

struct GatePolicy {
    GateMode mode = GateMode::relative;
    double theta = 0.8;  // in (0,1]

    void validate() const {
        if (!(theta > 0.0) || theta > 1.0) {
            throw SwarmError(ErrorCode::InvalidConfig, "GatePolicy: theta outside (0,1]");
        }
    }
};

enum class MergeScheme { fedavg, uniform };

// Sample-count-weighted average: w = Σ n_k·w_k / Σ n_k.
WeightVector fedavg(const std::vector<ModelUpdate>& updates);

WeightVector uniform_average(const std::vector<ModelUpdate>& updates);

bool gate_accepts(double candidate_val_auc, double incumbent_val_auc,
                  const GatePolicy& policy);

struct MergeOutcome {
    WeightVector weights;  // candidate if accepted, local otherwise
    bool accepted = false;
    double local_val_auc = 0.0;
    double candidate_val_auc = 0.0;
    std::size_t peers_used = 0;
    std::size_t peers_discarded = 0;  // shape mismatches
};

// Averages {local} ∪ peers under `scheme`, scores candidate and local on the
// validation split, applies the gate. Mismatched peer shapes are discarded,
// never fatal.
MergeOutcome merge_round(const ModelUpdate& local, const std::vector<ModelUpdate>& peers,
                         const Dataset& shard_val, const GatePolicy& policy,
                         MergeScheme scheme, const ModelSpec& spec);

GateMode gate_mode_from_string(const std::string& s);
MergeScheme merge_scheme_from_string(const std::string& s);

}  // namespace swarm
