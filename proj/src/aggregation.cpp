#include "swarm/aggregation.hpp"

#include "swarm/metrics.hpp"

namespace swarm {

WeightVector fedavg(const std::vector<ModelUpdate>& updates) {
    if (updates.empty()) {
        throw SwarmError(ErrorCode::EmptyInput, "fedavg: no updates");
    }
    std::vector<WeightVector> vecs;
    std::vector<double> coeffs;
    vecs.reserve(updates.size());
    coeffs.reserve(updates.size());
    for (const auto& u : updates) {
        if (u.sample_count < 1) {
            throw SwarmError(ErrorCode::InvalidConfig, "fedavg: sample_count must be >= 1");
        }
        vecs.push_back(u.weights);
        coeffs.push_back(static_cast<double>(u.sample_count));
    }
    return linear_combine(vecs, coeffs);
}

WeightVector uniform_average(const std::vector<ModelUpdate>& updates) {
    if (updates.empty()) {
        throw SwarmError(ErrorCode::EmptyInput, "uniform_average: no updates");
    }
    std::vector<WeightVector> vecs;
    vecs.reserve(updates.size());
    for (const auto& u : updates) vecs.push_back(u.weights);
    return linear_combine(vecs, std::vector<double>(updates.size(), 1.0));
}

bool gate_accepts(double candidate_val_auc, double incumbent_val_auc,
                  const GatePolicy& policy) {
    policy.validate();
    switch (policy.mode) {
        case GateMode::relative:
            return candidate_val_auc >= policy.theta * incumbent_val_auc;
        case GateMode::absolute:
            return candidate_val_auc >= policy.theta;
        case GateMode::off:
            return true;
    }
    return true;
}

MergeOutcome merge_round(const ModelUpdate& local, const std::vector<ModelUpdate>& peers,
                         const Dataset& shard_val, const GatePolicy& policy,
                         MergeScheme scheme, const ModelSpec& spec) {
    std::vector<ModelUpdate> usable{local};
    std::size_t discarded = 0;
    for (const auto& p : peers) {
        if (p.weights.shape() == local.weights.shape()) {
            usable.push_back(p);
        } else {
            ++discarded;
        }
    }

    WeightVector candidate =
        scheme == MergeScheme::fedavg ? fedavg(usable) : uniform_average(usable);
    const double local_auc =
        roc_auc(forward(spec, local.weights, shard_val), shard_val.labels);
    const double cand_auc =
        roc_auc(forward(spec, candidate, shard_val), shard_val.labels);
    const bool accepted = gate_accepts(cand_auc, local_auc, policy);
    return MergeOutcome{accepted ? std::move(candidate) : local.weights,
                        accepted,
                        local_auc,
                        cand_auc,
                        usable.size() - 1,
                        discarded};
}

GateMode gate_mode_from_string(const std::string& s) {
    if (s == "relative") return GateMode::relative;
    if (s == "absolute") return GateMode::absolute;
    if (s == "off") return GateMode::off;
    throw SwarmError(ErrorCode::InvalidConfig, "unknown gate mode: " + s);
}

MergeScheme merge_scheme_from_string(const std::string& s) {
    if (s == "fedavg") return MergeScheme::fedavg;
    if (s == "uniform") return MergeScheme::uniform;
    throw SwarmError(ErrorCode::InvalidConfig, "unknown merge scheme: " + s);
}

}  // namespace swarm
