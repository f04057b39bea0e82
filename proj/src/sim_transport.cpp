#include "swarm/sim_transport.hpp"

#include <algorithm>
#include <cmath>

namespace swarm {

void SimNetConfig::validate() const {
    if (drop_prob < 0.0 || drop_prob >= 1.0) {
        throw SwarmError(ErrorCode::InvalidConfig, "SimNetConfig: drop_prob outside [0,1)");
    }
    if (latency_mean_ms < 0.0 || latency_jitter_ms < 0.0) {
        throw SwarmError(ErrorCode::InvalidConfig, "SimNetConfig: negative latency");
    }
    std::set<std::uint32_t> seen;
    for (const auto& part : partitions) {
        for (std::uint32_t id : part) {
            if (!seen.insert(id).second) {
                throw SwarmError(ErrorCode::InvalidConfig,
                                 "SimNetConfig: partitions must be disjoint");
            }
        }
    }
}

SimNet::SimNet(SimNetConfig cfg)
    : cfg_(std::move(cfg)), rng_(static_cast<std::uint64_t>(cfg_.seed)) {
    cfg_.validate();
}

SimNet::~SimNet() = default;

SimEndpoint& SimNet::create_endpoint(std::uint32_t node_id) {
    auto [it, inserted] = endpoints_.emplace(node_id, nullptr);
    if (!inserted) {
        throw SwarmError(ErrorCode::IdCollision,
                         "SimNet: endpoint id " + std::to_string(node_id) + " exists");
    }
    it->second = std::make_unique<SimEndpoint>(*this, node_id);
    return *it->second;
}

bool SimNet::crosses_partition(std::uint32_t a, std::uint32_t b) const {
    if (cfg_.partitions.empty()) return false;
    auto group_of = [&](std::uint32_t id) -> int {
        for (std::size_t g = 0; g < cfg_.partitions.size(); ++g) {
            if (cfg_.partitions[g].count(id)) return static_cast<int>(g);
        }
        return -1;
    };
    return group_of(a) != group_of(b);
}

bool SimNet::send_frame(std::uint32_t from, const std::string& to_addr,
                        std::span<const std::uint8_t> frame) {
    if (to_addr.rfind("sim:", 0) != 0) return false;
    std::uint32_t to;
    try {
        to = static_cast<std::uint32_t>(std::stoul(to_addr.substr(4)));
    } catch (const std::exception&) {
        return false;
    }
    if (!endpoints_.count(to)) return false;
    if (crosses_partition(from, to)) {
        ++dropped_;
        return false;
    }
    const double roll = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    if (roll < cfg_.drop_prob) {
        ++dropped_;
        return true;  // lost in flight, sender cannot tell
    }
    double latency = cfg_.latency_mean_ms;
    if (cfg_.latency_jitter_ms > 0.0) {
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        latency += (2.0 * u - 1.0) * cfg_.latency_jitter_ms;
        latency = std::max(0.0, latency);
    }
    const std::uint64_t at = clock_ms_ + static_cast<std::uint64_t>(std::llround(latency));
    queue_.emplace(std::make_pair(at, seq_++),
                   Pending{to, from, std::vector<std::uint8_t>(frame.begin(), frame.end())});
    return true;
}

void SimNet::advance_ms(std::uint64_t ms) {
    const std::uint64_t target = clock_ms_ + ms;
    while (!queue_.empty() && queue_.begin()->first.first <= target) {
        auto it = queue_.begin();
        clock_ms_ = std::max(clock_ms_, it->first.first);
        Pending p = std::move(it->second);
        queue_.erase(it);
        transcript_.push_back("t=" + std::to_string(clock_ms_) + " " +
                              std::to_string(p.from) + "->" + std::to_string(p.to) + " " +
                              std::to_string(p.frame.size()) + "B kind=" +
                              std::to_string(p.frame.size() > 5 ? p.frame[5] : 0));
        auto ep = endpoints_.find(p.to);
        if (ep != endpoints_.end() && ep->second->handler_) {
            ep->second->handler_(p.frame, "sim:" + std::to_string(p.from));
        }
    }
    clock_ms_ = target;
}

SimEndpoint::SimEndpoint(SimNet& net, std::uint32_t node_id)
    : net_(net), node_id_(node_id), address_("sim:" + std::to_string(node_id)) {}

bool SimEndpoint::send(const std::string& addr, std::span<const std::uint8_t> frame) {
    return net_.send_frame(node_id_, addr, frame);
}

}  // namespace swarm
