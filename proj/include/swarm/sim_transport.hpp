#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "swarm/transport.hpp"

namespace swarm {

struct SimNetConfig {
    double latency_mean_ms = 10.0;
    double latency_jitter_ms = 0.0;
    double drop_prob = 0.0;  // in [0,1)
    std::vector<std::set<std::uint32_t>> partitions;
    std::int64_t seed = 0;

    void validate() const;
};

class SimEndpoint;

// Deterministic single-threaded network simulator on a virtual clock.
// Endpoint addresses are "sim:<node_id>". All endpoints share the clock;
// advancing it delivers due frames in (time, sequence) order by invoking
// the receiving endpoint's handler.
class SimNet {
public:
    explicit SimNet(SimNetConfig cfg);
    ~SimNet();

    SimEndpoint& create_endpoint(std::uint32_t node_id);

    std::uint64_t now_ms() const { return clock_ms_; }
    void advance_ms(std::uint64_t ms);

    // Full delivery transcript: one line per delivered frame.
    const std::vector<std::string>& transcript() const { return transcript_; }
    std::size_t dropped_count() const { return dropped_; }

private:
    friend class SimEndpoint;

    bool crosses_partition(std::uint32_t a, std::uint32_t b) const;
    bool send_frame(std::uint32_t from, const std::string& to_addr,
                    std::span<const std::uint8_t> frame);

    struct Pending {
        std::uint32_t to;
        std::uint32_t from;
        std::vector<std::uint8_t> frame;
    };

    SimNetConfig cfg_;
    std::mt19937_64 rng_;
    std::uint64_t clock_ms_ = 0;
    std::uint64_t seq_ = 0;
    std::multimap<std::pair<std::uint64_t, std::uint64_t>, Pending> queue_;  // (time, seq)
    std::map<std::uint32_t, std::unique_ptr<SimEndpoint>> endpoints_;
    std::vector<std::string> transcript_;
    std::size_t dropped_ = 0;
};

class SimEndpoint : public Transport {
public:
    SimEndpoint(SimNet& net, std::uint32_t node_id);

    void set_handler(Handler h) override { handler_ = std::move(h); }
    const std::string& local_address() const override { return address_; }
    bool send(const std::string& addr, std::span<const std::uint8_t> frame) override;
    std::uint64_t now_ms() override { return net_.now_ms(); }
    void wait_ms(std::uint64_t ms) override { net_.advance_ms(ms); }

private:
    friend class SimNet;

    SimNet& net_;
    std::uint32_t node_id_;
    std::string address_;
    Handler handler_;
};

}  // namespace swarm
