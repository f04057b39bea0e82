#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "swarm/aggregation.hpp"
#include "swarm/wire.hpp"

namespace swarm {

// One endpoint of a message transport. Frames are delivered by invoking the
// registered handler, either from a virtual-clock advance (sim) or from a
// reader thread (TCP).
class Transport {
public:
    virtual ~Transport() = default;

    using Handler =
        std::function<void(std::span<const std::uint8_t> frame, const std::string& from)>;

    virtual void set_handler(Handler h) = 0;
    virtual const std::string& local_address() const = 0;

    // Fire-and-forget; false when the destination is known-unreachable.
    virtual bool send(const std::string& addr, std::span<const std::uint8_t> frame) = 0;

    virtual std::uint64_t now_ms() = 0;

    // Let time pass: the sim advances its virtual clock delivering frames;
    // TCP sleeps while reader threads deliver.
    virtual void wait_ms(std::uint64_t ms) = 0;
};

struct PeerInfo {
    std::string address;
    std::uint64_t last_seen_ms = 0;
    int consecutive_timeouts = 0;
};

struct PeerTable {
    std::map<std::uint32_t, PeerInfo> entries;
};

enum class PeerSendStatus { Acked, Timeout };

struct DeliveryReport {
    std::map<std::uint32_t, PeerSendStatus> per_peer;
};

// Membership and weight-exchange logic for one node on top of a Transport.
// Thread-safe against the transport's delivery thread.
class NodeNet {
public:
    NodeNet(std::uint32_t self_id, Transport& transport);

    // Sends HELLO to each seed and waits for PEER_LIST replies. An empty
    // seed list bootstraps a new swarm. Throws NoPeersReachable when every
    // seed stays silent, IdCollision when a HELLO echoes our own id from a
    // different address.
    void join(const std::vector<std::string>& seed_peers, std::uint64_t timeout_ms);

    // One WEIGHTS frame per live peer; acks are gathered during the
    // following collect window and reported by last_report().
    void broadcast_weights(const ModelUpdate& update);

    // Pumps the transport until the window closes; returns updates for
    // `round`. Later rounds stay buffered, earlier rounds are dropped.
    std::vector<ModelUpdate> collect_updates(std::uint32_t round, std::uint64_t window_ms,
                                             const ShapeSpec& shape);

    void leave();

    PeerTable table_snapshot() const;
    DeliveryReport last_report() const;
    std::size_t stale_dropped() const { return stale_dropped_; }

    // Direct frame entry point (also the transport handler).
    void handle_frame(std::span<const std::uint8_t> frame, const std::string& from);

    std::uint32_t self_id() const { return self_id_; }

    // Peers evicted after this many consecutive broadcast timeouts.
    static constexpr int kEvictAfterTimeouts = 3;

private:
    void touch_peer(std::uint32_t id, const std::string& addr, std::uint64_t seen);
    SwarmMessage make_peer_list() const;

    std::uint32_t self_id_;
    Transport& transport_;
    mutable std::mutex mu_;
    PeerTable table_;
    std::vector<PeerListPayload> pending_peer_lists_;
    bool id_collision_ = false;
    std::map<std::uint32_t, std::vector<ModelUpdate>> buffered_;  // by round
    std::map<std::uint32_t, PeerSendStatus> pending_acks_;
    std::uint32_t broadcast_round_ = 0;
    std::size_t stale_dropped_ = 0;
    std::uint32_t current_round_ = 0;
    DeliveryReport last_report_;
};

}  // namespace swarm
