#include "swarm/transport.hpp"

#include <algorithm>

namespace swarm {

NodeNet::NodeNet(std::uint32_t self_id, Transport& transport)
    : self_id_(self_id), transport_(transport) {
    transport_.set_handler([this](std::span<const std::uint8_t> frame, const std::string& from) {
        handle_frame(frame, from);
    });
}

void NodeNet::touch_peer(std::uint32_t id, const std::string& addr, std::uint64_t seen) {
    if (id == self_id_) return;
    auto it = table_.entries.find(id);
    if (it == table_.entries.end()) {
        table_.entries[id] = PeerInfo{addr, seen, 0};
    } else if (seen >= it->second.last_seen_ms) {
        it->second.address = addr;
        it->second.last_seen_ms = seen;
        it->second.consecutive_timeouts = 0;
    }
}

SwarmMessage NodeNet::make_peer_list() const {
    PeerListPayload pl;
    for (const auto& [id, info] : table_.entries) {
        pl.peers.push_back(PeerEntry{id, info.last_seen_ms, info.address});
    }
    pl.peers.push_back(PeerEntry{self_id_, transport_.now_ms(), transport_.local_address()});
    return SwarmMessage{MessageKind::PEER_LIST, self_id_, std::move(pl)};
}

void NodeNet::handle_frame(std::span<const std::uint8_t> frame, const std::string& from) {
    auto result = decode(frame);
    if (std::holds_alternative<DecodeError>(result)) {
        return;  // malformed traffic is dropped, never fatal
    }
    const SwarmMessage& msg = std::get<SwarmMessage>(result);

    std::lock_guard<std::mutex> lock(mu_);
    const std::uint64_t now = transport_.now_ms();
    switch (msg.kind) {
        case MessageKind::HELLO: {
            const auto& h = std::get<HelloPayload>(msg.payload);
            const std::string addr = h.address.value_or(from);
            if (msg.sender_id == self_id_) {
                if (addr != transport_.local_address()) id_collision_ = true;
                return;
            }
            auto it = table_.entries.find(msg.sender_id);
            if (it != table_.entries.end() && it->second.address != addr) {
                // Same id announcing from a different address.
                id_collision_ = true;
                return;
            }
            touch_peer(msg.sender_id, addr, now);
            transport_.send(addr, encode(make_peer_list()));
            break;
        }
        case MessageKind::PEER_LIST: {
            const auto& pl = std::get<PeerListPayload>(msg.payload);
            for (const auto& e : pl.peers) {
                touch_peer(e.node_id, e.address, e.last_seen_ms);
            }
            pending_peer_lists_.push_back(pl);
            break;
        }
        case MessageKind::WEIGHTS: {
            const auto& w = std::get<WeightsPayload>(msg.payload);
            // Ack to the sender's advertised address when known.
            auto it = table_.entries.find(msg.sender_id);
            const std::string dest = it != table_.entries.end() ? it->second.address : from;
            transport_.send(dest, encode(SwarmMessage{MessageKind::ACK, self_id_,
                                                      AckPayload{w.round}}));
            if (it != table_.entries.end()) it->second.last_seen_ms = now;
            if (w.round < current_round_) {
                ++stale_dropped_;
                return;
            }
            if (w.values.empty() || w.sample_count < 1) return;  // nothing mergeable
            try {
                ModelUpdate u{WeightVector(w.values, ShapeSpec{{{w.values.size(), 1}}}),
                              w.sample_count, msg.sender_id, w.round, w.epoch};
                buffered_[w.round].push_back(std::move(u));
            } catch (const SwarmError&) {
                // poisoned update (non-finite values), dropped at the door
            }
            break;
        }
        case MessageKind::ACK: {
            const auto& a = std::get<AckPayload>(msg.payload);
            if (a.round == broadcast_round_) {
                auto it = pending_acks_.find(msg.sender_id);
                if (it != pending_acks_.end()) it->second = PeerSendStatus::Acked;
            }
            break;
        }
        case MessageKind::LEAVE:
            table_.entries.erase(msg.sender_id);
            break;
    }
}

void NodeNet::join(const std::vector<std::string>& seed_peers, std::uint64_t timeout_ms) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        pending_peer_lists_.clear();
        id_collision_ = false;
    }
    if (seed_peers.empty()) return;  // first node bootstraps an empty table

    const SwarmMessage hello{MessageKind::HELLO, self_id_,
                             HelloPayload{transport_.local_address()}};
    const auto frame = encode(hello);
    for (const auto& addr : seed_peers) {
        transport_.send(addr, frame);
    }

    // Retry the HELLOs a few times inside the window: a lossy link may eat
    // either the HELLO or the PEER_LIST reply.
    const std::uint64_t retry_every = std::max<std::uint64_t>(20, timeout_ms / 5);
    const std::uint64_t deadline = transport_.now_ms() + timeout_ms;
    std::uint64_t next_retry = transport_.now_ms() + retry_every;
    while (transport_.now_ms() < deadline) {
        transport_.wait_ms(std::min<std::uint64_t>(10, deadline - transport_.now_ms()));
        {
            std::lock_guard<std::mutex> lock(mu_);
            if (id_collision_) {
                throw SwarmError(ErrorCode::IdCollision,
                                 "join: id " + std::to_string(self_id_) + " already present");
            }
            if (!pending_peer_lists_.empty()) return;
        }
        if (transport_.now_ms() >= next_retry) {
            for (const auto& addr : seed_peers) {
                transport_.send(addr, frame);
            }
            next_retry = transport_.now_ms() + retry_every;
        }
    }
    std::lock_guard<std::mutex> lock(mu_);
    if (pending_peer_lists_.empty()) {
        throw SwarmError(ErrorCode::NoPeersReachable, "join: no seed peer answered");
    }
}

void NodeNet::broadcast_weights(const ModelUpdate& update) {
    std::lock_guard<std::mutex> lock(mu_);
    broadcast_round_ = update.round;
    pending_acks_.clear();
    WeightsPayload w;
    w.round = update.round;
    w.epoch = update.epoch;
    w.sample_count = update.sample_count;
    w.values = update.weights.values();
    const auto frame = encode(SwarmMessage{MessageKind::WEIGHTS, self_id_, std::move(w)});
    for (const auto& [id, info] : table_.entries) {
        pending_acks_[id] = PeerSendStatus::Timeout;
        transport_.send(info.address, frame);
    }
}

std::vector<ModelUpdate> NodeNet::collect_updates(std::uint32_t round,
                                                  std::uint64_t window_ms,
                                                  const ShapeSpec& shape) {
    {
        std::lock_guard<std::mutex> lock(mu_);
        current_round_ = round;
        // Drop anything older than the round we are now in.
        for (auto it = buffered_.begin(); it != buffered_.end();) {
            if (it->first < round) {
                stale_dropped_ += it->second.size();
                it = buffered_.erase(it);
            } else {
                ++it;
            }
        }
    }

    const std::uint64_t deadline = transport_.now_ms() + window_ms;
    while (transport_.now_ms() < deadline) {
        transport_.wait_ms(std::min<std::uint64_t>(10, deadline - transport_.now_ms()));
    }

    std::lock_guard<std::mutex> lock(mu_);
    // Finalize the delivery report and peer liveness for this round.
    last_report_.per_peer.clear();
    for (const auto& [id, status] : pending_acks_) {
        last_report_.per_peer[id] = status;
        auto it = table_.entries.find(id);
        if (it == table_.entries.end()) continue;
        if (status == PeerSendStatus::Timeout) {
            if (++it->second.consecutive_timeouts >= kEvictAfterTimeouts) {
                table_.entries.erase(it);
            }
        } else {
            it->second.consecutive_timeouts = 0;
        }
    }
    pending_acks_.clear();

    std::vector<ModelUpdate> out;
    auto it = buffered_.find(round);
    if (it != buffered_.end()) {
        for (auto& u : it->second) {
            if (u.weights.size() == shape.total_len()) {
                out.push_back(ModelUpdate{WeightVector(u.weights.values(), shape),
                                          u.sample_count, u.node_id, u.round, u.epoch});
            } else {
                out.push_back(std::move(u));  // shape mismatch resolved by merge_round
            }
        }
        buffered_.erase(it);
    }
    return out;
}

void NodeNet::leave() {
    std::lock_guard<std::mutex> lock(mu_);
    const auto frame = encode(SwarmMessage{MessageKind::LEAVE, self_id_, LeavePayload{}});
    for (const auto& [id, info] : table_.entries) {
        transport_.send(info.address, frame);
    }
}

PeerTable NodeNet::table_snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return table_;
}

DeliveryReport NodeNet::last_report() const {
    std::lock_guard<std::mutex> lock(mu_);
    return last_report_;
}

}  // namespace swarm
