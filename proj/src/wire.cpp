#include "swarm/wire.hpp"

#include <cstring>

#include "swarm/error.hpp"

namespace swarm {

namespace {

const char kMagic[4] = {'S', 'W', 'R', 'M'};

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(v & 0xff);
    out.push_back((v >> 8) & 0xff);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back((v >> (8 * i)) & 0xff);
}

void put_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}

// Little-endian cursor that tracks underflow instead of throwing.
struct Cursor {
    std::span<const std::uint8_t> data;
    std::size_t pos = 0;
    bool underflow = false;

    bool take(std::size_t n) {
        if (pos + n > data.size()) {
            underflow = true;
            return false;
        }
        return true;
    }
    std::uint16_t u16() {
        if (!take(2)) return 0;
        std::uint16_t v = data[pos] | (std::uint16_t(data[pos + 1]) << 8);
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        if (!take(4)) return 0;
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(data[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    std::uint64_t u64() {
        if (!take(8)) return 0;
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(data[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    std::string str(std::size_t n) {
        if (!take(n)) return {};
        std::string s(reinterpret_cast<const char*>(data.data() + pos), n);
        pos += n;
        return s;
    }
};

std::vector<std::uint8_t> encode_payload(const SwarmMessage& msg) {
    std::vector<std::uint8_t> p;
    switch (msg.kind) {
        case MessageKind::HELLO: {
            const auto& h = std::get<HelloPayload>(msg.payload);
            if (h.address) {
                put_u16(p, static_cast<std::uint16_t>(h.address->size()));
                p.insert(p.end(), h.address->begin(), h.address->end());
            }
            break;
        }
        case MessageKind::PEER_LIST: {
            const auto& pl = std::get<PeerListPayload>(msg.payload);
            put_u32(p, static_cast<std::uint32_t>(pl.peers.size()));
            for (const auto& e : pl.peers) {
                put_u32(p, e.node_id);
                put_u64(p, e.last_seen_ms);
                put_u16(p, static_cast<std::uint16_t>(e.address.size()));
                p.insert(p.end(), e.address.begin(), e.address.end());
            }
            break;
        }
        case MessageKind::WEIGHTS: {
            const auto& w = std::get<WeightsPayload>(msg.payload);
            put_u32(p, w.round);
            put_u32(p, w.epoch);
            put_u64(p, w.sample_count);
            put_u64(p, static_cast<std::uint64_t>(w.values.size()));
            for (double v : w.values) put_f64(p, v);
            break;
        }
        case MessageKind::ACK:
            put_u32(p, std::get<AckPayload>(msg.payload).round);
            break;
        case MessageKind::LEAVE:
            break;
    }
    return p;
}

}  // namespace

const char* decode_error_name(DecodeErrorKind k) {
    switch (k) {
        case DecodeErrorKind::BadMagic: return "BadMagic";
        case DecodeErrorKind::BadVersion: return "BadVersion";
        case DecodeErrorKind::UnknownKind: return "UnknownKind";
        case DecodeErrorKind::TruncatedFrame: return "TruncatedFrame";
        case DecodeErrorKind::LengthMismatch: return "LengthMismatch";
    }
    return "Unknown";
}

std::vector<std::uint8_t> encode(const SwarmMessage& msg) {
    std::vector<std::uint8_t> payload = encode_payload(msg);
    if (payload.size() > kMaxPayload) {
        throw SwarmError(ErrorCode::OversizePayload, "encode: payload exceeds 2^31-1 bytes");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kHeaderLen + payload.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kWireVersion);
    out.push_back(static_cast<std::uint8_t>(msg.kind));
    put_u32(out, msg.sender_id);
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

std::variant<SwarmMessage, DecodeError> decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        return DecodeError{DecodeErrorKind::BadMagic, "magic != \"SWRM\""};
    }
    if (bytes.size() < kHeaderLen) {
        return DecodeError{DecodeErrorKind::TruncatedFrame, "header needs 14 bytes"};
    }
    if (bytes[4] != kWireVersion) {
        return DecodeError{DecodeErrorKind::BadVersion,
                           "version " + std::to_string(bytes[4])};
    }
    const std::uint8_t kind_byte = bytes[5];
    if (kind_byte < 0x01 || kind_byte > 0x05) {
        return DecodeError{DecodeErrorKind::UnknownKind,
                           "kind " + std::to_string(kind_byte)};
    }
    Cursor hdr{bytes.subspan(6)};
    const std::uint32_t sender_id = hdr.u32();
    const std::uint32_t payload_len = hdr.u32();
    if (bytes.size() < kHeaderLen + payload_len) {
        return DecodeError{DecodeErrorKind::TruncatedFrame,
                           "payload_len " + std::to_string(payload_len) + " but " +
                               std::to_string(bytes.size() - kHeaderLen) + " bytes follow"};
    }
    if (bytes.size() > kHeaderLen + payload_len) {
        return DecodeError{DecodeErrorKind::LengthMismatch,
                           "trailing bytes after declared payload"};
    }

    SwarmMessage msg;
    msg.kind = static_cast<MessageKind>(kind_byte);
    msg.sender_id = sender_id;
    Cursor c{bytes.subspan(kHeaderLen)};

    auto mismatch = [&](const char* what) {
        return DecodeError{DecodeErrorKind::LengthMismatch, what};
    };

    switch (msg.kind) {
        case MessageKind::HELLO: {
            HelloPayload h;
            if (payload_len > 0) {
                const std::uint16_t n = c.u16();
                h.address = c.str(n);
                if (c.underflow) return mismatch("HELLO address truncated");
            }
            msg.payload = std::move(h);
            break;
        }
        case MessageKind::PEER_LIST: {
            PeerListPayload pl;
            const std::uint32_t count = c.u32();
            if (c.underflow) return mismatch("PEER_LIST count truncated");
            for (std::uint32_t i = 0; i < count; ++i) {
                PeerEntry e;
                e.node_id = c.u32();
                e.last_seen_ms = c.u64();
                const std::uint16_t n = c.u16();
                e.address = c.str(n);
                if (c.underflow) return mismatch("PEER_LIST entry truncated");
                pl.peers.push_back(std::move(e));
            }
            msg.payload = std::move(pl);
            break;
        }
        case MessageKind::WEIGHTS: {
            WeightsPayload w;
            w.round = c.u32();
            w.epoch = c.u32();
            w.sample_count = c.u64();
            const std::uint64_t n = c.u64();
            if (c.underflow) return mismatch("WEIGHTS header truncated");
            if (n > (kMaxPayload - 24) / 8 || payload_len != 24 + n * 8) {
                return mismatch("WEIGHTS param_count disagrees with payload_len");
            }
            w.values.reserve(n);
            for (std::uint64_t i = 0; i < n; ++i) w.values.push_back(c.f64());
            msg.payload = std::move(w);
            break;
        }
        case MessageKind::ACK: {
            AckPayload a;
            a.round = c.u32();
            if (c.underflow) return mismatch("ACK round truncated");
            msg.payload = a;
            break;
        }
        case MessageKind::LEAVE:
            msg.payload = LeavePayload{};
            break;
    }
    if (c.pos != payload_len) {
        return mismatch("payload has unconsumed bytes");
    }
    return msg;
}

}  // namespace swarm
