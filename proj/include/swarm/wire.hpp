#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace swarm {

// Framed little-endian wire protocol.
// Header: magic "SWRM" (4) | version u8 = 1 | kind u8 | sender_id u32 | payload_len u32.
// Payloads:
//   HELLO      optional advertised address: addr_len u16 | addr bytes (empty allowed)
//   PEER_LIST  count u32, then per entry: node_id u32 | last_seen_ms u64 | addr_len u16 | addr
//   WEIGHTS    round u32 | epoch u32 | sample_count u64 | param_count u64 | param_count × f64
//   ACK        round u32
//   LEAVE      empty

enum class MessageKind : std::uint8_t {
    HELLO = 0x01,
    PEER_LIST = 0x02,
    WEIGHTS = 0x03,
    ACK = 0x04,
    LEAVE = 0x05,
};

constexpr std::uint8_t kWireVersion = 1;
constexpr std::size_t kHeaderLen = 14;
constexpr std::size_t kMaxPayload = 0x7fffffff;

struct HelloPayload {
    std::optional<std::string> address;
    bool operator==(const HelloPayload&) const = default;
};

struct PeerEntry {
    std::uint32_t node_id = 0;
    std::uint64_t last_seen_ms = 0;
    std::string address;
    bool operator==(const PeerEntry&) const = default;
};

struct PeerListPayload {
    std::vector<PeerEntry> peers;
    bool operator==(const PeerListPayload&) const = default;
};

struct WeightsPayload {
    std::uint32_t round = 0;
    std::uint32_t epoch = 0;
    std::uint64_t sample_count = 0;
    std::vector<double> values;
    bool operator==(const WeightsPayload&) const = default;
};

struct AckPayload {
    std::uint32_t round = 0;
    bool operator==(const AckPayload&) const = default;
};

struct LeavePayload {
    bool operator==(const LeavePayload&) const = default;
};

struct SwarmMessage {
    MessageKind kind = MessageKind::HELLO;
    std::uint32_t sender_id = 0;
    std::variant<HelloPayload, PeerListPayload, WeightsPayload, AckPayload, LeavePayload>
        payload;
    bool operator==(const SwarmMessage&) const = default;
};

enum class DecodeErrorKind {
    BadMagic,
    BadVersion,
    UnknownKind,
    TruncatedFrame,
    LengthMismatch,
};

struct DecodeError {
    DecodeErrorKind kind;
    std::string detail;
};

const char* decode_error_name(DecodeErrorKind k);

// Throws SwarmError{OversizePayload} when the payload exceeds 2^31-1 bytes.
std::vector<std::uint8_t> encode(const SwarmMessage& msg);

// Total on arbitrary bytes: returns either a message or a named error.
std::variant<SwarmMessage, DecodeError> decode(std::span<const std::uint8_t> bytes);

}  // namespace swarm
