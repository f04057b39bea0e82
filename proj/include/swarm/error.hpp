#pragma once

#include <stdexcept>
#include <string>

namespace swarm {

enum class ErrorCode {
    ShapeMismatch,
    EmptyInput,
    NonFinite,
    InvalidFraction,
    InsufficientData,
    ParseError,
    LabelError,
    RangeError,
    DegenerateLabels,
    DegenerateClusters,
    CoincidentCentroids,
    OversizePayload,
    NoPeersReachable,
    IdCollision,
    AlreadyStopped,
    TransportDown,
    MissingCells,
    IoError,
    InvalidConfig,
};

class SwarmError : public std::runtime_error {
public:
    SwarmError(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

inline const char* error_code_name(ErrorCode c) {
    switch (c) {
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::EmptyInput: return "EmptyInput";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::InvalidFraction: return "InvalidFraction";
        case ErrorCode::InsufficientData: return "InsufficientData";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::LabelError: return "LabelError";
        case ErrorCode::RangeError: return "RangeError";
        case ErrorCode::DegenerateLabels: return "DegenerateLabels";
        case ErrorCode::DegenerateClusters: return "DegenerateClusters";
        case ErrorCode::CoincidentCentroids: return "CoincidentCentroids";
        case ErrorCode::OversizePayload: return "OversizePayload";
        case ErrorCode::NoPeersReachable: return "NoPeersReachable";
        case ErrorCode::IdCollision: return "IdCollision";
        case ErrorCode::AlreadyStopped: return "AlreadyStopped";
        case ErrorCode::TransportDown: return "TransportDown";
        case ErrorCode::MissingCells: return "MissingCells";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
    }
    return "Unknown";
}

}  // namespace swarm
