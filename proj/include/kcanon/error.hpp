#ifndef KCANON_ERROR_HPP_
#define KCANON_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace kcanon {

enum class ErrorKind {
    MalformedLine,
    SelfLoop,
    DuplicateEdge,
    NonPositiveWeight,
    InvalidNode,
    Disconnected,
    InvalidArgument,
    Io,
    FactorizationFailed,
    SameSourceSink,
    EigendecompositionFailed,
    SecondEigenvalueNearZero,
    GraphMismatch,
    NonFinite,
    SingularSystem,
    TooLarge,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MalformedLine: return "MalformedLine";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::DuplicateEdge: return "DuplicateEdge";
    case ErrorKind::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorKind::InvalidNode: return "InvalidNode";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::Io: return "Io";
    case ErrorKind::FactorizationFailed: return "FactorizationFailed";
    case ErrorKind::SameSourceSink: return "SameSourceSink";
    case ErrorKind::EigendecompositionFailed: return "EigendecompositionFailed";
    case ErrorKind::SecondEigenvalueNearZero: return "SecondEigenvalueNearZero";
    case ErrorKind::GraphMismatch: return "GraphMismatch";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::TooLarge: return "TooLarge";
    }
    return "Unknown";
}

/// True for errors raised while reading or validating input (CLI exit code 2).
inline constexpr bool is_input_error(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MalformedLine:
    case ErrorKind::SelfLoop:
    case ErrorKind::DuplicateEdge:
    case ErrorKind::NonPositiveWeight:
    case ErrorKind::InvalidNode:
    case ErrorKind::Disconnected:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Io:
    case ErrorKind::SameSourceSink:
    case ErrorKind::TooLarge:
        return true;
    default:
        return false;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind),
          detail_(message) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

} // namespace kcanon

#endif // KCANON_ERROR_HPP_
