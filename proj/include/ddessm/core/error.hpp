#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ddessm {

enum class ErrorCode {
    InvalidArgument,
    NotAnEquilibrium,
    BoundaryRoot,
    StripBoundUnavailable,
    InsufficientDepth,
    MultipleRoot,
    SeriesModeUnjustified,
    ResolventPole,
    NotComputed,
    WrongSigmaShape,
    HomologicalResonance,
    DegenerateHopf,
    NoGlobalLipschitz,
    BadBeta2,
    MissingBallLipschitz,
    Blowup,
    OutOfChart,
    NoCycle,
    ParseError,
};

constexpr std::string_view to_string(ErrorCode c) noexcept {
    switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotAnEquilibrium: return "NotAnEquilibrium";
    case ErrorCode::BoundaryRoot: return "BoundaryRoot";
    case ErrorCode::StripBoundUnavailable: return "StripBoundUnavailable";
    case ErrorCode::InsufficientDepth: return "InsufficientDepth";
    case ErrorCode::MultipleRoot: return "MultipleRoot";
    case ErrorCode::SeriesModeUnjustified: return "SeriesModeUnjustified";
    case ErrorCode::ResolventPole: return "ResolventPole";
    case ErrorCode::NotComputed: return "NotComputed";
    case ErrorCode::WrongSigmaShape: return "WrongSigmaShape";
    case ErrorCode::HomologicalResonance: return "HomologicalResonance";
    case ErrorCode::DegenerateHopf: return "DegenerateHopf";
    case ErrorCode::NoGlobalLipschitz: return "NoGlobalLipschitz";
    case ErrorCode::BadBeta2: return "BadBeta2";
    case ErrorCode::MissingBallLipschitz: return "MissingBallLipschitz";
    case ErrorCode::Blowup: return "Blowup";
    case ErrorCode::OutOfChart: return "OutOfChart";
    case ErrorCode::NoCycle: return "NoCycle";
    case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), message_(message) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }
    /// Message without the code prefix.
    [[nodiscard]] const std::string& detail() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

} // namespace ddessm
