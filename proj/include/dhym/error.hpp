#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dhym {

enum class Errc {
    NotPositiveDefinite,
    DimensionMismatch,
    DegenerateSpectrum,
    BadIndex,
    NotOnLevelSet,
    PhaseOutOfRange,
    NotASubsolution,
    PreconditionFailed,
    InvalidGrid,
    LinearSolveStalled,
    PhaseFloorViolated,
    LineSearchFailed,
    MaxItersExceeded,
    PathStalled,
    UnknownSurface,
    BadRange,
    InvalidConfig,
    Io,
};

std::string_view to_string(Errc code) noexcept;

/// Library-wide exception; `code()` identifies the failure class.
class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

  private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::DegenerateSpectrum: return "DegenerateSpectrum";
    case Errc::BadIndex: return "BadIndex";
    case Errc::NotOnLevelSet: return "NotOnLevelSet";
    case Errc::PhaseOutOfRange: return "PhaseOutOfRange";
    case Errc::NotASubsolution: return "NotASubsolution";
    case Errc::PreconditionFailed: return "PreconditionFailed";
    case Errc::InvalidGrid: return "InvalidGrid";
    case Errc::LinearSolveStalled: return "LinearSolveStalled";
    case Errc::PhaseFloorViolated: return "PhaseFloorViolated";
    case Errc::LineSearchFailed: return "LineSearchFailed";
    case Errc::MaxItersExceeded: return "MaxItersExceeded";
    case Errc::PathStalled: return "PathStalled";
    case Errc::UnknownSurface: return "UnknownSurface";
    case Errc::BadRange: return "BadRange";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::Io: return "Io";
    }
    return "Unknown";
}

} // namespace dhym
