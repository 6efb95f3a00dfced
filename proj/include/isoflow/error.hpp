#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace isoflow {

/// Machine-readable failure names. The CLI prints these verbatim and maps them to exit codes.
enum class ErrorCode {
    OutsideDomain,
    NotDiskTopology,
    ParseError,
    ValidationError,
    LeftDomain,
    StagnationNearCritical,
    NotSimpleHere,
    DegenerateTriangleField,
    Undefined,
    OnCutLocus,
    AtCriticalPoint,
    UncoveredCriticalPoint,
    CyclicCuts,
    SelfIntersection,
    GeometryFailure,
    QuadratureFailure,
    DegenerateNormalization,
    ZeroVelocity,
    InconsistentTransfer,
    OutOfDomain,
    EntersExcisedRegion,
    IOError,
    ConfigError,
    UnsupportedCriticalPoint,
};

std::string_view error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }
    std::string_view name() const noexcept { return error_name(code_); }

private:
    ErrorCode code_;
};

/// Raised by flow_map when the trajectory reaches the boundary before the requested time.
class LeftDomainError : public Error {
public:
    LeftDomainError(double tau_exit, const std::string& message)
        : Error(ErrorCode::LeftDomain, message), tau_exit_(tau_exit) {}
    double tau_exit() const noexcept { return tau_exit_; }

private:
    double tau_exit_;
};

}  // namespace isoflow
