#pragma once

#include <stdexcept>
#include <string>

namespace spotcheck {

enum class ErrorKind {
    InvalidInput,
    DomainError,
    NonPositiveFactor,
    MixedPower,
    NoFeasibleBeta,
    Divergent,
    BelowThreshold,
    GapTooLarge,
    PreconditionFailed,
    TooFewSamples,
    InfeasiblePlan,
    NonBinaryValue,
};

const char* error_name(ErrorKind kind);

// Typed failure raised by every module; the CLI maps kind to an exit code.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    const char* name() const noexcept { return error_name(kind_); }

private:
    ErrorKind kind_;
};

}  // namespace spotcheck
