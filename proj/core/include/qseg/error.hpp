#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qseg {

/// Failure categories surfaced by the library. The CLI maps every kind to
/// exit code 1; usage errors never reach this type.
enum class ErrorKind {
    DegenerateNodes,
    TooManyNodes,
    TooFewPoints,
    EvenSeries,
    NonMonotonicX,
    NonFiniteValue,
    OutOfDomain,
    NoRootInRange,
    SignMismatch,
    ZeroIntegral,
    DegenerateDesign,
    TargetFailure,
    GridTooSmall,
    InsufficientArity,
    InvalidArgument,
    ParseError,
    UnsupportedVersion,
    IoError,
};

std::string_view to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message);

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

}  // namespace qseg
