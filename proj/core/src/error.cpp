#include "qseg/error.hpp"

namespace qseg {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::DegenerateNodes: return "DegenerateNodes";
    case ErrorKind::TooManyNodes: return "TooManyNodes";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::EvenSeries: return "EvenSeries";
    case ErrorKind::NonMonotonicX: return "NonMonotonicX";
    case ErrorKind::NonFiniteValue: return "NonFiniteValue";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::NoRootInRange: return "NoRootInRange";
    case ErrorKind::SignMismatch: return "SignMismatch";
    case ErrorKind::ZeroIntegral: return "ZeroIntegral";
    case ErrorKind::DegenerateDesign: return "DegenerateDesign";
    case ErrorKind::TargetFailure: return "TargetFailure";
    case ErrorKind::GridTooSmall: return "GridTooSmall";
    case ErrorKind::InsufficientArity: return "InsufficientArity";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::IoError: return "IoError";
    }
    return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

}  // namespace qseg
