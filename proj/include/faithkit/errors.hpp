#pragma once

#include <stdexcept>
#include <string>

namespace faithkit {

struct FaithkitError : std::runtime_error {
    explicit FaithkitError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct UnknownUnit : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct ConfigError : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct NoEligibleElement : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct EmptyDiff : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct EmptyEvaluation : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct LengthMismatch : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct TierInfeasible : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct UnsatisfiableSplit : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct ContextOverflow : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct EmptyEvidence : FaithkitError {
    using FaithkitError::FaithkitError;
};
struct DivergenceDetected : FaithkitError {
    using FaithkitError::FaithkitError;
};

// Input-file violation carrying a 1-based line number for CLI reporting.
struct SchemaError : FaithkitError {
    SchemaError(const std::string& msg, size_t line_no)
        : FaithkitError("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
    size_t line;
};

}  // namespace faithkit
