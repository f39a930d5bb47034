#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace coeq {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A precondition on an operation's inputs was violated.
struct InvalidInput : Error {
    explicit InvalidInput(const std::string& what) : Error(what) {}
};

/// Rank-1 post-processing failed (empty null space, division hazard,
/// degenerate output power).
struct ExtractionError : Error {
    enum class Kind { no_null_space, division_hazard, degenerate_power };
    ExtractionError(Kind k, const std::string& what) : Error(what), kind(k) {}
    Kind kind;
};

/// Gradient descent blew up; carries the cost trace up to the failure.
struct DivergenceError : Error {
    DivergenceError(const std::string& what, std::vector<double> trace_)
        : Error(what), trace(std::move(trace_)) {}
    std::vector<double> trace;
};

/// A metric was requested on degenerate input (e.g. all-zero response).
struct UndefinedMetric : Error {
    explicit UndefinedMetric(const std::string& what) : Error(what) {}
};

}  // namespace coeq
