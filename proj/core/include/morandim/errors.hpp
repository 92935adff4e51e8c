#pragma once

#include <stdexcept>
#include <string>

namespace morandim {

// Input document could not be parsed at all (malformed JSON).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Document parsed but a field is missing or has the wrong type/shape.
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model data violates a structural constraint (bad scales, weights, masses).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Operation called outside its stated domain (wrong K, target out of range, ...).
struct PreconditionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Exhaustive selector search refused because K^|Lambda| exceeds the cap.
struct EnumerationCapError : PreconditionError {
    EnumerationCapError(std::string msg, double count)
        : PreconditionError(std::move(msg)), selector_count(count) {}
    double selector_count;
};

// Two independent computations of the same quantity disagree, or an internal
// invariant failed. Always a bug or numerically hostile input; never silent.
struct ConsistencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace morandim
