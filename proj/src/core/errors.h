// Error taxonomy shared across modules; the CLI maps these onto exit codes.
#pragma once

#include <stdexcept>
#include <string>

namespace core {

// Malformed input document (bad JSON, missing keys, wrong types).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Well-formed input that violates a model invariant. The message names the
// violated invariant and the offending entity.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A dispatch or rescaling problem that admits no feasible solution.
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace core
