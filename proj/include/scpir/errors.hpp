#pragma once

#include <stdexcept>
#include <string>

namespace scpir {

// Base class for every error raised by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid or out-of-range parameters / arguments (bad N,K,t, mu outside
// [1/N,1], desired index out of range, malformed fractions, ...).
struct ParameterError : Error {
    using Error::Error;
};

// Structurally broken inputs: incomplete tables, wrong message lengths,
// mismatched answer lengths, corrupt files.
struct StructuralError : Error {
    using Error::Error;
};

// A peer (or a query) violated the wire protocol: chunk not stored here,
// malformed frame, unparsable payload.
struct ProtocolError : Error {
    explicit ProtocolError(const std::string& msg, int code = 1)
        : Error(msg), code(code) {}
    int code;
};

// Requested computation exceeds a hard feasibility guard (enumeration too
// large, memory-sharing scale factor too large).
struct ScaleError : Error {
    using Error::Error;
};

// Internal decode bookkeeping failed; indicates a bug, never expected.
struct DecodeError : Error {
    using Error::Error;
};

}  // namespace scpir
