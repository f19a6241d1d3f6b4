#pragma once

#include <stdexcept>
#include <string>

namespace blip {

/// Base class for all errors raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A caller violated an operation's precondition (mismatched groups,
/// nonpositive scale factor, signed measure where a positive one is
/// required, and so on).
struct PreconditionError : Error {
    using Error::Error;
};

/// Malformed textual input: measure files, element strings, pseudometric
/// spec strings.
struct ParseError : Error {
    using Error::Error;
};

/// Exact (rational) arithmetic was requested but the value is not
/// representable, e.g. the square root of a non-square rational.
struct ExactUnavailableError : PreconditionError {
    using PreconditionError::PreconditionError;
};

/// Post-solve verification failed or an internal invariant broke.
struct InternalError : Error {
    using Error::Error;
};

} // namespace blip
