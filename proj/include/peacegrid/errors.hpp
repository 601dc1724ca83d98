#pragma once

#include <stdexcept>
#include <string>

namespace peacegrid {

// Error categories map onto CLI exit codes: input 2, service 3, internal 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad files, bad config, malformed or inconsistent data.
struct InputError : Error {
    using Error::Error;
};

// Remote embedding service failed (HTTP errors, exhausted retries).
struct ServiceError : Error {
    using Error::Error;
};

// A broken invariant inside the engine itself.
struct InternalError : Error {
    using Error::Error;
};

}  // namespace peacegrid
