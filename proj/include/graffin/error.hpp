#pragma once

#include <stdexcept>
#include <string>

namespace graffin {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller-supplied data violates a documented precondition.
struct InputError : Error {
    using Error::Error;
};

// Internal contract broken (shape mismatch, detached tensor, ...).
struct ContractError : Error {
    using Error::Error;
};

// Malformed dataset file; message carries file and line.
struct ParseError : Error {
    ParseError(const std::string& file, long line, const std::string& what)
        : Error(file + ":" + std::to_string(line) + ": " + what) {}
    explicit ParseError(const std::string& what) : Error(what) {}
};

// Invalid run configuration (flags, spec files).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace graffin
