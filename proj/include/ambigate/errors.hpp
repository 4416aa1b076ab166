#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace ambigate {

// Base error for everything raised by this library. `code()` is a short
// stable identifier suitable for programmatic matching; `what()` carries
// the human-readable message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Malformed input documents and unparseable requests. Maps to exit code 2
// in the CLI.
class ParseError : public Error {
public:
    using Error::Error;
};

// Invalid configuration values or generator requests that cannot be
// realized. Maps to exit code 1 in the CLI.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ambigate
