#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lofscan {

// A malformed input row. `line` is the 1-based line number in the source file.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// A configuration value that cannot be honored (bad chunk size, k too large
// for the data, malformed scenario file, ...).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Data handed to an operation that violates its preconditions (non-finite
// coordinates, command missing from the schema, ...).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lofscan
