#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cellres {

// Invalid arguments or data that violate a type invariant.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input file does not match its expected layout (missing columns, bad JSON shape).
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A record whose frequency is not covered by any operator's carriers.
class UnassignedOperatorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad run configuration. Carries every diagnostic found, not just the first.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> diagnostics);
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

private:
    std::vector<std::string> diagnostics_;
};

// Failure while loading simulator inputs from disk.
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RowError {
    std::size_t line = 0;
    std::string message;
};

} // namespace cellres
