#pragma once

#include <stdexcept>
#include <string>

namespace biad {

/// Invalid configuration: bad parameter values, impossible run setups.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

/// Malformed input data: unreadable files, bad cells, wrong row shapes.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& message) : std::runtime_error(message) {}
};

/// Feedback stream violates the detector protocol (duplicates, bad rounds).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& message) : std::runtime_error(message) {}
};

/// A player ran out of unshown items before the run finished.
class ExhaustionError : public ConfigError {
public:
    explicit ExhaustionError(const std::string& message) : ConfigError(message) {}
};

}  // namespace biad
