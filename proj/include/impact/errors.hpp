#pragma once

#include <stdexcept>
#include <string>

namespace impact {

// Base class for all pipeline errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad flags, malformed config files, unusable toolchains. CLI exit code 1.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input document (manifest, descriptor, disassembly text).
class ParseError : public Error {
public:
    using Error::Error;
};

// Structurally valid input violating an invariant; names the offending entry.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace impact
