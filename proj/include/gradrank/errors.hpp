#pragma once

#include <stdexcept>
#include <string>

namespace gradrank {

// Base class for every error the library throws. The what() string is
// prefixed with the concrete error name so CLI output and logs carry it.
class Error : public std::runtime_error {
public:
    Error(const std::string& name, const std::string& message)
        : std::runtime_error(name + ": " + message), name_(name) {}

    const std::string& name() const { return name_; }

private:
    std::string name_;
};

/// Input text or sample collection was empty where content is required.
class EmptyInput : public Error {
public:
    explicit EmptyInput(const std::string& message) : Error("EmptyInput", message) {}
};

/// A file or serialized payload violates its format contract.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("FormatError", message) {}
};

/// Array or matrix dimensions do not satisfy an operation's contract.
class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& message) : Error("ShapeError", message) {}
};

/// A configuration value is invalid.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("ConfigError", message) {}
};

/// An ActivationCache was used after the model it was built from mutated.
class StaleCacheError : public Error {
public:
    explicit StaleCacheError(const std::string& message) : Error("StaleCacheError", message) {}
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
public:
    explicit DivergenceError(const std::string& message) : Error("DivergenceError", message) {}
};

/// A statistic is undefined because the map is constant.
class DegenerateMap : public Error {
public:
    explicit DegenerateMap(const std::string& message) : Error("DegenerateMap", message) {}
};

}  // namespace gradrank
