#pragma once

#include <stdexcept>
#include <string>

namespace speclab {

struct InvalidGeometry : std::runtime_error {
    explicit InvalidGeometry(const std::string &msg) : std::runtime_error(msg) {}
};

struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string &msg) : std::runtime_error(msg) {}
};

struct InvalidInput : std::runtime_error {
    explicit InvalidInput(const std::string &msg) : std::runtime_error(msg) {}
};

struct InvalidLoop : std::runtime_error {
    explicit InvalidLoop(const std::string &msg) : std::runtime_error(msg) {}
};

struct UsageError : std::runtime_error {
    explicit UsageError(const std::string &msg) : std::runtime_error(msg) {}
};

struct StructurallyZero : std::runtime_error {
    explicit StructurallyZero(const std::string &msg) : std::runtime_error(msg) {}
};

struct TooLarge : std::runtime_error {
    explicit TooLarge(const std::string &msg) : std::runtime_error(msg) {}
};

struct SolverFailure : std::runtime_error {
    explicit SolverFailure(const std::string &msg) : std::runtime_error(msg) {}
};

struct MatchingFailure : std::runtime_error {
    explicit MatchingFailure(const std::string &msg) : std::runtime_error(msg) {}
};

struct UnsupportedStructureGroup : std::runtime_error {
    explicit UnsupportedStructureGroup(const std::string &msg) : std::runtime_error(msg) {}
};

struct StructureViolation : std::runtime_error {
    explicit StructureViolation(const std::string &msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace speclab
