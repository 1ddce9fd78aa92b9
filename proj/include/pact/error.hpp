#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pact {

// Base for every error raised by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input file does not match the configured schema (missing column, bad header).
class SchemaError : public Error {
public:
    using Error::Error;
};

// Invalid run configuration or parameter combination.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Caller violated an operation's precondition (dimension mismatch, stage mismatch).
class UsageError : public Error {
public:
    using Error::Error;
};

// An outcome class required by the task has no members.
class DegenerateTaskError : public Error {
public:
    DegenerateTaskError(std::string cls, const std::string& what)
        : Error(what), class_name(std::move(cls)) {}
    std::string class_name;
};

// Coefficients diverged past the separation bound.
class SeparationError : public Error {
public:
    SeparationError(std::vector<std::string> feats, const std::string& what)
        : Error(what), features(std::move(feats)) {}
    std::vector<std::string> features;
};

// Information matrix singular even after jitter, or design matrix rank deficient.
class RankDeficiencyError : public Error {
public:
    RankDeficiencyError(std::string col, const std::string& what)
        : Error(what), column(std::move(col)) {}
    std::string column;
};

class ConvergenceError : public Error {
public:
    using Error::Error;
};

// Leverage h_ii numerically at or above one.
class LeverageError : public Error {
public:
    LeverageError(std::size_t r, const std::string& what) : Error(what), row(r) {}
    std::size_t row;
};

class InsufficientVariationError : public Error {
public:
    using Error::Error;
};

}  // namespace pact
