#pragma once

#include <stdexcept>
#include <string>

namespace keytrack {

// Base class for all engine errors. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent stream input: bad record, wrong arity,
// non-monotone frame index.
class StreamError : public Error {
public:
    explicit StreamError(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

// Sample planning failure (object cannot fit any chip at its pyramid factor).
class PlanError : public Error {
public:
    explicit PlanError(const std::string& what) : Error(what) {}
};

// Evaluation input problem (duplicate ids within a frame, mismatched schemas).
class EvalError : public Error {
public:
    explicit EvalError(const std::string& what) : Error(what) {}
};

} // namespace keytrack
