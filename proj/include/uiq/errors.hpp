#pragma once

#include <stdexcept>
#include <string>

namespace uiq {

// Base of every error raised by the library. `numerical` marks guards that
// trip on numerical grounds (non-convergence, budget exhaustion); the CLI maps
// those to a distinct exit status.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, bool numerical = false)
        : std::runtime_error(what), numerical_(numerical) {}
    bool numerical() const noexcept { return numerical_; }

private:
    bool numerical_;
};

class RangeError : public Error {
public:
    explicit RangeError(const std::string& what) : Error(what) {}
};

class ResourceLimitError : public Error {
public:
    explicit ResourceLimitError(const std::string& what) : Error(what, true) {}
};

class NonConvergenceError : public Error {
public:
    explicit NonConvergenceError(const std::string& what) : Error(what, true) {}
};

class CapExceededError : public Error {
public:
    explicit CapExceededError(const std::string& what) : Error(what, true) {}
};

class HorizonExceededError : public Error {
public:
    explicit HorizonExceededError(const std::string& what) : Error(what, true) {}
};

class CensoringError : public Error {
public:
    explicit CensoringError(const std::string& what) : Error(what, true) {}
};

// Internal invariant violated (singular kernel solve, malformed face shapes).
class StructureError : public Error {
public:
    explicit StructureError(const std::string& what) : Error(what, true) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& what) : Error(what) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace uiq
