#pragma once

#include <stdexcept>
#include <string>

namespace qrsm {

/// Base error for everything the library throws. `module()` names the
/// component that raised it so front ends can report where a run failed.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module))
    {
    }

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("model", what) {}
};

class InvariantError : public Error {
public:
    InvariantError(std::string module, const std::string& what) : Error(std::move(module), what) {}
};

}  // namespace qrsm
