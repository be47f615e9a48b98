#pragma once

#include <stdexcept>
#include <string>

namespace ineq {

// Every error carries the name of the module that raised it so the CLI can
// report provenance ("estimators: ...").
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Bad input data or arguments (missing file, missing column, bad flag value).
class DataError : public Error {
public:
    using Error::Error;
};

/// Linear-algebra or optimisation failure (rank deficiency, non-convergence).
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace ineq
