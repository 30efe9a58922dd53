#pragma once

#include <stdexcept>
#include <string>

namespace fewsel {

// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad input: malformed files, inconsistent shapes, illegal parameter
// combinations. The CLI maps these to exit code 2.
struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(msg) {}
};

}  // namespace fewsel
