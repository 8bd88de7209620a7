#pragma once

#include <stdexcept>
#include <string>

namespace oalg {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace oalg
