#pragma once

#include <stdexcept>
#include <string>

namespace phimax {

// Raised when an enumeration or table would exceed its configured size cap.
struct cap_exceeded : std::runtime_error {
    explicit cap_exceeded(const std::string& what) : std::runtime_error(what) {}
};

// Raised for malformed or inconsistent configuration documents.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace phimax
