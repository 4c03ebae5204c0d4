#pragma once

#include <stdexcept>
#include <string>

namespace tgf {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when an operator meets a non-finite intermediate.
struct DivergedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

} // namespace tgf
