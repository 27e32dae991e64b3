#pragma once

#include <stdexcept>
#include <string>

namespace oatbell {

// Thrown when an algorithm fails numerically (root not bracketed, eigensolver
// did not converge, propagator step rejected beyond retry). Maps to CLI exit 3,
// as opposed to std::invalid_argument (domain/usage error, CLI exit 2).
class numerical_error : public std::runtime_error {
  public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace oatbell
