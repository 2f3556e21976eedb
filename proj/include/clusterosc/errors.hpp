#pragma once

#include <stdexcept>
#include <string>

namespace clusterosc {

// Thrown when an algorithm fails numerically (no convergence, singular
// system, non-finite state). Distinct from std::invalid_argument, which
// signals a violated precondition / bad configuration.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}
