#pragma once

#include <stdexcept>
#include <string>

namespace fifotap {

// Scenario or argument fails structural checks (bad ids, negative demand, ...).
struct validation_error : std::runtime_error {
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// A solve ended without reaching its tolerance, or the perturbation budget ran out.
struct not_converged_error : std::runtime_error {
    explicit not_converged_error(const std::string& msg) : std::runtime_error(msg) {}
};

// The Euler step could not be shrunk enough to keep the state feasible.
struct step_underflow_error : std::runtime_error {
    explicit step_underflow_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Output files could not be written or inputs read.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fifotap
