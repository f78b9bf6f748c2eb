#pragma once

#include <stdexcept>
#include <string>

namespace dtnlab {

struct MeshError : std::runtime_error {
    explicit MeshError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CoefficientError : std::runtime_error {
    explicit CoefficientError(const std::string& msg) : std::runtime_error(msg) {}
};

// The Dirichlet block A_II has an eigenvalue too close to zero; the
// Dirichlet problem is not uniquely solvable and the DtN construction
// is refused.
struct SpectralGateViolation : std::runtime_error {
    SpectralGateViolation(const std::string& msg, double dist)
        : std::runtime_error(msg), distance(dist) {}
    double distance;
};

// The full Neumann matrix A is (near-)singular, e.g. V = 0 where the
// constants span its kernel.
struct NearSingularNeumann : std::runtime_error {
    NearSingularNeumann(const std::string& msg, double dist)
        : std::runtime_error(msg), distance(dist) {}
    double distance;
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace dtnlab
