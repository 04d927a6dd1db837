#pragma once

#include <stdexcept>
#include <string>

namespace k3glue {

// Evaluation point too close to a lattice point or puncture.
struct SingularityError : std::runtime_error {
    explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

// Requested tolerance cannot be met (cutoffs, quadrature, extrapolation).
struct AccuracyError : std::runtime_error {
    explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

// Geometric precondition violated (sphere hits an exclusion ball, empty region, ...).
struct GeometryError : std::runtime_error {
    explicit GeometryError(const std::string& what) : std::runtime_error(what) {}
};

// A triple whose Gram matrix fails positive definiteness.
struct NotDefiniteError : std::runtime_error {
    explicit NotDefiniteError(const std::string& what) : std::runtime_error(what) {}
};

// Query outside the supported region dispatch of the glued triple.
struct RegionError : std::runtime_error {
    explicit RegionError(const std::string& what) : std::runtime_error(what) {}
};

// Quantitative hypothesis of a solver refused (contraction constants, admissibility).
struct HypothesisError : std::runtime_error {
    explicit HypothesisError(const std::string& what) : std::runtime_error(what) {}
};

// Config file problems, reported with line/field location.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace k3glue
