#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace pilotwave {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Grid construction: bad dimension, point counts, memory cap.
struct GridError : Error {
    using Error::Error;
};

// Wave-function construction: center outside grid, under-resolved width,
// boundary tail mass, destructive cancellation.
struct StateError : Error {
    using Error::Error;
};

// Mismatched grids or array shapes between operands.
struct ShapeError : Error {
    using Error::Error;
};

// Potential-phase rotation per step would exceed pi.
struct PhaseWrapError : Error {
    using Error::Error;
};

// Probability mass reached the domain boundary (periodic wrap-around would
// silently contaminate trajectories).
struct BoundaryError : Error {
    using Error::Error;
};

// Linear solve in the implicit stepper failed its residual tolerance.
struct SolveError : Error {
    using Error::Error;
};

// Trajectory or field evaluation ran into a near-zero of the wave function,
// where the guiding velocity is singular.  Carries the offending point/time.
struct NodeEncounter : Error {
    NodeEncounter(std::array<double, 3> q_, double t_, const std::string& what_)
        : Error(what_), q(q_), t(t_) {}
    std::array<double, 3> q{};
    double t = 0.0;
};

// Rejection sampling would be pathologically inefficient.
struct SamplingError : Error {
    using Error::Error;
};

// Scenario configuration problems; collects every validation failure.
struct ConfigError : Error {
    explicit ConfigError(std::vector<std::string> issues_)
        : Error(join(issues_)), issues(std::move(issues_)) {}
    std::vector<std::string> issues;

  private:
    static std::string join(const std::vector<std::string>& v) {
        std::string s = "configuration invalid:";
        for (const auto& e : v) s += "\n  - " + e;
        return s;
    }
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace pilotwave
