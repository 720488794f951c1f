#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pilotwave/frame_series.hpp"
#include "pilotwave/grid.hpp"
#include "pilotwave/measurement.hpp"

namespace pilotwave {

inline constexpr const char* kToolVersion = "pilotwave 1.0.0";

// one gaussian packet term; superpositions and spinor components are lists
struct TermConfig {
    cd amplitude{1.0, 0.0};
    Point center{};
    Point sigma{};
    Point momentum{};
};

struct StateConfig {
    std::string kind = "gaussian";  // gaussian | superposition | spinor | pointer
    std::vector<TermConfig> terms;  // gaussian (1) / superposition (2+)
    std::vector<TermConfig> up, down;          // spinor components
    std::vector<BranchSpec> branches;          // pointer experiment branches
    double pointer_sigma = 0.57;
};

struct PotentialConfig {
    std::string kind = "free";  // free | harmonic | barrier | double_slit | csv
    Point omega{};
    Point center{};                            // harmonic center
    double height = 0.0, width = 0.0, position = 0.0;  // barrier
    double separation = 0.0, slit_width = 0.0;         // double slit
    double wall_position = 0.0, wall_height = 0.0, wall_width = 0.0;
    std::string csv;
};

struct AnalysisConfig {
    std::string kind;  // equivariance | non_crossing | polar | classical_limit
                       // | nonlocality | measurement

    // equivariance
    std::size_t checkpoints = 4;
    double ks_bound = 0.0;  // 0 = use the 99% KS quantile for the sample size
    bool require_no_aborts = false;

    // polar
    double time = 0.0;
    bool has_energy = false;
    double stationary_energy = 0.0;
    double stationary_tol = 1e-6;
    double radius = 3.0;

    // classical_limit
    std::vector<double> scales;
    double offset = 1.0;

    // nonlocality
    double q1 = 0.0;
    std::vector<double> q2;
    bool has_min_spread = false, has_max_spread = false;
    double min_spread = 0.0, max_spread = 0.0;

    // measurement
    double coupling = 90.0;
    double interaction_time = 0.05;
    double drift_time = 0.6;
    double reversal_gain = 0.0;
    double revival_drift = 0.0;
    double pulse_dt = 1e-4;
    double drift_dt = 2.5e-3;
    double pulse_frame_time = 1e-3;
    double drift_frame_time = 5e-3;
    double overlap_threshold = 1e-6;
    double born_sigmas = 3.0;
    bool check_collapse = true;
    bool check_switching = true;
};

struct ScenarioConfig {
    std::string name;
    std::uint64_t seed = 0;
    std::string output;

    std::vector<AxisSpec> axes;
    double hbar = 1.0;
    std::vector<double> masses;

    PotentialConfig potential;
    StateConfig state;

    Method method = Method::split_step_spectral;
    double dt = 1e-3;
    double total_time = 1.0;
    std::size_t frame_stride = 10;
    double frame_delta_guard = 0.1;
    std::size_t memory_budget = std::size_t(1) << 30;

    std::size_t paths = 0;
    double base_dt = 1e-3;

    std::vector<AnalysisConfig> analyses;
};

// Parses the JSON config text.  Throws ConfigError carrying either a syntax
// error with line/column, or the complete list of validation failures.
ScenarioConfig parse_config(const std::string& text);

// Sorted-key JSON with every default made explicit; parse(canonical(c)) is a
// fixed point.
std::string canonical_config(const ScenarioConfig& cfg);

}  // namespace pilotwave
