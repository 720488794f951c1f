#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "pilotwave/ensemble.hpp"
#include "pilotwave/potential.hpp"
#include "pilotwave/propagator.hpp"

namespace pilotwave {

// One packet of the prepared system superposition along axis 0.
struct BranchSpec {
    cd amplitude{1.0, 0.0};
    double center = 0.0;
    double sigma = 0.5;  // std of the packet's |psi|^2 in x
    double momentum = 0.0;
};

// Two-axis pointer measurement on a joint grid: axis 0 carries the measured
// system, axis 1 a narrow pointer packet at rest near y = 0.  A position
// coupling V = g*x*y, switched on for the interaction window, kicks the
// pointer momentum by -g*<x>*tau per branch; the following free drift turns
// the momentum difference into macroscopically separated supports in y.  An
// optional second pulse scaled by reversal_gain (plus extra drift) undoes the
// kick so that spreading re-overlaps the supports -- the ingredient for the
// revival probe.  Pulses and drifts run as separate evolution segments with
// state handoff, stitched into one frame series.
struct PointerExperimentSpec {
    GridPtr grid;           // 2D, axis 0 = system, axis 1 = pointer
    PhysicalParams params;  // masses: {system, pointer}
    std::vector<BranchSpec> branches;
    double pointer_sigma = 0.57;
    double coupling = 90.0;
    double interaction_time = 0.05;
    double drift_time = 0.6;
    double reversal_gain = 0.0;  // 0 = no second pulse
    double revival_drift = 0.0;  // extra drift after the second pulse
    std::size_t ensemble_size = 0;  // 0 = fields only, no trajectories
    std::uint64_t seed = 1;
    double pulse_dt = 1e-4;          // step size inside coupling pulses
    double drift_dt = 2.5e-3;        // step size inside free segments
    double pulse_frame_time = 1e-3;  // stored-frame spacing in pulses
    double drift_frame_time = 5e-3;  // stored-frame spacing in drifts
    double overlap_threshold = 1e-6;  // disjoint-support criterion (mass)
    // A kicked pointer state rotates its overall phase at the mean energy, so
    // the L2 frame delta runs well above the change the guiding field sees;
    // the guard here only nets gross undersampling.
    double frame_delta_guard = 1.0;
    std::size_t threads = 4;
};

void validate_spec(const PointerExperimentSpec& spec);

// Branch components of a frame, reconstructed by evolving each prepared
// branch through the same segment schedule (the evolution is linear, and
// reconstruction_error records how well the pieces re-sum to the full state).
// Supports are y-intervals trimmed to a quarter of the overlap threshold per
// tail; overlap between two branches is the integral of min(marginal_i,
// marginal_j), which vanishes exactly when the supports are disjoint.
struct BranchDecomposition {
    std::vector<double> weights;                  // |c_a|^2
    std::vector<std::vector<double>> marginals;   // per branch, x integrated out
    std::vector<std::array<double, 2>> supports;  // [lo, hi] in y per branch
    std::vector<double> centers;                  // mass-weighted y mean per branch
    std::vector<double> boundaries;               // classifier cuts, ascending
    std::vector<std::size_t> order;               // branch index per sorted region
    double max_pairwise_overlap = 0.0;
    double reconstruction_error = 0.0;
    bool disjoint = false;
};

struct PointerExperimentResult {
    FrameSeries series;  // stitched full-state schedule
    std::vector<FrameSeries> branch_series;
    std::vector<cd> amplitudes;  // normalized branch amplitudes
    std::vector<double> phase_switch_times;
    std::vector<double> overlap_curve;  // max pairwise branch overlap per frame
    TrajectorySet trajectories;  // empty when ensemble_size == 0
    std::vector<int> labels;     // region per path; -1 = excluded
    std::vector<std::size_t> counts;  // labeled ok paths per branch
    BranchDecomposition final_decomposition;
};

// Full experiment: prepare, evolve through the schedule, decompose the final
// frame, sample the initial equilibrium ensemble, integrate joint paths, and
// label each by the region its pointer coordinate lands in.  Throws
// StateError with the measured overlap mass when the branch supports fail to
// separate at the final frame.
PointerExperimentResult run_pointer_experiment(const PointerExperimentSpec& spec);

// Decomposition of an arbitrary stored frame of a finished run.
BranchDecomposition decompose_frame(const PointerExperimentResult& result, std::size_t frame,
                                    double overlap_threshold);

// The system's wave function conditioned on the pointer coordinate: the x-row
// of the joint state interpolated at y = Y, raw and normalized.  Throws
// NodeEncounter when the slice carries less than epsilon norm (conditioning
// on a near-node pointer value).
struct ConditionalWaveFunction {
    GridPtr grid;  // 1D system grid, axis 0 of the joint grid
    std::vector<cd> raw;
    double raw_norm = 0.0;
    WaveFunction normalized;
};

ConditionalWaveFunction conditional_wavefunction(const WaveFunction& joint, double y,
                                                 double epsilon = 1e-9);

// Frame-by-frame record of what one trajectory's pointer coordinate sees:
// whether the branch structure has formed, which support it occupies, how
// much of the conditional state belongs to the other branches, and how much
// the unoccupied branches still contribute to the velocity at the actual
// configuration.  Once the structure holds and those two numbers are tiny,
// the occupied branch is the effective state -- collapse without a collapse
// rule.
struct CollapseRow {
    double time = 0.0;
    double y = 0.0;
    int occupied = -1;
    bool structure = false;
    double cross_mass = 0.0;
    double unoccupied_velocity_rel = 0.0;
    bool excluded = false;  // conditional norm under the node threshold
};

struct CollapseReport {
    std::vector<CollapseRow> rows;
    std::ptrdiff_t first_separated_frame = -1;
    bool any_excluded = false;
};

CollapseReport effective_collapse_report(const PointerExperimentResult& result, std::size_t path,
                                         const PointerExperimentSpec& spec);

// Branch overlap against time plus label switches of the surviving paths,
// classified per frame by the nearest branch center.  Runs the schedule
// without the disjoint-support gate, so reconverging specs are admissible.
struct RevivalProbe {
    std::vector<double> times;
    std::vector<double> overlap;
    std::vector<std::size_t> switch_counts;  // label changes entering each frame
    std::size_t total_switches = 0;
};

RevivalProbe branch_revival_probe(const PointerExperimentSpec& spec);

// Structured-text report: spec echo, branch weights, outcome counts, overlap
// curve.  Trajectories travel separately through the ensemble CSV writers.
void write_report(const PointerExperimentResult& result, const PointerExperimentSpec& spec,
                  const std::filesystem::path& path);
void write_revival(const RevivalProbe& probe, const std::filesystem::path& path);

}  // namespace pilotwave
