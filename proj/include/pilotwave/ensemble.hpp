#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pilotwave/frame_series.hpp"
#include "pilotwave/guidance.hpp"

namespace pilotwave {

enum class Integrator { rk4 };

struct EnsembleSpec {
    std::size_t n_trajectories = 1;
    std::uint64_t master_seed = 0;
    Integrator integrator = Integrator::rk4;
    double base_dt = 1e-3;
    double node_retry_shrink = 0.5;
    std::size_t max_retries = 8;
    std::size_t threads = 1;
    NodePolicy policy{};
};

void validate_spec(const EnsembleSpec& spec, const FrameSeries& series);

enum class PathStatus { ok, node_abort, boundary_exit };

const char* to_string(PathStatus s);

// Positions are recorded at every frame time of the driving series and kept
// wrapped into the grid on periodic topologies; `wraps` holds the cumulative
// wrap count per axis at each frame (empty vector = the path never wrapped).
// Paths that abort keep their last valid position for the remaining frames.
struct TrajectorySet {
    GridPtr grid;
    std::vector<double> times;
    std::vector<std::vector<Point>> paths;
    std::vector<std::vector<std::array<int, kMaxDim>>> wraps;
    std::vector<PathStatus> status;
    std::vector<std::uint64_t> seeds;

    std::size_t ok_count() const;
    // wrapped position plus accumulated box lengths: continuous on drifting paths
    Point unwrapped(std::size_t path, std::size_t frame) const;
};

struct PathResult {
    std::vector<Point> positions;
    std::vector<std::array<int, kMaxDim>> wraps;
    PathStatus status = PathStatus::ok;
};

struct CheckpointStats {
    double time = 0.0;
    std::size_t frame = 0;
    std::array<double, kMaxDim> ks{};  // marginal Kolmogorov-Smirnov per axis
    double ks_critical = 0.0;
    double chi2 = 0.0;
    double chi2_critical = 0.0;
    std::size_t chi2_bins = 0;
    std::size_t n = 0;
    bool pass = false;
};

struct EquivarianceReport {
    std::vector<CheckpointStats> checkpoints;
    bool all_pass = false;
};

// n independent draws from the cell-quadrature density |psi|^2: rejection
// against a uniform proposal over cells, uniform placement within the accepted
// cell.  Each draw runs on its own counter-derived stream, so the result is a
// pure function of (psi, n, master_seed).
std::vector<Point> sample_equilibrium(const WaveFunction& psi, std::size_t n,
                                      std::uint64_t master_seed);

// classical 4th-order Runge-Kutta on the interpolated velocity field, substeps
// no larger than base_dt, positions recorded at frame times.  A node encounter
// shrinks the step by node_retry_shrink up to max_retries times, then the path
// aborts; leaving the grid wraps on periodic topologies and ends the path on
// walls.
PathResult integrate_trajectory(const FrameSeries& series, const Point& q0,
                                const EnsembleSpec& spec);

// per-trajectory results are bitwise identical to serial integrate_trajectory
// calls, for every thread count
TrajectorySet integrate_ensemble(const FrameSeries& series, const std::vector<Point>& points,
                                 const EnsembleSpec& spec);

// compares the empirical distribution of the surviving paths against |psi_t|^2
// at each checkpoint: marginal KS per axis plus a chi-squared on row-major
// superbins holding at least 20 expected counts each
EquivarianceReport equivariance_check(const TrajectorySet& tset, const FrameSeries& series,
                                      const std::vector<double>& checkpoints);

// 1D only: true iff the ordering of the surviving paths (unwrapped) is the
// same at every frame time
bool non_crossing_check(const TrajectorySet& tset);

// 99% critical values used by the report
double ks_quantile_99(std::size_t n);
double chi_squared_quantile_99(std::size_t dof);

// one row per path per frame: id, time, coordinates, status
void export_csv(const TrajectorySet& tset, const std::filesystem::path& path);
// dense little-endian doubles, path-major, then frame, then axis
void export_binary(const TrajectorySet& tset, const std::filesystem::path& path);

std::string report_text(const EquivarianceReport& report);
void write_report(const EquivarianceReport& report, const std::filesystem::path& path);

}  // namespace pilotwave
