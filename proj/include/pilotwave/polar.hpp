#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <memory>
#include <vector>

#include "pilotwave/frame_series.hpp"
#include "pilotwave/guidance.hpp"
#include "pilotwave/potential.hpp"

namespace pilotwave {

// Amplitude R, phase-action S = hbar * unwrapped arg psi, quantum potential U.
// S and U carry meaning only on the mask (density at or above the node
// threshold).  The phase offset between disconnected mask components is
// indeterminate, so S is comparable only within one component; `component`
// labels them (-1 off-mask).
struct PolarFields {
    GridPtr grid;
    std::vector<double> R;
    std::vector<double> S;
    std::vector<double> U;
    std::vector<unsigned char> mask;
    std::vector<int> component;
    std::size_t components = 0;
    double epsilon = 0.0;
};

// Unwraps the phase by flood fill from the highest-density cell of each mask
// component, keeping nearest-neighbor jumps within half a turn.  The fill
// never crosses the periodic seam, so a winding state comes out linear with
// one cut at the box edge.
PolarFields polar_decompose(const WaveFunction& psi, NodePolicy policy = {});

// U = -sum_a (hbar^2 / 2 m_a) (d^2_a R) / R; spectral away from walls,
// centered differences against them; zero off-mask.  Masses come from the
// caller so scaled-mass diagnostics can reuse one state.
std::vector<double> quantum_potential(const WaveFunction& psi, const PhysicalParams& params,
                                      NodePolicy policy = {});

// -grad U along a stored evolution: R, its weighted Laplacian, and both of
// their gradients are interpolated and composed pointwise, mirroring the
// velocity interpolation.  Not thread-safe (lazy per-frame cache).
class QuantumForceField {
  public:
    QuantumForceField(const FrameSeries& series, const PhysicalParams& params,
                      NodePolicy policy = {});

    Point force(double t, const Point& q) const;       // -grad U
    double potential(double t, const Point& q) const;  // U

  private:
    struct FrameData;
    std::shared_ptr<const FrameData> frame_data(std::size_t i) const;
    void blend(double t, const Point& q, double* r, double* w, Point* gr, Point* gw) const;

    const FrameSeries& series_;
    PhysicalParams params_;
    double epsilon_ = 0.0;
    mutable std::map<std::size_t, std::shared_ptr<const FrameData>> cache_;
};

Point quantum_force(const FrameSeries& series, double t, const Point& q,
                    const PhysicalParams& params);

struct ResidualField {
    std::vector<double> value;
    std::vector<unsigned char> mask;
};

// dS/dt + sum_a (d_a S)^2 / 2 m_a + V + U at an interior frame time.  S
// derivatives use centered differences with the jump folded to the nearest
// branch, so per-frame unwrapping offsets and the periodic seam drop out;
// the residual shrinks at second order when dt and dx are refined together.
ResidualField hj_residual(const FrameSeries& series, const Potential& v, double t,
                          NodePolicy policy = {});

// m q'' = -grad(V + U), initial velocity fixed by the guiding field at q0.
// Positions are recorded at frame times, wrapped like the first-order paths.
std::vector<Point> second_order_trajectory(const FrameSeries& series, const Potential& v,
                                           const Point& q0, double dt = 1e-3);
// free initial velocity, for probing what happens off the guiding constraint
std::vector<Point> second_order_trajectory(const FrameSeries& series, const Potential& v,
                                           const Point& q0, const Point& v0, double dt = 1e-3);

struct ClassicalPath {
    std::vector<double> times;
    std::vector<Point> q;
    std::vector<Point> p;
};

// Newtonian motion under -grad V, 4th-order steps, recorded every step
ClassicalPath classical_trajectory(const Potential& v, const Point& q0, const Point& p0,
                                   const PhysicalParams& params, double total_time, double dt);

// A packet scenario with its classical counterpart: the probe trajectory
// starts `offset` widths from the center, and the packet momentum scales with
// the mass so every scale shares the same initial velocity.
struct LimitScenario {
    GridPtr grid;
    Potential potential;
    PhysicalParams params;
    Point center{};
    Point sigma{};
    Point velocity{};
    double offset = 1.0;
    double total_time = 2.0;
    double dt = 1e-3;
};

struct LimitCase {
    double scale = 1.0;
    double max_deviation = 0.0;
    double max_force_ratio = 0.0;
};

// For each mass scale: max |Bohm - Newton| over frame times for matching
// initial data, and the max |quantum force| / |classical force| along the way
std::vector<LimitCase> classical_limit_study(const LimitScenario& scenario,
                                             const std::vector<double>& scales);

void export_csv(const std::vector<LimitCase>& table, const std::filesystem::path& path);
// R, S, U, mask as four binary fields next to the stem
void write_polar(const PolarFields& fields, const std::filesystem::path& stem);

}  // namespace pilotwave
