#pragma once

#include <complex>
#include <vector>

#include "pilotwave/grid.hpp"

namespace pilotwave {

using cd = std::complex<double>;

// Boundary treatment the state was produced under.  Spectral states are
// periodic; the implicit 1D stepper pins homogeneous Dirichlet walls.
enum class Topology { periodic, dirichlet };

// Complex amplitude field on a uniform configuration-space grid, unit L2 norm
// under grid quadrature.  Values are immutable after construction.
class WaveFunction {
  public:
    // psi(q) ~ exp(-sum (q-c)^2 / 4 sigma^2) * exp(i k.q), normalized.
    // sigma is the per-axis standard deviation of |psi|^2.
    static WaveFunction gaussian(GridPtr grid, PhysicalParams params, const Point& center,
                                 const Point& sigma, const Point& momentum = {});

    // Single grid Fourier mode along each axis (unit norm, exact eigenstate of
    // the discrete kinetic operator).  mode[a] indexes the FFT mode on axis a.
    static WaveFunction plane_wave(GridPtr grid, PhysicalParams params,
                                   const std::array<int, kMaxDim>& mode);

    // Takes ownership of raw amplitudes and normalizes them.
    static WaveFunction from_values(GridPtr grid, PhysicalParams params, std::vector<cd> values,
                                    double time_tag = 0.0, Topology topo = Topology::periodic);

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const PhysicalParams& params() const { return params_; }
    const std::vector<cd>& values() const { return values_; }
    double time_tag() const { return time_; }
    Topology topology() const { return topo_; }

    // Pre-normalization branch weights recorded by superpose() for orthogonal
    // inputs; empty otherwise.
    const std::vector<double>& branch_weights() const { return branch_weights_; }

    friend WaveFunction superpose(const WaveFunction& a, const WaveFunction& b, cd ca, cd cb);
    friend class Propagator;

  private:
    WaveFunction(GridPtr grid, PhysicalParams params, std::vector<cd> values, double time_tag,
                 Topology topo);

    GridPtr grid_;
    PhysicalParams params_;
    std::vector<cd> values_;
    double time_ = 0.0;
    Topology topo_ = Topology::periodic;
    std::vector<double> branch_weights_;
};

// Two-component field with joint unit norm; used only as input to the spinor
// velocity functional (no spinor time evolution here).
class SpinorWaveFunction {
  public:
    static SpinorWaveFunction from_values(GridPtr grid, PhysicalParams params,
                                          std::vector<cd> up, std::vector<cd> down);

    const Grid& grid() const { return *grid_; }
    GridPtr grid_ptr() const { return grid_; }
    const PhysicalParams& params() const { return params_; }
    const std::vector<cd>& up() const { return up_; }
    const std::vector<cd>& down() const { return down_; }

  private:
    SpinorWaveFunction() = default;
    GridPtr grid_;
    PhysicalParams params_;
    std::vector<cd> up_, down_;
};

// Grid-quadrature L2 norm, inner product, and probability density.
double norm(const WaveFunction& psi);
cd inner(const WaveFunction& a, const WaveFunction& b);
std::vector<double> density(const WaveFunction& psi);

double raw_norm(const Grid& grid, const std::vector<cd>& values);
double raw_boundary_mass(const Grid& grid, const std::vector<cd>& values);

// Normalized c1*a + c2*b on a shared grid.  Throws StateError when the result
// norm falls below 1e-12 (destructive cancellation).
WaveFunction superpose(const WaveFunction& a, const WaveFunction& b, cd ca, cd cb);

// Probability mass in the outermost cell layer of every axis.
double boundary_mass(const WaveFunction& psi);

}  // namespace pilotwave
