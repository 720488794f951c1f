#pragma once

#include <memory>
#include <vector>

#include "pilotwave/frame_series.hpp"
#include "pilotwave/potential.hpp"
#include "pilotwave/spectral.hpp"
#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

// Fixed-step propagator with tables precomputed for one (grid, V, dt) triple.
// step() advances raw amplitudes in place; sequential in time by nature.
class Propagator {
  public:
    Propagator(const Potential& v, const PhysicalParams& params, Method method, double dt);

    void step(std::vector<cd>& psi) const;
    double dt() const { return dt_; }
    Method method() const { return method_; }
    Topology topology() const {
        return method_ == Method::crank_nicolson_1d ? Topology::dirichlet : Topology::periodic;
    }

  private:
    void step_spectral(std::vector<cd>& psi) const;
    void step_cn(std::vector<cd>& psi) const;

    GridPtr grid_;
    Method method_;
    double dt_ = 0.0;
    double hbar_ = 1.0;
    std::unique_ptr<Fft> fft_;
    std::vector<cd> half_v_phase_;   // exp(-i V dt / 2 hbar)
    std::vector<cd> kinetic_phase_;  // exp(-i hbar k^2 dt / 2 m) / N
    // Crank-Nicolson tridiagonal coefficients (dim 1): A x = B psi
    cd cn_off_a_, cn_off_b_;
    std::vector<cd> cn_diag_a_, cn_diag_b_;
    mutable std::vector<cd> scratch_;
};

// One-off single steps (plan tables on each call; fine for tests).
WaveFunction step_split_spectral(const WaveFunction& psi, const Potential& v, double dt);
WaveFunction step_crank_nicolson(const WaveFunction& psi, const Potential& v, double dt);

// Frames at t = t0, t0 + dt*stride, ...; count = floor(total_time/(dt*stride)) + 1.
// Aborts with BoundaryError once boundary mass exceeds 1e-6.
FrameSeries evolve(const WaveFunction& psi0, const Potential& v, const PropagatorSpec& spec);

// <psi|H|psi> under grid quadrature (kinetic term evaluated spectrally).
double energy_expectation(const WaveFunction& psi, const Potential& v);

}  // namespace pilotwave
