#pragma once

#include <atomic>
#include <map>
#include <memory>

#include "pilotwave/frame_series.hpp"
#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

// Node and runaway-speed handling for velocity evaluation.  Zero fields mean
// "derive the default from the grid": threshold 1e-12 x mean density, cap
// 1e3 x the largest axis extent per unit time.
struct NodePolicy {
    double epsilon_node = 0.0;
    double speed_cap = 0.0;

    double resolved_epsilon(const Grid& g) const;
    double resolved_cap(const Grid& g) const;
};

struct VelocityField {
    GridPtr grid;
    std::array<std::vector<double>, kMaxDim> v;  // one real field per axis
    std::vector<unsigned char> mask;             // 1 where density >= epsilon_node
    std::size_t clamp_count = 0;
    double epsilon_node = 0.0;
    double speed_cap = 0.0;
};

// v_k = (hbar/m_k) Im[grad_k psi / psi]; spectral gradients on periodic
// grids, central differences on Dirichlet grids.
VelocityField velocity_grid(const WaveFunction& psi, const NodePolicy& policy = {});

// Spinor variant: v_k = (hbar/m_k) Im[(chi, grad_k chi) / (chi, chi)] with the
// two-component scalar product.
VelocityField velocity_spinor_grid(const SpinorWaveFunction& chi, const NodePolicy& policy = {});

// J_k = (hbar/m_k) Im[conj(psi) grad_k psi], evaluated directly (not as rho*v).
std::array<std::vector<double>, kMaxDim> current_grid(const WaveFunction& psi);

// Velocity evaluation at arbitrary (t, q) from stored frames: psi and grad psi
// are interpolated (cubic in space, linear in time), then divided, preserving
// degree-zero homogeneity exactly.  Gradients are cached per frame; cache
// fills are not thread-safe, so parallel callers must prepare() intervals
// from one thread first.
class GuidanceField {
  public:
    explicit GuidanceField(const FrameSeries& series, NodePolicy policy = {});

    // Materialize gradient caches for every frame needed on [t0, t1].
    void prepare(double t0, double t1) const;

    // Throws NodeEncounter at interpolated density < epsilon_node,
    // BoundaryError for q outside the grid, StateError for t outside the span.
    Point velocity(double t, const Point& q) const;

    std::size_t clamp_count() const { return clamp_count_.load(); }
    const FrameSeries& series() const { return series_; }
    double epsilon_node() const { return epsilon_; }
    double speed_cap() const { return cap_; }

  private:
    struct FrameData {
        std::shared_ptr<const std::vector<cd>> psi;
        std::array<std::vector<cd>, kMaxDim> grad;
    };
    std::shared_ptr<const FrameData> frame_data(std::size_t i) const;

    const FrameSeries& series_;
    double epsilon_ = 0.0;
    double cap_ = 0.0;
    mutable std::map<std::size_t, std::shared_ptr<const FrameData>> cache_;
    mutable std::atomic<std::size_t> clamp_count_{0};
};

// One-off convenience wrapper over GuidanceField.
Point velocity_at(const FrameSeries& series, double t, const Point& q,
                  const NodePolicy& policy = {});

// Velocity of particle 1 in a two-particle 1D+1D state, swept over partner
// positions: constant for product states, spread out for entangled ones.
struct NonlocalityResult {
    std::vector<double> v1;
    double spread = 0.0;  // max - min
};
NonlocalityResult nonlocality_probe(const WaveFunction& psi2, double q1,
                                    const std::vector<double>& q2_list,
                                    const NodePolicy& policy = {});

}  // namespace pilotwave
