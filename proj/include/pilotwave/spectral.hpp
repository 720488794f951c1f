#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "pilotwave/grid.hpp"
#include "pilotwave/wavefunction.hpp"

namespace pilotwave {

// RAII wrapper around an in-order complex FFT over the full grid.  Plans are
// created with deterministic heuristics so repeated runs take identical code
// paths.  Not thread-safe; callers keep transforms on one thread.
class Fft {
  public:
    explicit Fft(const Grid& grid);
    ~Fft();
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    void forward(cd* data) const;   // unnormalized
    void backward(cd* data) const;  // unnormalized; forward+backward = N * id

    std::size_t size() const { return n_; }

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t n_ = 0;
};

// Spectral partial derivative along one axis (periodic).  The Nyquist mode is
// zeroed for odd derivatives, kept with -k^2 for the Laplacian.
std::vector<cd> spectral_gradient(const Grid& grid, const std::vector<cd>& field, int axis,
                                  const Fft& fft);
std::vector<cd> spectral_gradient(const Grid& grid, const std::vector<cd>& field, int axis);

std::vector<double> spectral_gradient_real(const Grid& grid, const std::vector<double>& field,
                                           int axis, const Fft& fft);

std::vector<double> spectral_laplacian_real(const Grid& grid, const std::vector<double>& field,
                                            const Fft& fft);

// sum_a w_a d^2/dq_a^2, one transform round trip
std::vector<double> spectral_weighted_laplacian_real(const Grid& grid,
                                                     const std::vector<double>& field,
                                                     const std::array<double, kMaxDim>& weights,
                                                     const Fft& fft);

// centered-difference counterpart; neighbors beyond the edge wrap (periodic)
// or read zero (dirichlet)
std::vector<double> central_weighted_laplacian_real(const Grid& grid,
                                                    const std::vector<double>& field,
                                                    const std::array<double, kMaxDim>& weights,
                                                    Topology topo);

// Second-order centered difference along one axis.  Off-grid neighbors are
// taken as zero for dirichlet topology (homogeneous walls) and wrapped for
// periodic topology.
std::vector<cd> central_gradient(const Grid& grid, const std::vector<cd>& field, int axis,
                                 Topology topo);
std::vector<double> central_gradient_real(const Grid& grid, const std::vector<double>& field,
                                          int axis, Topology topo);
// Clamped variant for potentials: one-sided differences at the edges.
std::vector<double> clamped_gradient_real(const Grid& grid, const std::vector<double>& field,
                                          int axis);

}  // namespace pilotwave
