#include "pilotwave/spectral.hpp"

#include <fftw3.h>

#include <cmath>

#include "pilotwave/errors.hpp"

namespace pilotwave {

struct Fft::Impl {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

Fft::Fft(const Grid& grid) : impl_(std::make_unique<Impl>()), n_(grid.size()) {
    int rank = grid.dim();
    int dims[kMaxDim];
    for (int a = 0; a < rank; ++a) dims[a] = int(grid.points(a));
    // Scratch buffer only for planning; execution uses caller arrays.
    // FFTW_UNALIGNED keeps the plan independent of buffer alignment, and
    // FFTW_ESTIMATE keeps planning deterministic.
    std::vector<cd> scratch(n_);
    auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    impl_->fwd = fftw_plan_dft(rank, dims, p, p, FFTW_FORWARD, flags);
    impl_->bwd = fftw_plan_dft(rank, dims, p, p, FFTW_BACKWARD, flags);
    if (!impl_->fwd || !impl_->bwd) throw Error("FFT planning failed");
}

Fft::~Fft() {
    if (impl_) {
        if (impl_->fwd) fftw_destroy_plan(impl_->fwd);
        if (impl_->bwd) fftw_destroy_plan(impl_->bwd);
    }
}

void Fft::forward(cd* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(impl_->fwd, p, p);
}

void Fft::backward(cd* data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(impl_->bwd, p, p);
}

namespace {

// Applies fn(multi_index) -> complex multiplier to every spectral coefficient.
template <typename F>
void apply_spectral(const Grid& grid, std::vector<cd>& hat, F&& fn) {
    std::array<std::size_t, kMaxDim> idx{};
    const int dim = grid.dim();
    for (std::size_t f = 0; f < hat.size(); ++f) {
        hat[f] *= fn(idx);
        for (int a = dim - 1; a >= 0; --a) {
            if (++idx[a] < grid.points(a)) break;
            idx[a] = 0;
        }
    }
}

}  // namespace

std::vector<cd> spectral_gradient(const Grid& grid, const std::vector<cd>& field, int axis,
                                  const Fft& fft) {
    std::vector<cd> hat = field;
    fft.forward(hat.data());
    const auto& kv = grid.wavenumbers(axis);
    const std::size_t nyquist = grid.points(axis) / 2;
    const double inv_n = 1.0 / double(grid.size());
    apply_spectral(grid, hat, [&](const std::array<std::size_t, kMaxDim>& idx) {
        const std::size_t j = idx[axis];
        if (j == nyquist) return cd(0.0, 0.0);
        return cd(0.0, kv[j] * inv_n);
    });
    fft.backward(hat.data());
    return hat;
}

std::vector<cd> spectral_gradient(const Grid& grid, const std::vector<cd>& field, int axis) {
    Fft fft(grid);
    return spectral_gradient(grid, field, axis, fft);
}

std::vector<double> spectral_gradient_real(const Grid& grid, const std::vector<double>& field,
                                           int axis, const Fft& fft) {
    std::vector<cd> tmp(field.begin(), field.end());
    tmp = spectral_gradient(grid, tmp, axis, fft);
    std::vector<double> out(tmp.size());
    for (std::size_t i = 0; i < tmp.size(); ++i) out[i] = tmp[i].real();
    return out;
}

std::vector<double> spectral_laplacian_real(const Grid& grid, const std::vector<double>& field,
                                            const Fft& fft) {
    std::vector<cd> hat(field.begin(), field.end());
    fft.forward(hat.data());
    const double inv_n = 1.0 / double(grid.size());
    apply_spectral(grid, hat, [&](const std::array<std::size_t, kMaxDim>& idx) {
        double k2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const double k = grid.wavenumber(a, idx[a]);
            k2 += k * k;
        }
        return cd(-k2 * inv_n, 0.0);
    });
    fft.backward(hat.data());
    std::vector<double> out(hat.size());
    for (std::size_t i = 0; i < hat.size(); ++i) out[i] = hat[i].real();
    return out;
}

std::vector<double> spectral_weighted_laplacian_real(const Grid& grid,
                                                     const std::vector<double>& field,
                                                     const std::array<double, kMaxDim>& weights,
                                                     const Fft& fft) {
    std::vector<cd> hat(field.begin(), field.end());
    fft.forward(hat.data());
    const double inv_n = 1.0 / double(grid.size());
    apply_spectral(grid, hat, [&](const std::array<std::size_t, kMaxDim>& idx) {
        double k2 = 0.0;
        for (int a = 0; a < grid.dim(); ++a) {
            const double k = grid.wavenumber(a, idx[a]);
            k2 += weights[a] * k * k;
        }
        return cd(-k2 * inv_n, 0.0);
    });
    fft.backward(hat.data());
    std::vector<double> out(hat.size());
    for (std::size_t i = 0; i < hat.size(); ++i) out[i] = hat[i].real();
    return out;
}

std::vector<double> central_weighted_laplacian_real(const Grid& grid,
                                                    const std::vector<double>& field,
                                                    const std::array<double, kMaxDim>& weights,
                                                    Topology topo) {
    std::vector<double> out(field.size(), 0.0);
    for (int axis = 0; axis < grid.dim(); ++axis) {
        const std::size_t n = grid.points(axis);
        const std::size_t stride = grid.stride(axis);
        const double w = weights[axis] / (grid.dx(axis) * grid.dx(axis));
        std::array<std::size_t, kMaxDim> idx{};
        for (std::size_t f = 0; f < field.size(); ++f) {
            const std::size_t j = idx[axis];
            double plus, minus;
            if (j + 1 < n)
                plus = field[f + stride];
            else
                plus = (topo == Topology::periodic) ? field[f - (n - 1) * stride] : 0.0;
            if (j > 0)
                minus = field[f - stride];
            else
                minus = (topo == Topology::periodic) ? field[f + (n - 1) * stride] : 0.0;
            out[f] += w * (plus - 2.0 * field[f] + minus);
            for (int a = grid.dim() - 1; a >= 0; --a) {
                if (++idx[a] < grid.points(a)) break;
                idx[a] = 0;
            }
        }
    }
    return out;
}

namespace {

template <typename T>
std::vector<T> central_impl(const Grid& grid, const std::vector<T>& field, int axis,
                            Topology topo) {
    std::vector<T> out(field.size());
    const std::size_t n = grid.points(axis);
    const std::size_t stride = grid.stride(axis);
    const double inv2dx = 0.5 / grid.dx(axis);
    std::array<std::size_t, kMaxDim> idx{};
    for (std::size_t f = 0; f < field.size(); ++f) {
        const std::size_t j = idx[axis];
        T plus, minus;
        if (j + 1 < n)
            plus = field[f + stride];
        else
            plus = (topo == Topology::periodic) ? field[f - (n - 1) * stride] : T(0);
        if (j > 0)
            minus = field[f - stride];
        else
            minus = (topo == Topology::periodic) ? field[f + (n - 1) * stride] : T(0);
        out[f] = (plus - minus) * inv2dx;
        for (int a = grid.dim() - 1; a >= 0; --a) {
            if (++idx[a] < grid.points(a)) break;
            idx[a] = 0;
        }
    }
    return out;
}

}  // namespace

std::vector<cd> central_gradient(const Grid& grid, const std::vector<cd>& field, int axis,
                                 Topology topo) {
    return central_impl(grid, field, axis, topo);
}

std::vector<double> central_gradient_real(const Grid& grid, const std::vector<double>& field,
                                          int axis, Topology topo) {
    return central_impl(grid, field, axis, topo);
}

std::vector<double> clamped_gradient_real(const Grid& grid, const std::vector<double>& field,
                                          int axis) {
    std::vector<double> out(field.size());
    const std::size_t n = grid.points(axis);
    const std::size_t stride = grid.stride(axis);
    const double dx = grid.dx(axis);
    std::array<std::size_t, kMaxDim> idx{};
    for (std::size_t f = 0; f < field.size(); ++f) {
        const std::size_t j = idx[axis];
        if (j == 0)
            out[f] = (field[f + stride] - field[f]) / dx;
        else if (j + 1 == n)
            out[f] = (field[f] - field[f - stride]) / dx;
        else
            out[f] = (field[f + stride] - field[f - stride]) * (0.5 / dx);
        for (int a = grid.dim() - 1; a >= 0; --a) {
            if (++idx[a] < grid.points(a)) break;
            idx[a] = 0;
        }
    }
    return out;
}

}  // namespace pilotwave
