#include "pilotwave/grid.hpp"

#include <cmath>
#include <numbers>

#include "pilotwave/errors.hpp"

namespace pilotwave {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

Grid::Grid(const GridSpec& spec) {
    dim_ = int(spec.axes.size());
    axes_ = spec.axes;
    total_ = 1;
    for (int a = 0; a < dim_; ++a) {
        const auto& ax = axes_[a];
        dx_[a] = (ax.upper - ax.lower) / double(ax.points);
        total_ *= ax.points;
        cell_volume_ *= dx_[a];

        auto& kv = wavenumbers_[a];
        kv.resize(ax.points);
        const double dk = 2.0 * std::numbers::pi / (ax.upper - ax.lower);
        for (std::size_t j = 0; j < ax.points; ++j) {
            // standard FFT layout; the Nyquist mode sits on the negative branch
            const std::int64_t m = (j < ax.points / 2) ? std::int64_t(j)
                                                       : std::int64_t(j) - std::int64_t(ax.points);
            kv[j] = dk * double(m);
        }
    }
    // row-major, axis 0 slowest
    std::size_t s = 1;
    for (int a = dim_ - 1; a >= 0; --a) {
        strides_[a] = s;
        s *= axes_[a].points;
    }
}

std::shared_ptr<const Grid> Grid::make(const GridSpec& spec) {
    const int dim = int(spec.axes.size());
    if (dim < 1 || dim > kMaxDim)
        throw GridError("grid dimension must be 1-" + std::to_string(kMaxDim) + ", got " +
                        std::to_string(dim));
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) {
        const auto& ax = spec.axes[a];
        if (!(ax.upper > ax.lower))
            throw GridError("axis " + std::to_string(a) + ": upper bound must exceed lower bound");
        if (ax.points < 16)
            throw GridError("axis " + std::to_string(a) + ": need at least 16 points");
        if (!is_power_of_two(ax.points))
            throw GridError("axis " + std::to_string(a) + ": point count " +
                            std::to_string(ax.points) + " is not a power of two");
        total *= ax.points;
    }
    if (total > spec.max_points)
        throw GridError("grid has " + std::to_string(total) + " points, cap is " +
                        std::to_string(spec.max_points));
    return std::shared_ptr<const Grid>(new Grid(spec));
}

bool Grid::compatible(const Grid& other) const {
    if (dim_ != other.dim_) return false;
    for (int a = 0; a < dim_; ++a) {
        if (axes_[a].points != other.axes_[a].points) return false;
        if (axes_[a].lower != other.axes_[a].lower) return false;
        if (axes_[a].upper != other.axes_[a].upper) return false;
    }
    return true;
}

void validate_params(const PhysicalParams& params, int dim) {
    if (!(params.hbar > 0.0)) throw StateError("hbar must be positive");
    if (int(params.masses.size()) != dim)
        throw StateError("need one mass per axis: got " + std::to_string(params.masses.size()) +
                         " for dimension " + std::to_string(dim));
    for (double m : params.masses)
        if (!(m > 0.0)) throw StateError("masses must be positive");
}

}  // namespace pilotwave
