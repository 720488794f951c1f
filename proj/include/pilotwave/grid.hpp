#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace pilotwave {

inline constexpr int kMaxDim = 3;

// Configuration-space point.  Components beyond the active dimension are zero.
using Point = std::array<double, kMaxDim>;

struct PhysicalParams {
    double hbar = 1.0;
    std::vector<double> masses = {1.0};  // one per configuration axis
};

struct AxisSpec {
    double lower = 0.0;
    double upper = 0.0;
    std::size_t points = 0;  // power of two, >= 16
};

struct GridSpec {
    std::vector<AxisSpec> axes;
    std::size_t max_points = std::size_t(1) << 22;  // memory cap, total points
};

// Uniform tensor-product grid over a rectangular configuration-space box.
// Points along axis k sit at lower + j*dx, j = 0..N-1; the upper bound is
// excluded (periodic convention).  Storage is row-major, axis 0 slowest.
class Grid {
  public:
    static std::shared_ptr<const Grid> make(const GridSpec& spec);

    int dim() const { return dim_; }
    std::size_t size() const { return total_; }
    std::size_t points(int axis) const { return axes_[axis].points; }
    double lower(int axis) const { return axes_[axis].lower; }
    double upper(int axis) const { return axes_[axis].upper; }
    double extent(int axis) const { return axes_[axis].upper - axes_[axis].lower; }
    double dx(int axis) const { return dx_[axis]; }
    double cell_volume() const { return cell_volume_; }

    double coord(int axis, std::size_t j) const { return axes_[axis].lower + dx_[axis] * double(j); }
    // Angular wave number of FFT mode j along an axis (negative branch above N/2).
    double wavenumber(int axis, std::size_t j) const { return wavenumbers_[axis][j]; }
    const std::vector<double>& wavenumbers(int axis) const { return wavenumbers_[axis]; }

    std::size_t stride(int axis) const { return strides_[axis]; }
    std::size_t flat(const std::array<std::size_t, kMaxDim>& idx) const {
        std::size_t f = 0;
        for (int a = 0; a < dim_; ++a) f += idx[a] * strides_[a];
        return f;
    }
    std::array<std::size_t, kMaxDim> unflat(std::size_t f) const {
        std::array<std::size_t, kMaxDim> idx{};
        for (int a = 0; a < dim_; ++a) {
            idx[a] = f / strides_[a];
            f %= strides_[a];
        }
        return idx;
    }
    Point point_at(std::size_t f) const {
        auto idx = unflat(f);
        Point p{};
        for (int a = 0; a < dim_; ++a) p[a] = coord(a, idx[a]);
        return p;
    }

    bool inside(const Point& p) const {
        for (int a = 0; a < dim_; ++a)
            if (p[a] < axes_[a].lower || p[a] >= axes_[a].upper) return false;
        return true;
    }

    bool compatible(const Grid& other) const;

  private:
    explicit Grid(const GridSpec& spec);

    int dim_ = 0;
    std::vector<AxisSpec> axes_;
    std::array<double, kMaxDim> dx_{};
    std::array<std::size_t, kMaxDim> strides_{};
    std::array<std::vector<double>, kMaxDim> wavenumbers_;
    std::size_t total_ = 0;
    double cell_volume_ = 1.0;
};

using GridPtr = std::shared_ptr<const Grid>;

void validate_params(const PhysicalParams& params, int dim);

}  // namespace pilotwave
