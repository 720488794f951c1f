#include "pilotwave/interpolate.hpp"

#include <cmath>

#include "pilotwave/errors.hpp"

namespace pilotwave {

namespace {

struct AxisStencil {
    // flat-index offsets for the four taps; -1 marks a zero (wall) tap
    std::ptrdiff_t tap[4];
    double w[4];
};

void catmull_rom_weights(double u, double* w) {
    const double u2 = u * u, u3 = u2 * u;
    w[0] = -0.5 * u3 + u2 - 0.5 * u;
    w[1] = 1.5 * u3 - 2.5 * u2 + 1.0;
    w[2] = -1.5 * u3 + 2.0 * u2 + 0.5 * u;
    w[3] = 0.5 * u3 - 0.5 * u2;
}

template <typename T>
T interp_impl(const Grid& g, const std::vector<T>& field, const Point& q, Topology topo) {
    if (field.size() != g.size()) throw ShapeError("interpolation field does not match grid");
    if (!g.inside(q)) throw BoundaryError("interpolation point outside grid");

    AxisStencil st[kMaxDim];
    for (int a = 0; a < g.dim(); ++a) {
        const double s = (q[a] - g.lower(a)) / g.dx(a);
        const auto n = std::ptrdiff_t(g.points(a));
        auto j = std::ptrdiff_t(std::floor(s));
        if (j >= n) j = n - 1;  // guard against floor(s)=N from rounding
        catmull_rom_weights(s - double(j), st[a].w);
        const auto stride = std::ptrdiff_t(g.stride(a));
        for (int t = 0; t < 4; ++t) {
            std::ptrdiff_t idx = j - 1 + t;
            if (topo == Topology::periodic) {
                idx = ((idx % n) + n) % n;
                st[a].tap[t] = idx * stride;
            } else {
                st[a].tap[t] = (idx < 0 || idx >= n) ? -1 : idx * stride;
            }
        }
    }

    // accumulate over the 4^dim stencil
    T acc{};
    const int dim = g.dim();
    int tap_count = 1;
    for (int a = 0; a < dim; ++a) tap_count *= 4;
    for (int m = 0; m < tap_count; ++m) {
        int rest = m;
        std::ptrdiff_t flat = 0;
        double weight = 1.0;
        bool wall = false;
        for (int a = 0; a < dim; ++a) {
            const int t = rest & 3;
            rest >>= 2;
            if (st[a].tap[t] < 0) {
                wall = true;
                break;
            }
            flat += st[a].tap[t];
            weight *= st[a].w[t];
        }
        if (!wall) acc += field[std::size_t(flat)] * weight;
    }
    return acc;
}

}  // namespace

cd interp_complex(const Grid& g, const std::vector<cd>& field, const Point& q, Topology topo) {
    return interp_impl(g, field, q, topo);
}

double interp_real(const Grid& g, const std::vector<double>& field, const Point& q, Topology topo) {
    return interp_impl(g, field, q, topo);
}

}  // namespace pilotwave
