#include "pilotwave/wavefunction.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "pilotwave/errors.hpp"

namespace pilotwave {

namespace {
constexpr double kOrthogonalTol = 1e-8;
constexpr double kCancellationTol = 1e-12;
constexpr double kTailMassTol = 1e-10;
}  // namespace

WaveFunction::WaveFunction(GridPtr grid, PhysicalParams params, std::vector<cd> values,
                           double time_tag, Topology topo)
    : grid_(std::move(grid)), params_(std::move(params)), values_(std::move(values)),
      time_(time_tag), topo_(topo) {}

double raw_norm(const Grid& grid, const std::vector<cd>& values) {
    double s = 0.0;
    for (const cd& v : values) s += std::norm(v);
    return std::sqrt(s * grid.cell_volume());
}

WaveFunction WaveFunction::from_values(GridPtr grid, PhysicalParams params, std::vector<cd> values,
                                       double time_tag, Topology topo) {
    validate_params(params, grid->dim());
    if (values.size() != grid->size())
        throw ShapeError("amplitude array has " + std::to_string(values.size()) +
                         " entries, grid has " + std::to_string(grid->size()));
    const double n = raw_norm(*grid, values);
    if (!(n > kCancellationTol)) throw StateError("state norm vanishes, cannot normalize");
    const double inv = 1.0 / n;
    for (cd& v : values) v *= inv;
    return WaveFunction(std::move(grid), std::move(params), std::move(values), time_tag, topo);
}

WaveFunction WaveFunction::gaussian(GridPtr grid, PhysicalParams params, const Point& center,
                                    const Point& sigma, const Point& momentum) {
    validate_params(params, grid->dim());
    const int dim = grid->dim();
    for (int a = 0; a < dim; ++a) {
        if (center[a] < grid->lower(a) || center[a] >= grid->upper(a))
            throw StateError("packet center outside grid on axis " + std::to_string(a));
        if (sigma[a] < 4.0 * grid->dx(a))
            throw StateError("packet width " + std::to_string(sigma[a]) + " on axis " +
                             std::to_string(a) + " is under-resolved (need >= 4 dx = " +
                             std::to_string(4.0 * grid->dx(a)) + ")");
    }
    std::vector<cd> vals(grid->size());
    for (std::size_t f = 0; f < grid->size(); ++f) {
        const Point q = grid->point_at(f);
        double e = 0.0, phase = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double d = q[a] - center[a];
            e += d * d / (4.0 * sigma[a] * sigma[a]);
            phase += momentum[a] * q[a];
        }
        vals[f] = std::exp(cd(-e, phase));
    }
    WaveFunction psi = from_values(std::move(grid), std::move(params), std::move(vals));
    const double tail = boundary_mass(psi);
    if (tail > kTailMassTol) {
        char buf[128];
        std::snprintf(buf, sizeof buf,
                      "packet tail mass %.2e at the boundary exceeds 1e-10; "
                      "enlarge the box or narrow the packet",
                      tail);
        throw StateError(buf);
    }
    return psi;
}

WaveFunction WaveFunction::plane_wave(GridPtr grid, PhysicalParams params,
                                      const std::array<int, kMaxDim>& mode) {
    const int dim = grid->dim();
    std::vector<cd> vals(grid->size());
    for (std::size_t f = 0; f < grid->size(); ++f) {
        const Point q = grid->point_at(f);
        double phase = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double k = 2.0 * std::numbers::pi * double(mode[a]) / grid->extent(a);
            phase += k * (q[a] - grid->lower(a));
        }
        vals[f] = std::exp(cd(0.0, phase));
    }
    return from_values(std::move(grid), std::move(params), std::move(vals));
}

double norm(const WaveFunction& psi) { return raw_norm(psi.grid(), psi.values()); }

cd inner(const WaveFunction& a, const WaveFunction& b) {
    if (!a.grid().compatible(b.grid())) throw ShapeError("inner product: grids differ");
    cd s = 0.0;
    const auto& av = a.values();
    const auto& bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) s += std::conj(av[i]) * bv[i];
    return s * a.grid().cell_volume();
}

std::vector<double> density(const WaveFunction& psi) {
    std::vector<double> rho(psi.values().size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = std::norm(psi.values()[i]);
    return rho;
}

WaveFunction superpose(const WaveFunction& a, const WaveFunction& b, cd ca, cd cb) {
    if (!a.grid().compatible(b.grid())) throw ShapeError("superpose: grids differ");
    if (a.params().hbar != b.params().hbar || a.params().masses != b.params().masses)
        throw ShapeError("superpose: physical parameters differ");
    const cd overlap = inner(a, b);
    std::vector<cd> vals(a.values().size());
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = ca * a.values()[i] + cb * b.values()[i];
    const double n = raw_norm(a.grid(), vals);
    if (n < kCancellationTol)
        throw StateError("superposition cancels destructively (norm " + std::to_string(n) + ")");
    WaveFunction out = WaveFunction::from_values(a.grid_ptr(), a.params(), std::move(vals));
    if (std::abs(overlap) < kOrthogonalTol) {
        const double w1 = std::norm(ca), w2 = std::norm(cb);
        out.branch_weights_ = {w1 / (w1 + w2), w2 / (w1 + w2)};
    }
    return out;
}

double raw_boundary_mass(const Grid& g, const std::vector<cd>& values) {
    double s = 0.0;
    for (std::size_t f = 0; f < g.size(); ++f) {
        const auto idx = g.unflat(f);
        bool edge = false;
        for (int a = 0; a < g.dim(); ++a)
            if (idx[a] == 0 || idx[a] + 1 == g.points(a)) edge = true;
        if (edge) s += std::norm(values[f]);
    }
    return s * g.cell_volume();
}

double boundary_mass(const WaveFunction& psi) {
    return raw_boundary_mass(psi.grid(), psi.values());
}

SpinorWaveFunction SpinorWaveFunction::from_values(GridPtr grid, PhysicalParams params,
                                                   std::vector<cd> up, std::vector<cd> down) {
    validate_params(params, grid->dim());
    if (up.size() != grid->size() || down.size() != grid->size())
        throw ShapeError("spinor component size does not match grid");
    double s = 0.0;
    for (std::size_t i = 0; i < up.size(); ++i) s += std::norm(up[i]) + std::norm(down[i]);
    const double n = std::sqrt(s * grid->cell_volume());
    if (!(n > kCancellationTol)) throw StateError("spinor norm vanishes");
    SpinorWaveFunction out;
    out.grid_ = std::move(grid);
    out.params_ = std::move(params);
    out.up_ = std::move(up);
    out.down_ = std::move(down);
    const double inv = 1.0 / n;
    for (cd& v : out.up_) v *= inv;
    for (cd& v : out.down_) v *= inv;
    return out;
}

}  // namespace pilotwave
