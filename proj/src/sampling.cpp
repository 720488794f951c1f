#include <cmath>

#include "pilotwave/ensemble.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/rng.hpp"

namespace pilotwave {

std::vector<Point> sample_equilibrium(const WaveFunction& psi, std::size_t n,
                                      std::uint64_t master_seed) {
    const Grid& g = psi.grid();
    auto rho = density(psi);
    double rho_max = 0.0;
    for (double r : rho) rho_max = std::max(rho_max, r);
    if (!(rho_max > 0.0)) throw SamplingError("density is identically zero");

    // a-priori acceptance rate of the uniform proposal; a sharply peaked
    // density would stall the loop, which calls for an importance proposal
    // rather than more retries
    const double volume = double(g.size()) * g.cell_volume();
    if (1.0 / (volume * rho_max) < 1e-4)
        throw SamplingError(
            "rejection acceptance rate below 1e-4; density too peaked for a "
            "uniform proposal, use an importance proposal instead");

    const Topology topo = psi.topology();
    std::vector<Point> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        SplitMix64 stream(stream_for(master_seed, i));
        for (;;) {
            const std::size_t cell = stream.next() % g.size();
            const double u = stream.uniform01();
            if (u * rho_max >= rho[cell]) continue;
            const auto idx = g.unflat(cell);
            Point q{};
            for (int a = 0; a < g.dim(); ++a) {
                // cells are centered on their grid point, so placement is
                // unbiased; the lower-edge overhang wraps around the box
                q[a] = g.coord(a, idx[a]) + (stream.uniform01() - 0.5) * g.dx(a);
                if (q[a] < g.lower(a)) {
                    q[a] = topo == Topology::periodic ? q[a] + g.extent(a) : g.lower(a);
                }
                if (q[a] >= g.lower(a) + g.extent(a)) q[a] = g.lower(a);
            }
            out[i] = q;
            break;
        }
    }
    return out;
}

}  // namespace pilotwave
