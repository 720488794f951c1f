#include <cmath>
#include <deque>
#include <numbers>

#include "pilotwave/errors.hpp"
#include "pilotwave/frame_io.hpp"
#include "pilotwave/polar.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::array<double, kMaxDim> curvature_weights(const PhysicalParams& params, int dim) {
    std::array<double, kMaxDim> w{};
    for (int a = 0; a < dim; ++a) w[a] = params.hbar * params.hbar / (2.0 * params.masses[a]);
    return w;
}

}  // namespace

PolarFields polar_decompose(const WaveFunction& psi, NodePolicy policy) {
    const Grid& g = psi.grid();
    const auto& vals = psi.values();
    const double hbar = psi.params().hbar;

    PolarFields out;
    out.grid = psi.grid_ptr();
    out.epsilon = policy.resolved_epsilon(g);
    out.R.resize(g.size());
    out.S.assign(g.size(), 0.0);
    out.mask.assign(g.size(), 0);
    out.component.assign(g.size(), -1);

    std::vector<double> rho(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) {
        rho[f] = std::norm(vals[f]);
        out.R[f] = std::sqrt(rho[f]);
        out.mask[f] = rho[f] >= out.epsilon ? 1 : 0;
    }

    int comp = 0;
    for (;;) {
        // next seed: the densest cell not yet reached
        std::size_t seed = g.size();
        double best = -1.0;
        for (std::size_t f = 0; f < g.size(); ++f)
            if (out.mask[f] && out.component[f] < 0 && rho[f] > best) {
                best = rho[f];
                seed = f;
            }
        if (seed == g.size()) break;

        out.component[seed] = comp;
        out.S[seed] = hbar * std::arg(vals[seed]);
        std::deque<std::size_t> queue{seed};
        while (!queue.empty()) {
            const std::size_t c = queue.front();
            queue.pop_front();
            const auto idx = g.unflat(c);
            for (int a = 0; a < g.dim(); ++a) {
                for (int dir = -1; dir <= 1; dir += 2) {
                    // the seam stays open: no wrap, a winding phase keeps its cut
                    if (dir < 0 && idx[a] == 0) continue;
                    if (dir > 0 && idx[a] + 1 == g.points(a)) continue;
                    const std::size_t nb =
                        dir < 0 ? c - g.stride(a) : c + g.stride(a);
                    if (!out.mask[nb] || out.component[nb] >= 0) continue;
                    out.component[nb] = comp;
                    out.S[nb] = out.S[c] + hbar * std::remainder(std::arg(vals[nb]) -
                                                                    std::arg(vals[c]),
                                                                kTwoPi);
                    queue.push_back(nb);
                }
            }
        }
        ++comp;
    }
    out.components = std::size_t(comp);
    out.U = quantum_potential(psi, psi.params(), policy);
    return out;
}

std::vector<double> quantum_potential(const WaveFunction& psi, const PhysicalParams& params,
                                      NodePolicy policy) {
    const Grid& g = psi.grid();
    validate_params(params, g.dim());
    const double eps = policy.resolved_epsilon(g);
    const auto w = curvature_weights(params, g.dim());

    std::vector<double> r(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) r[f] = std::abs(psi.values()[f]);

    std::vector<double> lap;
    if (psi.topology() == Topology::periodic) {
        Fft fft(g);
        lap = spectral_weighted_laplacian_real(g, r, w, fft);
    } else {
        lap = central_weighted_laplacian_real(g, r, w, psi.topology());
    }

    std::vector<double> u(g.size(), 0.0);
    for (std::size_t f = 0; f < g.size(); ++f) {
        if (r[f] * r[f] < eps) continue;
        u[f] = -lap[f] / r[f];
        if (!std::isfinite(u[f])) throw StateError("quantum potential not finite on mask");
    }
    return u;
}

ResidualField hj_residual(const FrameSeries& series, const Potential& v, double t,
                          NodePolicy policy) {
    const Grid& g = series.grid();
    if (!g.compatible(v.grid())) throw ShapeError("potential grid does not match the frames");
    const auto& times = series.times();
    const double tiny = 1e-9 * series.frame_interval();

    std::size_t frame = times.size();
    for (std::size_t j = 1; j + 1 < times.size(); ++j)
        if (std::abs(times[j] - t) <= tiny) { frame = j; break; }
    if (frame == times.size())
        throw StateError("residual needs an interior frame time");

    const double hbar = series.params().hbar;
    const auto prev = polar_decompose(series.frame(frame - 1), policy);
    const auto here = polar_decompose(series.frame(frame), policy);
    const auto next = polar_decompose(series.frame(frame + 1), policy);
    const double two_dt = times[frame + 1] - times[frame - 1];
    const Topology topo = series.topology();

    ResidualField out;
    out.value.assign(g.size(), 0.0);
    out.mask.assign(g.size(), 0);

    // branch-folded difference: drops per-frame unwrap offsets and seam cuts
    const double turn = kTwoPi * hbar;
    auto fold = [&](double d) { return std::remainder(d, turn); };

    for (std::size_t f = 0; f < g.size(); ++f) {
        if (!here.mask[f] || !prev.mask[f] || !next.mask[f]) continue;
        const auto idx = g.unflat(f);

        double kinetic = 0.0;
        bool usable = true;
        for (int a = 0; a < g.dim() && usable; ++a) {
            const std::size_t n = g.points(a);
            const std::size_t stride = g.stride(a);
            std::size_t plus, minus;
            if (idx[a] + 1 < n)
                plus = f + stride;
            else if (topo == Topology::periodic)
                plus = f - (n - 1) * stride;
            else { usable = false; break; }
            if (idx[a] > 0)
                minus = f - stride;
            else if (topo == Topology::periodic)
                minus = f + (n - 1) * stride;
            else { usable = false; break; }
            if (!here.mask[plus] || !here.mask[minus]) { usable = false; break; }

            const double ds = (fold(here.S[plus] - here.S[f]) + fold(here.S[f] - here.S[minus])) /
                              (2.0 * g.dx(a));
            kinetic += ds * ds / (2.0 * series.params().masses[a]);
        }
        if (!usable) continue;

        const double dsdt = fold(next.S[f] - prev.S[f]) / two_dt;
        out.value[f] = dsdt + kinetic + v.values()[f] + here.U[f];
        out.mask[f] = 1;
    }
    return out;
}

void write_polar(const PolarFields& fields, const std::filesystem::path& stem) {
    auto with = [&](const char* suffix) {
        std::filesystem::path p = stem;
        p += suffix;
        return p;
    };
    write_real_field(with(".R.bin"), fields.R);
    write_real_field(with(".S.bin"), fields.S);
    write_real_field(with(".U.bin"), fields.U);
    std::vector<double> m(fields.mask.begin(), fields.mask.end());
    write_real_field(with(".mask.bin"), m);
}

}  // namespace pilotwave
