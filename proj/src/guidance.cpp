#include "pilotwave/guidance.hpp"

#include <algorithm>
#include <cmath>

#include "pilotwave/errors.hpp"
#include "pilotwave/interpolate.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

double NodePolicy::resolved_epsilon(const Grid& g) const {
    if (epsilon_node > 0.0) return epsilon_node;
    double volume = 1.0;
    for (int a = 0; a < g.dim(); ++a) volume *= g.extent(a);
    return 1e-12 / volume;  // 1e-12 x mean density of a unit-norm state
}

double NodePolicy::resolved_cap(const Grid& g) const {
    if (speed_cap > 0.0) return speed_cap;
    double widest = 0.0;
    for (int a = 0; a < g.dim(); ++a) widest = std::max(widest, g.extent(a));
    return 1e3 * widest;
}

namespace {

std::array<std::vector<cd>, kMaxDim> gradient_fields(const Grid& g, const std::vector<cd>& psi,
                                                     Topology topo) {
    std::array<std::vector<cd>, kMaxDim> grad;
    if (topo == Topology::periodic) {
        Fft fft(g);
        for (int a = 0; a < g.dim(); ++a) grad[a] = spectral_gradient(g, psi, a, fft);
    } else {
        for (int a = 0; a < g.dim(); ++a) grad[a] = central_gradient(g, psi, a, topo);
    }
    return grad;
}

// Shared assembly: given pointwise numerators Im[n_k] and the density-like
// denominator, fill a VelocityField with masking and speed capping.
VelocityField assemble(GridPtr grid, const PhysicalParams& params,
                       const std::array<std::vector<cd>, kMaxDim>& numer,
                       const std::vector<double>& denom, const NodePolicy& policy) {
    const Grid& g = *grid;
    VelocityField out;
    out.grid = grid;
    out.epsilon_node = policy.resolved_epsilon(g);
    out.speed_cap = policy.resolved_cap(g);
    out.mask.assign(g.size(), 0);
    for (int a = 0; a < g.dim(); ++a) out.v[a].assign(g.size(), 0.0);

    for (std::size_t f = 0; f < g.size(); ++f) {
        if (denom[f] < out.epsilon_node) continue;
        out.mask[f] = 1;
        double speed2 = 0.0;
        double comp[kMaxDim] = {};
        for (int a = 0; a < g.dim(); ++a) {
            comp[a] = params.hbar / params.masses[a] * numer[a][f].imag() / denom[f];
            if (!std::isfinite(comp[a])) throw StateError("non-finite velocity at unmasked point");
            speed2 += comp[a] * comp[a];
        }
        if (speed2 > out.speed_cap * out.speed_cap) {
            const double scale = out.speed_cap / std::sqrt(speed2);
            for (int a = 0; a < g.dim(); ++a) comp[a] *= scale;
            ++out.clamp_count;
        }
        for (int a = 0; a < g.dim(); ++a) out.v[a][f] = comp[a];
    }
    return out;
}

}  // namespace

VelocityField velocity_grid(const WaveFunction& psi, const NodePolicy& policy) {
    const Grid& g = psi.grid();
    auto grad = gradient_fields(g, psi.values(), psi.topology());
    // Im[grad/psi] = Im[conj(psi) grad] / |psi|^2
    std::array<std::vector<cd>, kMaxDim> numer;
    std::vector<double> denom(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) denom[f] = std::norm(psi.values()[f]);
    for (int a = 0; a < g.dim(); ++a) {
        numer[a].resize(g.size());
        for (std::size_t f = 0; f < g.size(); ++f)
            numer[a][f] = std::conj(psi.values()[f]) * grad[a][f];
    }
    return assemble(psi.grid_ptr(), psi.params(), numer, denom, policy);
}

VelocityField velocity_spinor_grid(const SpinorWaveFunction& chi, const NodePolicy& policy) {
    const Grid& g = chi.grid();
    auto grad_up = gradient_fields(g, chi.up(), Topology::periodic);
    auto grad_dn = gradient_fields(g, chi.down(), Topology::periodic);
    std::array<std::vector<cd>, kMaxDim> numer;
    std::vector<double> denom(g.size());
    for (std::size_t f = 0; f < g.size(); ++f)
        denom[f] = std::norm(chi.up()[f]) + std::norm(chi.down()[f]);
    for (int a = 0; a < g.dim(); ++a) {
        numer[a].resize(g.size());
        for (std::size_t f = 0; f < g.size(); ++f)
            numer[a][f] = std::conj(chi.up()[f]) * grad_up[a][f] +
                          std::conj(chi.down()[f]) * grad_dn[a][f];
    }
    return assemble(chi.grid_ptr(), chi.params(), numer, denom, policy);
}

std::array<std::vector<double>, kMaxDim> current_grid(const WaveFunction& psi) {
    const Grid& g = psi.grid();
    auto grad = gradient_fields(g, psi.values(), psi.topology());
    std::array<std::vector<double>, kMaxDim> out;
    const auto& p = psi.params();
    for (int a = 0; a < g.dim(); ++a) {
        out[a].resize(g.size());
        for (std::size_t f = 0; f < g.size(); ++f) {
            out[a][f] = p.hbar / p.masses[a] * (std::conj(psi.values()[f]) * grad[a][f]).imag();
        }
    }
    return out;
}

GuidanceField::GuidanceField(const FrameSeries& series, NodePolicy policy)
    : series_(series),
      epsilon_(policy.resolved_epsilon(series.grid())),
      cap_(policy.resolved_cap(series.grid())) {}

std::shared_ptr<const GuidanceField::FrameData> GuidanceField::frame_data(std::size_t i) const {
    auto it = cache_.find(i);
    if (it == cache_.end()) {
        auto data = std::make_shared<FrameData>();
        data->psi = series_.values(i);
        data->grad = gradient_fields(series_.grid(), *data->psi, series_.topology());
        it = cache_.emplace(i, std::move(data)).first;
        // oldest-first eviction; holders keep their shared_ptr alive
        while (cache_.size() > 6) cache_.erase(cache_.begin());
    }
    return it->second;
}

void GuidanceField::prepare(double t0, double t1) const {
    const auto& times = series_.times();
    const double tiny = 1e-9 * series_.frame_interval();
    for (std::size_t j = 0; j + 1 < times.size(); ++j) {
        if (times[j + 1] >= t0 - tiny && times[j] <= t1 + tiny) {
            frame_data(j);
            frame_data(j + 1);
        }
    }
}

Point GuidanceField::velocity(double t, const Point& q) const {
    const Grid& g = series_.grid();
    if (!g.inside(q)) throw BoundaryError("configuration point outside grid");
    const auto& times = series_.times();
    const double tiny = 1e-9 * series_.frame_interval();
    if (t < times.front() - tiny || t > times.back() + tiny)
        throw StateError("time outside the stored frame span");

    // bracketing frames and linear weight
    std::size_t i = 0;
    if (t >= times.back()) {
        i = times.size() - 2;
    } else if (t > times.front()) {
        i = std::size_t((t - times.front()) / series_.frame_interval());
        if (i >= times.size() - 1) i = times.size() - 2;
        while (i > 0 && times[i] > t) --i;
        while (i + 2 < times.size() && times[i + 1] < t) ++i;
    }
    const double tau = std::clamp((t - times[i]) / (times[i + 1] - times[i]), 0.0, 1.0);

    const auto lo_ptr = frame_data(i);
    const auto hi_ptr = frame_data(i + 1);
    const FrameData& lo = *lo_ptr;
    const FrameData& hi = *hi_ptr;
    const Topology topo = series_.topology();

    const cd psi_lo = interp_complex(g, *lo.psi, q, topo);
    const cd psi_hi = interp_complex(g, *hi.psi, q, topo);
    const cd psi = (1.0 - tau) * psi_lo + tau * psi_hi;
    const double rho = std::norm(psi);
    if (rho < epsilon_) throw NodeEncounter(q, t, "interpolated density below node threshold");

    const auto& p = series_.params();
    Point v{};
    double speed2 = 0.0;
    for (int a = 0; a < g.dim(); ++a) {
        const cd g_lo = interp_complex(g, lo.grad[a], q, topo);
        const cd g_hi = interp_complex(g, hi.grad[a], q, topo);
        const cd grad = (1.0 - tau) * g_lo + tau * g_hi;
        v[a] = p.hbar / p.masses[a] * (std::conj(psi) * grad).imag() / rho;
        speed2 += v[a] * v[a];
    }
    if (speed2 > cap_ * cap_) {
        const double scale = cap_ / std::sqrt(speed2);
        for (int a = 0; a < g.dim(); ++a) v[a] *= scale;
        clamp_count_.fetch_add(1, std::memory_order_relaxed);
    }
    return v;
}

Point velocity_at(const FrameSeries& series, double t, const Point& q, const NodePolicy& policy) {
    GuidanceField field(series, policy);
    return field.velocity(t, q);
}

NonlocalityResult nonlocality_probe(const WaveFunction& psi2, double q1,
                                    const std::vector<double>& q2_list,
                                    const NodePolicy& policy) {
    const Grid& g = psi2.grid();
    if (g.dim() != 2) throw GridError("nonlocality probe needs a two-particle 1D+1D state");
    const double eps = policy.resolved_epsilon(g);
    auto grad1 = gradient_fields(g, psi2.values(), psi2.topology())[0];

    NonlocalityResult out;
    out.v1.reserve(q2_list.size());
    const auto& p = psi2.params();
    for (double q2 : q2_list) {
        const Point q{q1, q2, 0.0};
        const cd psi = interp_complex(g, psi2.values(), q, psi2.topology());
        const double rho = std::norm(psi);
        if (rho < eps) throw NodeEncounter(q, 0.0, "probe point sits on a node");
        const cd d1 = interp_complex(g, grad1, q, psi2.topology());
        out.v1.push_back(p.hbar / p.masses[0] * (std::conj(psi) * d1).imag() / rho);
    }
    if (!out.v1.empty()) {
        auto [lo, hi] = std::minmax_element(out.v1.begin(), out.v1.end());
        out.spread = *hi - *lo;
    }
    return out;
}

}  // namespace pilotwave
