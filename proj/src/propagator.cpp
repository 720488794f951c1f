#include "pilotwave/propagator.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "pilotwave/errors.hpp"

namespace pilotwave {

namespace {

constexpr double kBoundaryAbortMass = 1e-6;
constexpr double kCnResidualTol = 1e-12;

}  // namespace

Propagator::Propagator(const Potential& v, const PhysicalParams& params, Method method, double dt)
    : grid_(v.grid_ptr()), method_(method), dt_(dt), hbar_(params.hbar) {
    const Grid& g = *grid_;
    validate_params(params, g.dim());
    if (!(dt > 0.0)) throw StateError("dt must be positive");

    if (method_ == Method::split_step_spectral) {
        // dt max|V|/hbar < pi, else the potential phase aliases within one step
        if (dt * v.max_abs() / hbar_ >= std::numbers::pi)
            throw StateError("dt * max|V| / hbar exceeds the phase-wrap guard");
        fft_ = std::make_unique<Fft>(g);
        half_v_phase_.resize(g.size());
        for (std::size_t f = 0; f < g.size(); ++f) {
            half_v_phase_[f] = std::exp(cd(0.0, -v.values()[f] * dt / (2.0 * hbar_)));
        }
        kinetic_phase_.resize(g.size());
        const double inv_n = 1.0 / double(g.size());
        std::array<std::size_t, kMaxDim> idx{};
        for (std::size_t f = 0; f < g.size(); ++f) {
            double w = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                const double k = g.wavenumber(a, idx[a]);
                w += hbar_ * k * k / (2.0 * params.masses[a]);
            }
            kinetic_phase_[f] = std::exp(cd(0.0, -w * dt)) * inv_n;
            for (int a = g.dim() - 1; a >= 0; --a) {
                if (++idx[a] < g.points(a)) break;
                idx[a] = 0;
            }
        }
    } else {
        if (g.dim() != 1) throw StateError("crank-nicolson runs on 1D grids only");
        // Cayley form (I + i a H) psi' = (I - i a H) psi, a = dt/2hbar, on the
        // interior j=1..N-1; both walls (x=lower stored, x=upper implicit) are
        // pinned to zero.
        const double a = dt / (2.0 * hbar_);
        const double c = hbar_ * hbar_ / (2.0 * params.masses[0] * g.dx(0) * g.dx(0));
        cn_off_a_ = cd(0.0, -a * c);
        cn_off_b_ = cd(0.0, a * c);
        cn_diag_a_.resize(g.size());
        cn_diag_b_.resize(g.size());
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double h = 2.0 * c + v.values()[j];
            cn_diag_a_[j] = cd(1.0, a * h);
            cn_diag_b_[j] = cd(1.0, -a * h);
        }
        scratch_.resize(3 * g.size());
    }
}

void Propagator::step(std::vector<cd>& psi) const {
    if (psi.size() != grid_->size()) throw ShapeError("state size does not match grid");
    if (method_ == Method::split_step_spectral)
        step_spectral(psi);
    else
        step_cn(psi);
}

void Propagator::step_spectral(std::vector<cd>& psi) const {
    for (std::size_t f = 0; f < psi.size(); ++f) psi[f] *= half_v_phase_[f];
    fft_->forward(psi.data());
    for (std::size_t f = 0; f < psi.size(); ++f) psi[f] *= kinetic_phase_[f];
    fft_->backward(psi.data());
    for (std::size_t f = 0; f < psi.size(); ++f) psi[f] *= half_v_phase_[f];
}

void Propagator::step_cn(std::vector<cd>& psi) const {
    const std::size_t n = grid_->size();
    cd* rhs = scratch_.data();
    cd* cp = rhs + n;
    cd* x = cp + n;
    psi[0] = 0.0;  // wall point

    // rhs = B psi with psi_0 = psi_N = 0
    for (std::size_t j = 1; j < n; ++j) {
        cd acc = cn_diag_b_[j] * psi[j];
        if (j > 1) acc += cn_off_b_ * psi[j - 1];
        if (j + 1 < n) acc += cn_off_b_ * psi[j + 1];
        rhs[j] = acc;
    }

    // Thomas sweep over j=1..N-1
    cp[1] = cn_off_a_ / cn_diag_a_[1];
    x[1] = rhs[1] / cn_diag_a_[1];
    for (std::size_t j = 2; j < n; ++j) {
        const cd denom = cn_diag_a_[j] - cn_off_a_ * cp[j - 1];
        cp[j] = cn_off_a_ / denom;
        x[j] = (rhs[j] - cn_off_a_ * x[j - 1]) / denom;
    }
    for (std::size_t j = n - 2; j >= 1; --j) x[j] -= cp[j] * x[j + 1];

    double resid = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
        cd r = cn_diag_a_[j] * x[j] - rhs[j];
        if (j > 1) r += cn_off_a_ * x[j - 1];
        if (j + 1 < n) r += cn_off_a_ * x[j + 1];
        resid = std::max(resid, std::abs(r));
    }
    if (resid > kCnResidualTol) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "tridiagonal solve residual %.2e exceeds 1e-12", resid);
        throw SolveError(buf);
    }
    for (std::size_t j = 1; j < n; ++j) psi[j] = x[j];
}

WaveFunction step_split_spectral(const WaveFunction& psi, const Potential& v, double dt) {
    Propagator prop(v, psi.params(), Method::split_step_spectral, dt);
    auto vals = psi.values();
    prop.step(vals);
    return WaveFunction::from_values(psi.grid_ptr(), psi.params(), std::move(vals),
                                     psi.time_tag() + dt, Topology::periodic);
}

WaveFunction step_crank_nicolson(const WaveFunction& psi, const Potential& v, double dt) {
    Propagator prop(v, psi.params(), Method::crank_nicolson_1d, dt);
    auto vals = psi.values();
    prop.step(vals);
    return WaveFunction::from_values(psi.grid_ptr(), psi.params(), std::move(vals),
                                     psi.time_tag() + dt, Topology::dirichlet);
}

FrameSeries evolve(const WaveFunction& psi0, const Potential& v, const PropagatorSpec& spec) {
    const Grid& g = psi0.grid();
    if (!g.compatible(v.grid())) throw GridError("state and potential grids differ");
    validate_spec(spec, g);

    Propagator prop(v, psi0.params(), spec.method, spec.dt);
    const double interval = spec.dt * double(spec.frame_stride);
    const std::size_t n_frames = std::size_t(std::floor(spec.total_time / interval + 1e-9)) + 1;
    const double t0 = psi0.time_tag();

    FrameSeries series(psi0.grid_ptr(), psi0.params(), prop.topology(), spec);
    std::vector<cd> state = psi0.values();
    // The contamination guard only makes sense for states that start clear of
    // the edges; delocalized states (grid eigenmodes) always carry edge mass.
    const bool guard_armed = raw_boundary_mass(g, state) <= kBoundaryAbortMass;
    for (std::size_t i = 0; i < n_frames; ++i) {
        if (i > 0) {
            for (std::size_t s = 0; s < spec.frame_stride; ++s) prop.step(state);
        }
        const double nrm = raw_norm(g, state);
        if (!std::isfinite(nrm)) throw StateError("non-finite amplitudes during evolution");
        const double edge = guard_armed ? raw_boundary_mass(g, state) : 0.0;
        if (edge > kBoundaryAbortMass) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "boundary mass %.2e exceeds 1e-6 at t=%g", edge,
                          t0 + double(i) * interval);
            throw BoundaryError(buf);
        }
        series.append(t0 + double(i) * interval, state);
        if (series.max_frame_delta() > spec.frame_delta_guard) {
            char buf[112];
            std::snprintf(buf, sizeof buf,
                          "frame-to-frame change %.3f exceeds guard %.3f; lower frame_stride",
                          series.max_frame_delta(), spec.frame_delta_guard);
            throw StateError(buf);
        }
    }
    return series;
}

double energy_expectation(const WaveFunction& psi, const Potential& v) {
    const Grid& g = psi.grid();
    if (!g.compatible(v.grid())) throw GridError("state and potential grids differ");
    double epot = 0.0;
    for (std::size_t f = 0; f < g.size(); ++f) {
        epot += v.values()[f] * std::norm(psi.values()[f]);
    }
    epot *= g.cell_volume();

    Fft fft(g);
    std::vector<cd> hat = psi.values();
    fft.forward(hat.data());
    double ekin = 0.0;
    std::array<std::size_t, kMaxDim> idx{};
    const auto& p = psi.params();
    for (std::size_t f = 0; f < hat.size(); ++f) {
        double e = 0.0;
        for (int a = 0; a < g.dim(); ++a) {
            const double k = g.wavenumber(a, idx[a]);
            e += p.hbar * p.hbar * k * k / (2.0 * p.masses[a]);
        }
        ekin += e * std::norm(hat[f]);
        for (int a = g.dim() - 1; a >= 0; --a) {
            if (++idx[a] < g.points(a)) break;
            idx[a] = 0;
        }
    }
    ekin *= g.cell_volume() / double(g.size());
    return ekin + epot;
}

}  // namespace pilotwave
