#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "pilotwave/errors.hpp"
#include "pilotwave/ensemble.hpp"
#include "pilotwave/interpolate.hpp"
#include "pilotwave/polar.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/spectral.hpp"

namespace pilotwave {

namespace {

std::array<double, kMaxDim> curvature_weights(const PhysicalParams& p, int dim) {
    std::array<double, kMaxDim> w{};
    for (int a = 0; a < dim; ++a) w[a] = p.hbar * p.hbar / (2.0 * p.masses[a]);
    return w;
}

Point wrap_into_box(const Grid& g, Point q) {
    for (int a = 0; a < g.dim(); ++a) {
        const double lo = g.lower(a);
        const double len = g.extent(a);
        double r = q[a] - len * std::floor((q[a] - lo) / len);
        if (r >= lo + len) r = lo;  // floor rounding at the seam
        q[a] = r;
    }
    return q;
}

}  // namespace

struct QuantumForceField::FrameData {
    std::vector<double> r;
    std::vector<double> w;  // sum_a (hbar^2 / 2 m_a) d^2_a r
    std::array<std::vector<double>, kMaxDim> gr;
    std::array<std::vector<double>, kMaxDim> gw;
};

QuantumForceField::QuantumForceField(const FrameSeries& series, const PhysicalParams& params,
                                     NodePolicy policy)
    : series_(series), params_(params), epsilon_(policy.resolved_epsilon(series.grid())) {
    validate_params(params_, series.grid().dim());
    if (series.size() < 2) throw StateError("force field needs at least two stored frames");
}

std::shared_ptr<const QuantumForceField::FrameData> QuantumForceField::frame_data(
    std::size_t i) const {
    auto it = cache_.find(i);
    if (it != cache_.end()) return it->second;

    const Grid& g = series_.grid();
    auto psi = series_.values(i);
    auto data = std::make_shared<FrameData>();
    data->r.resize(g.size());
    for (std::size_t f = 0; f < g.size(); ++f) data->r[f] = std::abs((*psi)[f]);

    const auto wts = curvature_weights(params_, g.dim());
    if (series_.topology() == Topology::periodic) {
        Fft fft(g);
        data->w = spectral_weighted_laplacian_real(g, data->r, wts, fft);
        for (int a = 0; a < g.dim(); ++a) {
            data->gr[a] = spectral_gradient_real(g, data->r, a, fft);
            data->gw[a] = spectral_gradient_real(g, data->w, a, fft);
        }
    } else {
        data->w = central_weighted_laplacian_real(g, data->r, wts, series_.topology());
        for (int a = 0; a < g.dim(); ++a) {
            data->gr[a] = central_gradient_real(g, data->r, a, series_.topology());
            data->gw[a] = central_gradient_real(g, data->w, a, series_.topology());
        }
    }

    while (cache_.size() >= 6) cache_.erase(cache_.begin());
    cache_.emplace(i, data);
    return cache_.find(i)->second;
}

void QuantumForceField::blend(double t, const Point& q, double* r, double* w, Point* gr,
                              Point* gw) const {
    const Grid& g = series_.grid();
    if (!g.inside(q)) throw BoundaryError("force evaluation point left the grid");
    const auto& times = series_.times();
    if (t < times.front() - 1e-12 || t > times.back() + 1e-12)
        throw StateError("force evaluation time outside the stored evolution");

    std::size_t i = 0;
    if (t >= times.back()) {
        i = times.size() - 2;
    } else if (t > times.front()) {
        const double span = times[1] - times[0];
        i = std::min(std::size_t((t - times.front()) / span), times.size() - 2);
        while (i > 0 && t < times[i]) --i;
        while (i + 2 < times.size() && t >= times[i + 1]) ++i;
    }
    const double tau = std::clamp((t - times[i]) / (times[i + 1] - times[i]), 0.0, 1.0);

    auto lo = frame_data(i);
    auto hi = frame_data(i + 1);
    const Topology topo = series_.topology();

    auto mix = [tau](double a, double b) { return (1.0 - tau) * a + tau * b; };
    *r = mix(interp_real(g, lo->r, q, topo), interp_real(g, hi->r, q, topo));
    *w = mix(interp_real(g, lo->w, q, topo), interp_real(g, hi->w, q, topo));
    for (int a = 0; a < g.dim(); ++a) {
        (*gr)[a] = mix(interp_real(g, lo->gr[a], q, topo), interp_real(g, hi->gr[a], q, topo));
        (*gw)[a] = mix(interp_real(g, lo->gw[a], q, topo), interp_real(g, hi->gw[a], q, topo));
    }
}

Point QuantumForceField::force(double t, const Point& q) const {
    double r = 0.0, w = 0.0;
    Point gr{}, gw{};
    blend(t, q, &r, &w, &gr, &gw);
    if (r * r < epsilon_)
        throw NodeEncounter(q, t, "force evaluation inside the node region");
    Point f{};
    // U = -w / r, so -dU = (r dw - w dr) / r^2
    for (int a = 0; a < series_.grid().dim(); ++a) f[a] = (r * gw[a] - w * gr[a]) / (r * r);
    return f;
}

double QuantumForceField::potential(double t, const Point& q) const {
    double r = 0.0, w = 0.0;
    Point gr{}, gw{};
    blend(t, q, &r, &w, &gr, &gw);
    if (r * r < epsilon_)
        throw NodeEncounter(q, t, "potential evaluation inside the node region");
    return -w / r;
}

Point quantum_force(const FrameSeries& series, double t, const Point& q,
                    const PhysicalParams& params) {
    return QuantumForceField(series, params).force(t, q);
}

namespace {

std::vector<Point> second_order_impl(const FrameSeries& series, const Potential& v,
                                     const Point& q0, const Point& v0, double dt) {
    const Grid& g = series.grid();
    if (!g.compatible(v.grid())) throw ShapeError("potential grid does not match the evolution");
    if (!g.inside(q0)) throw BoundaryError("start point outside the grid");
    if (!(dt > 0.0)) throw StateError("time step must be positive");
    const Topology topo = series.topology();
    const PhysicalParams& params = series.params();

    QuantumForceField qf(series, params);
    std::array<std::vector<double>, kMaxDim> gv;
    for (int a = 0; a < g.dim(); ++a) gv[a] = clamped_gradient_real(g, v.values(), a);

    auto accel = [&](double t, Point p) {
        if (topo == Topology::periodic) {
            p = wrap_into_box(g, p);
        } else if (!g.inside(p)) {
            throw BoundaryError("second-order path left the grid");
        }
        const Point fq = qf.force(t, p);
        Point a{};
        for (int ax = 0; ax < g.dim(); ++ax)
            a[ax] = (fq[ax] - interp_real(g, gv[ax], p, topo)) / params.masses[ax];
        return a;
    };

    const auto& times = series.times();
    std::vector<Point> out;
    out.reserve(times.size());
    out.push_back(q0);

    Point q = q0;
    Point vel = v0;
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double t0 = times[k];
        const double t1 = times[k + 1];
        const auto substeps = std::size_t(std::max(1.0, std::ceil((t1 - t0) / dt - 1e-9)));
        const double h = (t1 - t0) / double(substeps);
        double t = t0;
        for (std::size_t s = 0; s < substeps; ++s) {
            const Point k1q = vel, k1v = accel(t, q);
            Point q2{}, v2 = vel;
            for (int a = 0; a < g.dim(); ++a) {
                q2[a] = q[a] + 0.5 * h * k1q[a];
                v2[a] = vel[a] + 0.5 * h * k1v[a];
            }
            const Point k2q = v2, k2v = accel(t + 0.5 * h, q2);
            Point q3{}, v3 = vel;
            for (int a = 0; a < g.dim(); ++a) {
                q3[a] = q[a] + 0.5 * h * k2q[a];
                v3[a] = vel[a] + 0.5 * h * k2v[a];
            }
            const Point k3q = v3, k3v = accel(t + 0.5 * h, q3);
            Point q4{}, v4 = vel;
            for (int a = 0; a < g.dim(); ++a) {
                q4[a] = q[a] + h * k3q[a];
                v4[a] = vel[a] + h * k3v[a];
            }
            const Point k4q = v4, k4v = accel(t + h, q4);
            for (int a = 0; a < g.dim(); ++a) {
                q[a] += h / 6.0 * (k1q[a] + 2.0 * k2q[a] + 2.0 * k3q[a] + k4q[a]);
                vel[a] += h / 6.0 * (k1v[a] + 2.0 * k2v[a] + 2.0 * k3v[a] + k4v[a]);
            }
            if (topo == Topology::periodic) q = wrap_into_box(g, q);
            t = t0 + double(s + 1) * h;
        }
        if (topo != Topology::periodic && !g.inside(q))
            throw BoundaryError("second-order path left the grid");
        out.push_back(q);
    }
    return out;
}

}  // namespace

std::vector<Point> second_order_trajectory(const FrameSeries& series, const Potential& v,
                                           const Point& q0, double dt) {
    GuidanceField guide(series);
    const Point v0 = guide.velocity(series.times().front(), q0);
    return second_order_impl(series, v, q0, v0, dt);
}

std::vector<Point> second_order_trajectory(const FrameSeries& series, const Potential& v,
                                           const Point& q0, const Point& v0, double dt) {
    return second_order_impl(series, v, q0, v0, dt);
}

ClassicalPath classical_trajectory(const Potential& v, const Point& q0, const Point& p0,
                                   const PhysicalParams& params, double total_time, double dt) {
    const Grid& g = v.grid();
    validate_params(params, g.dim());
    if (!(dt > 0.0) || !(total_time >= dt)) throw StateError("bad classical time step or span");
    if (!g.inside(q0)) throw BoundaryError("start point outside the grid");

    std::array<std::vector<double>, kMaxDim> gv;
    for (int a = 0; a < g.dim(); ++a) gv[a] = clamped_gradient_real(g, v.values(), a);

    auto force = [&](const Point& p) {
        if (!g.inside(p)) throw BoundaryError("classical path left the grid");
        Point f{};
        for (int a = 0; a < g.dim(); ++a)
            f[a] = -interp_real(g, gv[a], p, Topology::dirichlet);
        return f;
    };

    const auto steps = std::size_t(std::floor(total_time / dt + 1e-9));
    ClassicalPath path;
    path.times.reserve(steps + 1);
    path.q.reserve(steps + 1);
    path.p.reserve(steps + 1);
    Point q = q0, p = p0;
    path.times.push_back(0.0);
    path.q.push_back(q);
    path.p.push_back(p);

    for (std::size_t s = 0; s < steps; ++s) {
        Point k1q{}, k1p = force(q);
        for (int a = 0; a < g.dim(); ++a) k1q[a] = p[a] / params.masses[a];
        Point q2{}, p2{};
        for (int a = 0; a < g.dim(); ++a) {
            q2[a] = q[a] + 0.5 * dt * k1q[a];
            p2[a] = p[a] + 0.5 * dt * k1p[a];
        }
        Point k2q{}, k2p = force(q2);
        for (int a = 0; a < g.dim(); ++a) k2q[a] = p2[a] / params.masses[a];
        Point q3{}, p3{};
        for (int a = 0; a < g.dim(); ++a) {
            q3[a] = q[a] + 0.5 * dt * k2q[a];
            p3[a] = p[a] + 0.5 * dt * k2p[a];
        }
        Point k3q{}, k3p = force(q3);
        for (int a = 0; a < g.dim(); ++a) k3q[a] = p3[a] / params.masses[a];
        Point q4{}, p4{};
        for (int a = 0; a < g.dim(); ++a) {
            q4[a] = q[a] + dt * k3q[a];
            p4[a] = p[a] + dt * k3p[a];
        }
        Point k4q{}, k4p = force(q4);
        for (int a = 0; a < g.dim(); ++a) k4q[a] = p4[a] / params.masses[a];
        for (int a = 0; a < g.dim(); ++a) {
            q[a] += dt / 6.0 * (k1q[a] + 2.0 * k2q[a] + 2.0 * k3q[a] + k4q[a]);
            p[a] += dt / 6.0 * (k1p[a] + 2.0 * k2p[a] + 2.0 * k3p[a] + k4p[a]);
        }
        if (!g.inside(q)) throw BoundaryError("classical path left the grid");
        path.times.push_back(double(s + 1) * dt);
        path.q.push_back(q);
        path.p.push_back(p);
    }
    return path;
}

std::vector<LimitCase> classical_limit_study(const LimitScenario& sc,
                                             const std::vector<double>& scales) {
    if (!sc.grid) throw StateError("limit scenario has no grid");
    if (scales.empty()) throw StateError("no mass scales given");
    const Grid& g = *sc.grid;
    if (!g.compatible(sc.potential.grid())) throw ShapeError("potential grid mismatch");

    std::array<std::vector<double>, kMaxDim> gv;
    for (int a = 0; a < g.dim(); ++a) gv[a] = clamped_gradient_real(g, sc.potential.values(), a);

    std::vector<LimitCase> out;
    out.reserve(scales.size());
    for (const double scale : scales) {
        if (!(scale > 0.0)) throw StateError("mass scales must be positive");
        PhysicalParams params = sc.params;
        for (int a = 0; a < g.dim(); ++a) params.masses[a] *= scale;

        Point momentum{};
        for (int a = 0; a < g.dim(); ++a)
            momentum[a] = params.masses[a] * sc.velocity[a] / params.hbar;
        auto psi = WaveFunction::gaussian(sc.grid, params, sc.center, sc.sigma, momentum);

        // keep frames close enough for the guard as the kinetic scale grows
        const double energy = std::max(energy_expectation(psi, sc.potential), 1e-6);
        const auto stride =
            std::size_t(std::clamp(std::floor(0.05 / (sc.dt * energy)), 1.0, 100.0));
        PropagatorSpec pspec;
        pspec.dt = sc.dt;
        pspec.total_time = sc.total_time;
        pspec.frame_stride = stride;
        auto series = evolve(psi, sc.potential, pspec);

        Point q0 = sc.center;
        q0[0] += sc.offset * sc.sigma[0];
        GuidanceField guide(series);
        const Point v0 = guide.velocity(series.times().front(), q0);

        EnsembleSpec espec;
        espec.base_dt = sc.dt;
        auto bohm = integrate_trajectory(series, q0, espec);
        if (bohm.status != PathStatus::ok)
            throw StateError(std::string("probe trajectory ended early: ") +
                             to_string(bohm.status));

        Point p0{};
        for (int a = 0; a < g.dim(); ++a) p0[a] = params.masses[a] * v0[a];
        auto newton = classical_trajectory(sc.potential, q0, p0, params, sc.total_time, sc.dt);

        QuantumForceField qf(series, params);
        const auto& times = series.times();
        LimitCase row;
        row.scale = scale;
        for (std::size_t f = 0; f < times.size(); ++f) {
            const double t = times[f];
            const auto ci =
                std::min(std::size_t(std::llround(t / sc.dt)), newton.q.size() - 1);
            double dev2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                if (!bohm.wraps.empty() && bohm.wraps[f][a] != 0)
                    throw BoundaryError("probe trajectory wrapped around the box");
                const double d = bohm.positions[f][a] - newton.q[ci][a];
                dev2 += d * d;
            }
            row.max_deviation = std::max(row.max_deviation, std::sqrt(dev2));

            const Point fq = qf.force(t, bohm.positions[f]);
            double nq2 = 0.0, ncl2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                nq2 += fq[a] * fq[a];
                const double fc = interp_real(g, gv[a], bohm.positions[f], series.topology());
                ncl2 += fc * fc;
            }
            const double nq = std::sqrt(nq2), ncl = std::sqrt(ncl2);
            const double ratio =
                ncl > 1e-12 ? nq / ncl : (nq > 1e-12 ? std::numeric_limits<double>::infinity()
                                                     : 0.0);
            row.max_force_ratio = std::max(row.max_force_ratio, ratio);
        }
        out.push_back(row);
    }
    return out;
}

void export_csv(const std::vector<LimitCase>& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << "scale,max_deviation,max_force_ratio\n";
    out.precision(17);
    for (const auto& row : table)
        out << row.scale << ',' << row.max_deviation << ',' << row.max_force_ratio << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace pilotwave
