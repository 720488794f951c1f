#include "pilotwave/measurement.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <memory>
#include <numbers>

#include "json.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/interpolate.hpp"

namespace pilotwave {

namespace {

bool divides(double whole, double part) {
    if (!(part > 0.0) || !(whole > 0.0)) return false;
    const double r = whole / part;
    return std::abs(r - std::round(r)) < 1e-9 * std::max(1.0, r);
}

struct Phase {
    double gain;  // coupling scale; 0 = free drift
    double duration;
    double dt;
    double frame_time;
};

std::vector<Phase> schedule(const PointerExperimentSpec& s) {
    std::vector<Phase> phases;
    phases.push_back({1.0, s.interaction_time, s.pulse_dt, s.pulse_frame_time});
    phases.push_back({0.0, s.drift_time, s.drift_dt, s.drift_frame_time});
    if (s.reversal_gain != 0.0)
        phases.push_back({s.reversal_gain, s.interaction_time, s.pulse_dt, s.pulse_frame_time});
    if (s.revival_drift > 0.0)
        phases.push_back({0.0, s.revival_drift, s.drift_dt, s.drift_frame_time});
    return phases;
}

// c * exp(-(x-c)^2/(4 sigma^2) + i k x) along axis 0 times the pointer packet
// along axis 1, normalized by construction of WaveFunction.
WaveFunction branch_state(const PointerExperimentSpec& s, const BranchSpec& b) {
    const Grid& g = *s.grid;
    const std::size_t nx = g.points(0), ny = g.points(1);
    std::vector<cd> vals(g.size());
    std::vector<cd> row(nx);
    for (std::size_t i = 0; i < nx; ++i) {
        const double x = g.coord(0, i);
        const double u = x - b.center;
        row[i] = std::polar(std::exp(-u * u / (4.0 * b.sigma * b.sigma)),
                            b.momentum * x / s.params.hbar);
    }
    for (std::size_t i = 0; i < nx; ++i) {
        for (std::size_t j = 0; j < ny; ++j) {
            const double y = g.coord(1, j);
            vals[i * ny + j] =
                row[i] * std::exp(-y * y / (4.0 * s.pointer_sigma * s.pointer_sigma));
        }
    }
    return WaveFunction::from_values(s.grid, s.params, std::move(vals));
}

Potential coupling_potential(const PointerExperimentSpec& s, double gain) {
    const Grid& g = *s.grid;
    if (gain == 0.0) return Potential::free_space(s.grid);
    std::vector<double> v(g.size());
    const std::size_t ny = g.points(1);
    for (std::size_t i = 0; i < g.points(0); ++i) {
        const double x = g.coord(0, i);
        for (std::size_t j = 0; j < ny; ++j) v[i * ny + j] = gain * s.coupling * x * g.coord(1, j);
    }
    return Potential::tabulated(s.grid, std::move(v));
}

// Evolve through every segment with state handoff, stitching the stored
// frames (minus the duplicated segment boundary) into one series.
FrameSeries evolve_through(const WaveFunction& initial, const PointerExperimentSpec& s,
                           const std::vector<Phase>& phases,
                           const std::vector<Potential>& pots) {
    double total = 0.0;
    for (const auto& p : phases) total += p.duration;
    PropagatorSpec stitched_spec{Method::split_step_spectral, s.pulse_dt, total,
                                 std::size_t(std::llround(s.pulse_frame_time / s.pulse_dt)),
                                 s.frame_delta_guard};
    FrameSeries out(s.grid, s.params, Topology::periodic, stitched_spec);

    WaveFunction state = initial;
    for (std::size_t k = 0; k < phases.size(); ++k) {
        const Phase& p = phases[k];
        PropagatorSpec ps{Method::split_step_spectral, p.dt, p.duration,
                          std::size_t(std::llround(p.frame_time / p.dt)), s.frame_delta_guard};
        FrameSeries seg = evolve(state, pots[k], ps);
        for (std::size_t i = (k == 0 ? 0 : 1); i < seg.size(); ++i)
            out.append(seg.time(i), *seg.values(i));
        state = seg.frame(seg.size() - 1);
    }
    return out;
}

// |psi|^2 with x integrated out, per pointer cell.
std::vector<double> pointer_marginal(const Grid& g, const std::vector<cd>& vals) {
    const std::size_t nx = g.points(0), ny = g.points(1);
    std::vector<double> m(ny, 0.0);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) m[j] += std::norm(vals[i * ny + j]);
    const double dx = g.dx(0);
    for (auto& v : m) v *= dx;
    return m;
}

double min_mass_overlap(const std::vector<double>& a, const std::vector<double>& b, double dy) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) acc += std::min(a[j], b[j]);
    return acc * dy;
}

// The x-row of the joint field interpolated at y; grid coordinates along x
// are exact stencil nodes, so only the pointer axis actually interpolates.
std::vector<cd> slice_at(const Grid& g, const std::vector<cd>& vals, double y, Topology topo) {
    std::vector<cd> out(g.points(0));
    for (std::size_t i = 0; i < g.points(0); ++i)
        out[i] = interp_complex(g, vals, Point{g.coord(0, i), y, 0.0}, topo);
    return out;
}

double slice_mass(const std::vector<cd>& slice, double dx) {
    double acc = 0.0;
    for (const cd& v : slice) acc += std::norm(v);
    return acc * dx;
}

BranchDecomposition decompose(const Grid& g, const std::vector<cd>& full,
                              const std::vector<std::shared_ptr<const std::vector<cd>>>& branches,
                              const std::vector<cd>& amps, double threshold) {
    const std::size_t nb = branches.size();
    const std::size_t ny = g.points(1);
    const double dy = g.dx(1);

    BranchDecomposition d;
    d.weights.resize(nb);
    d.marginals.resize(nb);
    d.supports.resize(nb);
    d.centers.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        d.weights[b] = std::norm(amps[b]);
        d.marginals[b] = pointer_marginal(g, *branches[b]);
        const auto& m = d.marginals[b];
        double mass = 0.0, mean = 0.0;
        for (std::size_t j = 0; j < ny; ++j) {
            mass += m[j] * dy;
            mean += m[j] * dy * g.coord(1, j);
        }
        d.centers[b] = mean / std::max(mass, 1e-300);
        // trim a quarter of the overlap threshold off each tail
        const double trim = 0.25 * threshold * mass;
        double cum = 0.0;
        std::size_t lo = 0;
        for (; lo + 1 < ny; ++lo) {
            cum += m[lo] * dy;
            if (cum > trim) break;
        }
        cum = 0.0;
        std::size_t hi = ny - 1;
        for (; hi > 0; --hi) {
            cum += m[hi] * dy;
            if (cum > trim) break;
        }
        d.supports[b] = {g.coord(1, lo), g.coord(1, hi)};
    }

    d.max_pairwise_overlap = 0.0;
    for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = a + 1; b < nb; ++b)
            d.max_pairwise_overlap = std::max(
                d.max_pairwise_overlap, min_mass_overlap(d.marginals[a], d.marginals[b], dy));
    d.disjoint = d.max_pairwise_overlap < threshold;

    d.order.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) d.order[b] = b;
    std::sort(d.order.begin(), d.order.end(),
              [&](std::size_t a, std::size_t b) { return d.centers[a] < d.centers[b]; });
    for (std::size_t k = 0; k + 1 < nb; ++k)
        d.boundaries.push_back(0.5 * (d.supports[d.order[k]][1] + d.supports[d.order[k + 1]][0]));

    double err = 0.0;
    for (std::size_t f = 0; f < full.size(); ++f) {
        cd sum{};
        for (std::size_t b = 0; b < nb; ++b) sum += amps[b] * (*branches[b])[f];
        err += std::norm(full[f] - sum);
    }
    d.reconstruction_error = std::sqrt(err * g.cell_volume());
    return d;
}

int classify_region(double y, const BranchDecomposition& d) {
    std::size_t k = std::size_t(
        std::upper_bound(d.boundaries.begin(), d.boundaries.end(), y) - d.boundaries.begin());
    return int(d.order[k]);
}

int classify_nearest(double y, const BranchDecomposition& d) {
    std::size_t best = 0;
    for (std::size_t b = 1; b < d.centers.size(); ++b)
        if (std::abs(y - d.centers[b]) < std::abs(y - d.centers[best])) best = b;
    return int(best);
}

bool wrapped_pointer(const TrajectorySet& t, std::size_t i) {
    if (t.wraps[i].empty()) return false;
    for (const auto& w : t.wraps[i])
        if (w[1] != 0) return true;
    return false;
}

PointerExperimentResult run_schedule(const PointerExperimentSpec& spec, bool gate) {
    validate_spec(spec);
    const Grid& g = *spec.grid;
    const std::size_t nb = spec.branches.size();

    std::vector<WaveFunction> branch0;
    branch0.reserve(nb);
    double amp2 = 0.0;
    for (const auto& b : spec.branches) {
        branch0.push_back(branch_state(spec, b));
        amp2 += std::norm(b.amplitude);
    }
    std::vector<cd> amps(nb);
    for (std::size_t b = 0; b < nb; ++b) amps[b] = spec.branches[b].amplitude / std::sqrt(amp2);

    for (std::size_t a = 0; a < nb; ++a)
        for (std::size_t b = a + 1; b < nb; ++b) {
            const double ov = std::abs(inner(branch0[a], branch0[b]));
            if (ov >= 1e-8) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "branches %zu and %zu overlap at |<a|b>| = %.2e", a,
                              b, ov);
                throw StateError(buf);
            }
        }

    std::vector<cd> full0(g.size());
    for (std::size_t b = 0; b < nb; ++b)
        for (std::size_t f = 0; f < g.size(); ++f) full0[f] += amps[b] * branch0[b].values()[f];
    WaveFunction initial = WaveFunction::from_values(spec.grid, spec.params, std::move(full0));

    const auto phases = schedule(spec);
    std::vector<Potential> pots;
    pots.reserve(phases.size());
    for (const auto& p : phases) pots.push_back(coupling_potential(spec, p.gain));

    PointerExperimentResult r{evolve_through(initial, spec, phases, pots),
                              {},
                              std::move(amps),
                              {},
                              {},
                              {},
                              {},
                              {},
                              {}};
    r.branch_series.reserve(nb);
    for (std::size_t b = 0; b < nb; ++b)
        r.branch_series.push_back(evolve_through(branch0[b], spec, phases, pots));

    double t = 0.0;
    for (std::size_t k = 0; k + 1 < phases.size(); ++k) {
        t += phases[k].duration;
        r.phase_switch_times.push_back(t);
    }

    const std::size_t frames = r.series.size();
    r.overlap_curve.resize(frames, 0.0);
    const double dy = g.dx(1);
    if (nb > 1) {
        std::vector<std::vector<double>> marg(nb);
        for (std::size_t i = 0; i < frames; ++i) {
            for (std::size_t b = 0; b < nb; ++b)
                marg[b] = pointer_marginal(g, *r.branch_series[b].values(i));
            double worst = 0.0;
            for (std::size_t a = 0; a < nb; ++a)
                for (std::size_t b = a + 1; b < nb; ++b)
                    worst = std::max(worst, min_mass_overlap(marg[a], marg[b], dy));
            r.overlap_curve[i] = worst;
        }
    }

    r.final_decomposition = decompose_frame(r, frames - 1, spec.overlap_threshold);
    if (gate && nb > 1 && !r.final_decomposition.disjoint) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "branch supports failed to separate: overlap mass %.3e",
                      r.final_decomposition.max_pairwise_overlap);
        throw StateError(buf);
    }

    if (spec.ensemble_size > 0) {
        auto pts = sample_equilibrium(initial, spec.ensemble_size, spec.seed);
        EnsembleSpec es;
        es.n_trajectories = spec.ensemble_size;
        es.master_seed = spec.seed;
        es.base_dt = spec.pulse_frame_time;
        es.threads = spec.threads;
        r.trajectories = integrate_ensemble(r.series, pts, es);

        r.labels.assign(spec.ensemble_size, -1);
        r.counts.assign(nb, 0);
        for (std::size_t i = 0; i < spec.ensemble_size; ++i) {
            if (r.trajectories.status[i] != PathStatus::ok) continue;
            if (wrapped_pointer(r.trajectories, i)) continue;
            const double y = r.trajectories.paths[i].back()[1];
            r.labels[i] = classify_region(y, r.final_decomposition);
            ++r.counts[std::size_t(r.labels[i])];
        }
    }
    return r;
}

}  // namespace

void validate_spec(const PointerExperimentSpec& spec) {
    if (!spec.grid) throw GridError("experiment needs a grid");
    const Grid& g = *spec.grid;
    if (g.dim() != 2) throw ShapeError("pointer experiment runs on a 2D grid");
    if (spec.params.masses.size() != 2) throw ShapeError("need one mass per axis");
    if (!(spec.params.hbar > 0.0) || !(spec.params.masses[0] > 0.0) ||
        !(spec.params.masses[1] > 0.0))
        throw StateError("physical constants must be positive");
    if (spec.branches.empty()) throw StateError("at least one branch required");
    for (const auto& b : spec.branches) {
        if (!(b.sigma > 0.0)) throw StateError("branch sigma must be positive");
        if (!(std::abs(b.amplitude) > 0.0)) throw StateError("branch amplitude must be nonzero");
    }
    if (!(spec.pointer_sigma > 0.0)) throw StateError("pointer sigma must be positive");
    if (!(spec.interaction_time > 0.0) || !(spec.drift_time > 0.0))
        throw StateError("interaction and drift durations must be positive");
    if (spec.revival_drift < 0.0) throw StateError("revival drift must be non-negative");
    if (!(spec.overlap_threshold > 0.0)) throw StateError("overlap threshold must be positive");

    if (!divides(spec.pulse_frame_time, spec.pulse_dt) ||
        !divides(spec.interaction_time, spec.pulse_frame_time))
        throw StateError("interaction_time, pulse_frame_time, pulse_dt must nest evenly");
    if (!divides(spec.drift_frame_time, spec.drift_dt) ||
        !divides(spec.drift_time, spec.drift_frame_time))
        throw StateError("drift_time, drift_frame_time, drift_dt must nest evenly");
    if (spec.revival_drift > 0.0 && !divides(spec.revival_drift, spec.drift_frame_time))
        throw StateError("revival_drift must be a multiple of drift_frame_time");

    // the split step applies exp(-i V dt / hbar) pointwise; the corner of the
    // box must stay under a half turn per step or the phase aliases
    const double cx = std::max(std::abs(g.lower(0)), std::abs(g.upper(0) - g.dx(0)));
    const double cy = std::max(std::abs(g.lower(1)), std::abs(g.upper(1) - g.dx(1)));
    const double gmax =
        std::abs(spec.coupling) * std::max(1.0, std::abs(spec.reversal_gain)) * cx * cy;
    if (spec.pulse_dt * gmax / spec.params.hbar >= std::numbers::pi)
        throw StateError("pulse_dt too coarse for the coupling corner phase");

    // kick separation of the closest branch pair must outrun the pointer
    // marginal width: free spreading plus the kick smear (the kick momentum
    // varies across a branch packet's x-extent, widening its y-marginal by
    // g*tau*sigma_x/m_y over the drift)
    if (spec.branches.size() > 1 && spec.reversal_gain == 0.0) {
        double dmin = std::numeric_limits<double>::infinity();
        double sx = 0.0;
        for (std::size_t a = 0; a < spec.branches.size(); ++a) {
            sx = std::max(sx, spec.branches[a].sigma);
            for (std::size_t b = a + 1; b < spec.branches.size(); ++b)
                dmin = std::min(dmin,
                                std::abs(spec.branches[a].center - spec.branches[b].center));
        }
        const double tau = spec.interaction_time;
        const double T = tau + spec.drift_time;
        const double flight = spec.drift_time + 0.5 * tau;
        const double kick = std::abs(spec.coupling) * tau / spec.params.masses[1];
        const double sep = kick * dmin * flight;
        const double rate = spec.params.hbar * T /
                            (2.0 * spec.params.masses[1] * spec.pointer_sigma * spec.pointer_sigma);
        const double free_w = spec.pointer_sigma * std::sqrt(1.0 + rate * rate);
        const double smear = kick * sx * flight;
        const double width = std::sqrt(free_w * free_w + smear * smear);
        if (sep < 9.0 * width) {
            char buf[96];
            std::snprintf(buf, sizeof buf,
                          "pointer cannot resolve branches: kick separation %.2f vs width %.2f",
                          sep, width);
            throw StateError(buf);
        }
    }
}

BranchDecomposition decompose_frame(const PointerExperimentResult& result, std::size_t frame,
                                    double overlap_threshold) {
    if (frame >= result.series.size()) throw StateError("frame index out of range");
    std::vector<std::shared_ptr<const std::vector<cd>>> branches;
    branches.reserve(result.branch_series.size());
    for (const auto& s : result.branch_series) branches.push_back(s.values(frame));
    return decompose(result.series.grid(), *result.series.values(frame), branches,
                     result.amplitudes, overlap_threshold);
}

PointerExperimentResult run_pointer_experiment(const PointerExperimentSpec& spec) {
    return run_schedule(spec, true);
}

ConditionalWaveFunction conditional_wavefunction(const WaveFunction& joint, double y,
                                                 double epsilon) {
    const Grid& g = joint.grid();
    if (g.dim() != 2) throw ShapeError("conditioning needs a two-axis state");
    if (y < g.lower(1) || y >= g.upper(1))
        throw BoundaryError("pointer value outside the grid");

    std::vector<cd> raw = slice_at(g, joint.values(), y, joint.topology());
    const double nrm = std::sqrt(slice_mass(raw, g.dx(0)));
    if (nrm < epsilon)
        throw NodeEncounter({0.0, y, 0.0}, joint.time_tag(),
                            "conditioning on a near-node pointer value");

    auto sub = Grid::make({{{g.lower(0), g.upper(0), g.points(0)}}, g.points(0)});
    PhysicalParams p1{joint.params().hbar, {joint.params().masses[0]}};
    auto normalized = WaveFunction::from_values(sub, p1, raw, joint.time_tag());
    return ConditionalWaveFunction{sub, std::move(raw), nrm, std::move(normalized)};
}

CollapseReport effective_collapse_report(const PointerExperimentResult& result, std::size_t path,
                                         const PointerExperimentSpec& spec) {
    if (result.trajectories.paths.empty()) throw StateError("run carried no trajectories");
    if (path >= result.trajectories.paths.size()) throw StateError("path index out of range");
    if (result.trajectories.status[path] != PathStatus::ok)
        throw StateError("path did not finish cleanly");
    if (result.branch_series.size() > 1 && !result.final_decomposition.disjoint)
        throw StateError("final frame admits no branch decomposition");

    const Grid& g = result.series.grid();
    const std::size_t nb = result.branch_series.size();
    GuidanceField full_field(result.series);
    std::vector<std::unique_ptr<GuidanceField>> branch_fields;
    branch_fields.reserve(nb);
    for (const auto& s : result.branch_series)
        branch_fields.push_back(std::make_unique<GuidanceField>(s));

    CollapseReport rep;
    rep.rows.reserve(result.series.size());
    for (std::size_t i = 0; i < result.series.size(); ++i) {
        const double t = result.series.time(i);
        const Point q = result.trajectories.paths[path][i];
        auto d = decompose_frame(result, i, spec.overlap_threshold);

        CollapseRow row;
        row.time = t;
        row.y = q[1];
        row.structure = d.disjoint && nb > 1;
        row.occupied = row.structure ? classify_region(q[1], d) : classify_nearest(q[1], d);
        if (row.structure && rep.first_separated_frame < 0)
            rep.first_separated_frame = std::ptrdiff_t(i);

        // cross-branch mass and the unoccupied branch's pull only mean
        // something once the decomposition exists; before that the row just
        // records that no effective description is available yet
        if (!row.structure) {
            rep.rows.push_back(row);
            continue;
        }

        std::vector<double> masses(nb);
        double total = 0.0;
        for (std::size_t b = 0; b < nb; ++b) {
            auto s = slice_at(g, *result.branch_series[b].values(i), q[1], Topology::periodic);
            masses[b] = std::norm(result.amplitudes[b]) * slice_mass(s, g.dx(0));
            total += masses[b];
        }
        if (std::sqrt(total) < 1e-9) {
            row.excluded = true;
            rep.any_excluded = true;
            rep.rows.push_back(row);
            continue;
        }
        row.cross_mass = (total - masses[std::size_t(row.occupied)]) / total;

        try {
            const Point vf = full_field.velocity(t, q);
            const Point vb = branch_fields[std::size_t(row.occupied)]->velocity(t, q);
            double diff = 0.0, mag = 0.0;
            for (int a = 0; a < g.dim(); ++a) {
                diff += (vf[a] - vb[a]) * (vf[a] - vb[a]);
                mag += vf[a] * vf[a];
            }
            row.unoccupied_velocity_rel = std::sqrt(diff) / (std::sqrt(mag) + 1e-30);
        } catch (const NodeEncounter&) {
            row.excluded = true;
            rep.any_excluded = true;
        }
        rep.rows.push_back(row);
    }
    return rep;
}

RevivalProbe branch_revival_probe(const PointerExperimentSpec& spec) {
    auto r = run_schedule(spec, false);
    const std::size_t frames = r.series.size();
    const std::size_t n = r.trajectories.paths.size();

    RevivalProbe probe;
    probe.times = r.series.times();
    probe.overlap = r.overlap_curve;
    probe.switch_counts.assign(frames, 0);

    std::vector<int> prev(n, -1);
    for (std::size_t i = 0; i < frames; ++i) {
        auto d = decompose_frame(r, i, spec.overlap_threshold);
        for (std::size_t p = 0; p < n; ++p) {
            if (r.trajectories.status[p] != PathStatus::ok) continue;
            if (wrapped_pointer(r.trajectories, p)) continue;
            const int label = classify_nearest(r.trajectories.paths[p][i][1], d);
            if (prev[p] >= 0 && label != prev[p]) {
                ++probe.switch_counts[i];
                ++probe.total_switches;
            }
            prev[p] = label;
        }
    }
    return probe;
}

void write_report(const PointerExperimentResult& result, const PointerExperimentSpec& spec,
                  const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["spec"]["coupling"] = spec.coupling;
    j["spec"]["interaction_time"] = spec.interaction_time;
    j["spec"]["drift_time"] = spec.drift_time;
    j["spec"]["reversal_gain"] = spec.reversal_gain;
    j["spec"]["revival_drift"] = spec.revival_drift;
    j["spec"]["pointer_sigma"] = spec.pointer_sigma;
    j["spec"]["ensemble_size"] = spec.ensemble_size;
    j["spec"]["seed"] = spec.seed;
    j["spec"]["overlap_threshold"] = spec.overlap_threshold;
    auto& jb = j["spec"]["branches"];
    for (const auto& b : spec.branches)
        jb.push_back({{"amplitude", {b.amplitude.real(), b.amplitude.imag()}},
                      {"center", b.center},
                      {"sigma", b.sigma},
                      {"momentum", b.momentum}});

    j["branch_weights"] = result.final_decomposition.weights;
    j["outcome_counts"] = result.counts;
    std::size_t excluded = 0;
    for (int l : result.labels)
        if (l < 0) ++excluded;
    j["excluded_paths"] = excluded;
    j["phase_switch_times"] = result.phase_switch_times;
    j["disjoint"] = result.final_decomposition.disjoint;
    j["final_overlap"] = result.final_decomposition.max_pairwise_overlap;
    j["reconstruction_error"] = result.final_decomposition.reconstruction_error;
    j["branch_centers"] = result.final_decomposition.centers;
    j["region_boundaries"] = result.final_decomposition.boundaries;
    j["overlap_curve"]["times"] = result.series.times();
    j["overlap_curve"]["values"] = result.overlap_curve;

    std::ofstream out(path);
    if (!out) throw IoError("cannot open report file: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing report file: " + path.string());
}

void write_revival(const RevivalProbe& probe, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["times"] = probe.times;
    j["overlap"] = probe.overlap;
    j["switch_counts"] = probe.switch_counts;
    j["total_switches"] = probe.total_switches;
    std::ofstream out(path);
    if (!out) throw IoError("cannot open revival file: " + path.string());
    out << j.dump(2) << '\n';
    if (!out) throw IoError("failed writing revival file: " + path.string());
}

}  // namespace pilotwave
