#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "pilotwave/ensemble.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/rng.hpp"

namespace pilotwave {

void validate_spec(const EnsembleSpec& spec, const FrameSeries& series) {
    if (spec.n_trajectories < 1) throw StateError("n_trajectories must be >= 1");
    if (!(spec.base_dt > 0.0)) throw StateError("base_dt must be positive");
    if (spec.base_dt > series.frame_interval() * (1.0 + 1e-12))
        throw StateError("base_dt must not exceed the frame spacing");
    if (!(spec.node_retry_shrink > 0.0 && spec.node_retry_shrink < 1.0))
        throw StateError("node_retry_shrink must lie in (0, 1)");
    if (spec.threads < 1) throw StateError("threads must be >= 1");
}

const char* to_string(PathStatus s) {
    switch (s) {
        case PathStatus::ok: return "ok";
        case PathStatus::node_abort: return "node_abort";
        case PathStatus::boundary_exit: return "boundary_exit";
    }
    return "?";
}

std::size_t TrajectorySet::ok_count() const {
    return std::size_t(std::count(status.begin(), status.end(), PathStatus::ok));
}

Point TrajectorySet::unwrapped(std::size_t path, std::size_t frame) const {
    Point q = paths[path][frame];
    if (wraps[path].empty()) return q;
    for (int a = 0; a < grid->dim(); ++a)
        q[a] += double(wraps[path][frame][a]) * grid->extent(a);
    return q;
}

namespace {

// reduce into [lower, upper) axis by axis, counting full box lengths
Point wrap_point(const Grid& g, Point q, std::array<int, kMaxDim>* count) {
    for (int a = 0; a < g.dim(); ++a) {
        const double lo = g.lower(a);
        const double ext = g.extent(a);
        const double k = std::floor((q[a] - lo) / ext);
        if (k != 0.0) {
            q[a] -= k * ext;
            if (count) (*count)[a] += int(k);
        }
        // rounding can land the reduction exactly on the seam
        if (q[a] >= lo + ext) {
            q[a] = lo;
            if (count) ++(*count)[a];
        }
        if (q[a] < lo) q[a] = lo;
    }
    return q;
}

struct Walker {
    Point q{};                            // wrapped into the grid
    std::array<int, kMaxDim> wrap{};      // cumulative wrap counts
    PathStatus status = PathStatus::ok;
    double h = 0.0;
    std::size_t retries = 0;
};

Point rk4_step(const GuidanceField& guide, const Grid& g, Topology topo, const Point& q0,
               double t, double h, int dim) {
    auto eval = [&](double ts, Point p) {
        if (topo == Topology::periodic) p = wrap_point(g, p, nullptr);
        return guide.velocity(ts, p);
    };
    auto shift = [&](const Point& p, const Point& k, double s) {
        Point r = p;
        for (int a = 0; a < dim; ++a) r[a] += s * k[a];
        return r;
    };
    const Point k1 = eval(t, q0);
    const Point k2 = eval(t + 0.5 * h, shift(q0, k1, 0.5 * h));
    const Point k3 = eval(t + 0.5 * h, shift(q0, k2, 0.5 * h));
    const Point k4 = eval(t + h, shift(q0, k3, h));
    Point out = q0;
    for (int a = 0; a < dim; ++a)
        out[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
    return out;
}

// carry one walker from t0 to t1; h0 is the nominal substep for this interval
void advance_interval(const GuidanceField& guide, const Grid& g, Topology topo, Walker& w,
                      double t0, double t1, const EnsembleSpec& spec, double h0) {
    const double tiny = 1e-12 * (t1 - t0);
    double t = t0;
    w.h = h0;
    w.retries = 0;
    while (w.status == PathStatus::ok && t < t1 - tiny) {
        const double h = std::min(w.h, t1 - t);
        try {
            Point qn = rk4_step(guide, g, topo, w.q, t, h, g.dim());
            if (topo == Topology::periodic) {
                qn = wrap_point(g, qn, &w.wrap);
            } else if (!g.inside(qn)) {
                w.status = PathStatus::boundary_exit;
                break;
            }
            w.q = qn;
            t += h;
            w.h = h0;
            w.retries = 0;
        } catch (const NodeEncounter&) {
            if (++w.retries > spec.max_retries) {
                w.status = PathStatus::node_abort;
                break;
            }
            w.h *= spec.node_retry_shrink;
        } catch (const BoundaryError&) {
            w.status = PathStatus::boundary_exit;
            break;
        }
    }
}

}  // namespace

TrajectorySet integrate_ensemble(const FrameSeries& series, const std::vector<Point>& points,
                                 const EnsembleSpec& spec) {
    validate_spec(spec, series);
    const Grid& g = series.grid();
    for (const auto& q : points)
        if (!g.inside(q)) throw BoundaryError("initial point outside grid");

    const auto& times = series.times();
    const std::size_t n = points.size();
    const std::size_t frames = times.size();
    const Topology topo = series.topology();
    GuidanceField guide(series, spec.policy);

    TrajectorySet out;
    out.grid = series.grid_ptr();
    out.times = times;
    out.paths.assign(n, std::vector<Point>(frames));
    out.wraps.assign(n, std::vector<std::array<int, kMaxDim>>(frames));
    out.status.assign(n, PathStatus::ok);
    out.seeds.resize(n);

    std::vector<Walker> walkers(n);
    for (std::size_t i = 0; i < n; ++i) {
        walkers[i].q = points[i];
        out.seeds[i] = stream_for(spec.master_seed, i);
        out.paths[i][0] = points[i];
    }

    for (std::size_t k = 0; k + 1 < frames; ++k) {
        const double t0 = times[k];
        const double t1 = times[k + 1];
        const std::size_t substeps = std::size_t(std::ceil((t1 - t0) / spec.base_dt - 1e-9));
        const double h0 = (t1 - t0) / double(std::max<std::size_t>(substeps, 1));
        // frame loads happen on this thread; workers only read the cache
        guide.prepare(t0, t1);

        auto work = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                Walker& w = walkers[i];
                if (w.status == PathStatus::ok)
                    advance_interval(guide, g, topo, w, t0, t1, spec, h0);
                out.paths[i][k + 1] = w.q;
                out.wraps[i][k + 1] = w.wrap;
            }
        };

        const std::size_t nt = std::min(spec.threads, std::max<std::size_t>(n, 1));
        if (nt <= 1) {
            work(0, n);
        } else {
            std::vector<std::thread> pool;
            for (std::size_t j = 0; j < nt; ++j)
                pool.emplace_back(work, n * j / nt, n * (j + 1) / nt);
            for (auto& th : pool) th.join();
        }
    }

    for (std::size_t i = 0; i < n; ++i) {
        out.status[i] = walkers[i].status;
        const bool wrapped = std::any_of(
            out.wraps[i].begin(), out.wraps[i].end(),
            [](const std::array<int, kMaxDim>& c) { return c != std::array<int, kMaxDim>{}; });
        if (!wrapped) out.wraps[i].clear();
    }
    return out;
}

PathResult integrate_trajectory(const FrameSeries& series, const Point& q0,
                                const EnsembleSpec& spec) {
    EnsembleSpec one = spec;
    one.threads = 1;
    auto tset = integrate_ensemble(series, {q0}, one);
    PathResult out;
    out.positions = std::move(tset.paths[0]);
    out.status = tset.status[0];
    if (!tset.wraps[0].empty()) out.wraps = std::move(tset.wraps[0]);
    return out;
}

bool non_crossing_check(const TrajectorySet& tset) {
    if (tset.grid->dim() != 1) throw ShapeError("non-crossing check applies to 1D only");
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < tset.status.size(); ++i)
        if (tset.status[i] == PathStatus::ok) ok.push_back(i);
    if (ok.size() < 2) return true;

    auto order_at = [&](std::size_t frame) {
        std::vector<std::size_t> ord = ok;
        std::stable_sort(ord.begin(), ord.end(), [&](std::size_t a, std::size_t b) {
            return tset.unwrapped(a, frame)[0] < tset.unwrapped(b, frame)[0];
        });
        return ord;
    };

    const auto reference = order_at(0);
    for (std::size_t f = 1; f < tset.times.size(); ++f)
        if (order_at(f) != reference) return false;
    return true;
}

}  // namespace pilotwave
