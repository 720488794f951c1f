#include "pilotwave/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "pilotwave/ensemble.hpp"
#include "pilotwave/frame_io.hpp"
#include "pilotwave/guidance.hpp"
#include "pilotwave/measurement.hpp"
#include "pilotwave/plots.hpp"
#include "pilotwave/polar.hpp"
#include "pilotwave/potential.hpp"
#include "pilotwave/propagator.hpp"

namespace pilotwave {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// trajectories.csv keeps at most this many paths; analyses always see the
// full ensemble in memory
constexpr std::size_t kCsvPathCap = 1000;

// ---------------------------------------------------------------- registry

const char* kFreeGaussian = R"({
  "name": "free-gaussian-1d",
  "seed": 42,
  "grid": {"axes": [{"lower": -16.0, "upper": 16.0, "points": 512}]},
  "physics": {"hbar": 1.0, "masses": [1.0]},
  "potential": {"kind": "free"},
  "state": {"kind": "gaussian", "terms": [{"center": [0.0], "sigma": [1.0]}]},
  "evolution": {"dt": 0.001, "total_time": 2.0, "frame_stride": 10},
  "ensemble": {"paths": 10000},
  "analyses": [
    {"kind": "equivariance", "checkpoints": 4, "ks_bound": 0.02, "require_no_aborts": true},
    {"kind": "non_crossing"},
    {"kind": "polar", "time": 2.0}
  ]
})";

const char* kHarmonicGround = R"({
  "name": "harmonic-ground-1d",
  "seed": 7,
  "grid": {"axes": [{"lower": -8.0, "upper": 8.0, "points": 256}]},
  "physics": {"hbar": 1.0, "masses": [1.0]},
  "potential": {"kind": "harmonic", "omega": [1.0]},
  "state": {"kind": "gaussian", "terms": [{"center": [0.0], "sigma": [0.7071067811865476]}]},
  "evolution": {"dt": 0.001, "total_time": 2.0, "frame_stride": 10},
  "ensemble": {"paths": 2000},
  "analyses": [
    {"kind": "equivariance", "checkpoints": 4},
    {"kind": "non_crossing"},
    {"kind": "polar", "time": 0.0, "stationary_energy": 0.5, "stationary_tol": 1e-6, "radius": 3.0}
  ]
})";

const char* kHarmonicCoherent = R"({
  "name": "harmonic-coherent-1d",
  "seed": 9,
  "grid": {"axes": [{"lower": -8.0, "upper": 8.0, "points": 256}]},
  "physics": {"hbar": 1.0, "masses": [1.0]},
  "potential": {"kind": "harmonic", "omega": [1.0]},
  "state": {"kind": "gaussian", "terms": [{"center": [2.0], "sigma": [0.7071067811865476]}]},
  "evolution": {"dt": 0.001, "total_time": 6.3, "frame_stride": 30},
  "ensemble": {"paths": 2000},
  "analyses": [
    {"kind": "equivariance", "checkpoints": 4},
    {"kind": "non_crossing"}
  ]
})";

const char* kBarrier = R"({
  "name": "barrier-tunneling-1d",
  "seed": 12,
  "grid": {"axes": [{"lower": -24.0, "upper": 24.0, "points": 1024}]},
  "physics": {"hbar": 1.0, "masses": [1.0]},
  "potential": {"kind": "barrier", "height": 3.0, "width": 0.8, "position": 0.0},
  "state": {"kind": "gaussian",
            "terms": [{"center": [-6.0], "sigma": [1.2], "momentum": [2.0]}]},
  "evolution": {"dt": 0.001, "total_time": 6.0, "frame_stride": 30},
  "ensemble": {"paths": 2000},
  "analyses": [
    {"kind": "equivariance", "checkpoints": 4},
    {"kind": "non_crossing"},
    {"kind": "polar", "time": 3.0}
  ]
})";

const char* kDoubleSlit = R"({
  "name": "double-slit-2d",
  "seed": 21,
  "grid": {"axes": [{"lower": -12.0, "upper": 12.0, "points": 256},
                    {"lower": -12.0, "upper": 12.0, "points": 256}]},
  "physics": {"hbar": 1.0, "masses": [1.0, 1.0]},
  "potential": {"kind": "double_slit", "separation": 3.0, "slit_width": 0.5,
                "wall_position": 0.0, "wall_height": 40.0, "wall_width": 0.3},
  "state": {"kind": "gaussian",
            "terms": [{"center": [-6.0, 0.0], "sigma": [1.5, 2.5], "momentum": [4.0, 0.0]}]},
  "evolution": {"dt": 0.0005, "total_time": 3.0, "frame_stride": 20,
                "frame_delta_guard": 0.15},
  "ensemble": {"paths": 10000},
  "analyses": [
    {"kind": "equivariance", "checkpoints": 4, "ks_bound": 0.02}
  ]
})";

const char* kEntangledPair = R"({
  "name": "entangled-pair-1d1d",
  "seed": 33,
  "grid": {"axes": [{"lower": -8.0, "upper": 8.0, "points": 256},
                    {"lower": -8.0, "upper": 8.0, "points": 256}]},
  "physics": {"hbar": 1.0, "masses": [1.0, 1.0]},
  "potential": {"kind": "free"},
  "state": {"kind": "superposition", "terms": [
    {"amplitude": [0.7071067811865476, 0.0], "center": [-2.0, 2.0],
     "sigma": [0.8, 0.8], "momentum": [1.0, -1.0]},
    {"amplitude": [0.7071067811865476, 0.0], "center": [2.0, -2.0],
     "sigma": [0.8, 0.8], "momentum": [-1.0, 1.0]}
  ]},
  "evolution": {"dt": 0.001, "total_time": 1.0, "frame_stride": 10},
  "ensemble": {"paths": 500},
  "analyses": [
    {"kind": "nonlocality", "q1": 0.0,
     "q2": [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0], "min_spread": 0.1},
    {"kind": "equivariance", "checkpoints": 2}
  ]
})";

const char* kPointer = R"({
  "name": "pointer-measurement-2d",
  "seed": 7,
  "grid": {"axes": [{"lower": -14.0, "upper": 14.0, "points": 128},
                    {"lower": -20.0, "upper": 20.0, "points": 512}]},
  "physics": {"hbar": 1.0, "masses": [1.0, 1.0]},
  "potential": {"kind": "free"},
  "state": {"kind": "pointer", "pointer_sigma": 0.57, "branches": [
    {"amplitude": [0.7071067811865476, 0.0], "center": -3.1, "sigma": 0.5},
    {"amplitude": [0.7071067811865476, 0.0], "center": 3.1, "sigma": 0.5}
  ]},
  "ensemble": {"paths": 2000},
  "analyses": [
    {"kind": "measurement", "coupling": 90.0, "interaction_time": 0.05,
     "drift_time": 0.6, "pulse_dt": 0.0001, "drift_dt": 0.0025,
     "overlap_threshold": 1e-6, "born_sigmas": 3.0,
     "check_collapse": true, "check_switching": true}
  ]
})";

const char* kClassicalLadder = R"({
  "name": "classical-limit-ladder",
  "seed": 3,
  "grid": {"axes": [{"lower": -8.0, "upper": 8.0, "points": 256}]},
  "physics": {"hbar": 1.0, "masses": [1.0]},
  "potential": {"kind": "free"},
  "state": {"kind": "gaussian", "terms": [{"center": [0.0], "sigma": [1.0], "momentum": [0.25]}]},
  "evolution": {"dt": 0.001, "total_time": 2.0, "frame_stride": 20},
  "ensemble": {"paths": 0},
  "analyses": [
    {"kind": "classical_limit", "scales": [1.0, 10.0, 100.0], "offset": 1.0},
    {"kind": "polar", "time": 0.0}
  ]
})";

// ---------------------------------------------------------------- helpers

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::uint64_t unhex64(const std::string& s) { return std::stoull(s, nullptr, 16); }

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

GridPtr make_grid(const ScenarioConfig& cfg) {
    GridSpec gs;
    gs.axes = cfg.axes;
    return Grid::make(gs);
}

PhysicalParams make_params(const ScenarioConfig& cfg) { return {cfg.hbar, cfg.masses}; }

Potential make_potential(const ScenarioConfig& cfg, GridPtr g, const PhysicalParams& p) {
    const PotentialConfig& pc = cfg.potential;
    if (pc.kind == "harmonic") return Potential::harmonic(g, p, pc.omega, pc.center);
    if (pc.kind == "barrier") return Potential::barrier(g, pc.height, pc.width, pc.position);
    if (pc.kind == "double_slit")
        return Potential::double_slit(g, pc.separation, pc.slit_width, pc.wall_position,
                                      pc.wall_height, pc.wall_width);
    if (pc.kind == "csv") return Potential::from_csv(g, pc.csv);
    return Potential::free_space(g);
}

std::vector<cd> term_sum(const std::vector<TermConfig>& terms, GridPtr g,
                         const PhysicalParams& p) {
    std::vector<cd> acc(g->size(), cd{});
    for (const TermConfig& t : terms) {
        WaveFunction w = WaveFunction::gaussian(g, p, t.center, t.sigma, t.momentum);
        const std::vector<cd>& v = w.values();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += t.amplitude * v[i];
    }
    return acc;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::size_t nearest_frame(const std::vector<double>& times, double t) {
    std::size_t best = 0;
    double d = std::abs(times.front() - t);
    for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - t) < d) {
            d = std::abs(times[i] - t);
            best = i;
        }
    return best;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

template <class F>
void phase(const char* name, RunManifest& m, F&& f) {
    Timer t;
    try {
        f();
    } catch (const RunError&) {
        throw;
    } catch (const std::exception& e) {
        throw RunError(name, e.what());
    }
    m.timings.emplace_back(name, t.seconds());
}

json axes_json(const Grid& g) {
    json arr = json::array();
    for (int a = 0; a < g.dim(); ++a)
        arr.push_back({{"lower", g.lower(a)}, {"points", g.points(a)}, {"upper", g.upper(a)}});
    return arr;
}

// density frames stored for plotting: every frame in 1D (capped), a handful
// of evenly spaced snapshots in 2D, none in 3D
std::vector<std::size_t> pick_density_frames(int dim, std::size_t n_frames) {
    std::vector<std::size_t> out;
    if (n_frames == 0 || dim > 2) return out;
    std::size_t count = n_frames;
    if (dim == 1) count = std::min<std::size_t>(n_frames, 256);
    if (dim == 2) count = std::min<std::size_t>(n_frames, 6);
    if (count == 1) return {0};
    for (std::size_t i = 0; i < count; ++i) {
        std::size_t f = (i * (n_frames - 1)) / (count - 1);
        if (out.empty() || f != out.back()) out.push_back(f);
    }
    return out;
}

void write_frame_artifacts(const FrameSeries& series, const fs::path& dir) {
    const Grid& g = series.grid();
    const std::vector<std::size_t> dframes = pick_density_frames(g.dim(), series.size());

    json fj;
    fj["grid"] = {{"axes", axes_json(g)}};
    fj["times"] = series.times();
    fj["frame_interval"] = series.frame_interval();
    fj["max_frame_delta"] = series.max_frame_delta();
    fj["density_frames"] = dframes;
    fj["topology"] = series.topology() == Topology::periodic ? "periodic" : "dirichlet";
    write_text(dir / "frames.json", fj.dump(2) + "\n");

    if (!dframes.empty()) {
        std::vector<double> stack;
        stack.reserve(dframes.size() * g.size());
        for (std::size_t f : dframes) {
            std::vector<double> rho = density(series.frame(f));
            stack.insert(stack.end(), rho.begin(), rho.end());
        }
        write_real_field(dir / "density_map.rfield", stack);
    }
    write_complex_field(dir / "final_state.cfield", *series.values(series.size() - 1));
}

void write_trajectory_artifact(const TrajectorySet& tset, const fs::path& dir) {
    if (tset.paths.empty()) return;
    if (tset.paths.size() <= kCsvPathCap) {
        export_csv(tset, dir / "trajectories.csv");
        return;
    }
    TrajectorySet sub;
    sub.grid = tset.grid;
    sub.times = tset.times;
    sub.paths.assign(tset.paths.begin(), tset.paths.begin() + kCsvPathCap);
    sub.wraps.assign(tset.wraps.begin(), tset.wraps.begin() + kCsvPathCap);
    sub.status.assign(tset.status.begin(), tset.status.begin() + kCsvPathCap);
    sub.seeds.assign(tset.seeds.begin(), tset.seeds.begin() + kCsvPathCap);
    export_csv(sub, dir / "trajectories.csv");
}

// ---------------------------------------------------------------- analyses

AnalysisOutcome analyze_equivariance(const AnalysisConfig& a, const FrameSeries& series,
                                     const TrajectorySet& tset, const fs::path& dir) {
    AnalysisOutcome out{"equivariance", false, {}};
    std::vector<double> cps;
    const double span = series.times().back();
    for (std::size_t j = 1; j <= a.checkpoints; ++j)
        cps.push_back(span * double(j) / double(a.checkpoints));

    EquivarianceReport rep = equivariance_check(tset, series, cps);

    std::size_t node_aborts = 0, boundary_exits = 0;
    for (PathStatus s : tset.status) {
        if (s == PathStatus::node_abort) ++node_aborts;
        if (s == PathStatus::boundary_exit) ++boundary_exits;
    }
    double worst_ks = 0.0;
    for (const CheckpointStats& cp : rep.checkpoints)
        for (int ax = 0; ax < series.grid().dim(); ++ax)
            worst_ks = std::max(worst_ks, cp.ks[std::size_t(ax)]);

    out.pass = rep.all_pass;
    if (a.ks_bound > 0.0 && worst_ks > a.ks_bound) out.pass = false;
    if (a.require_no_aborts && (node_aborts > 0 || boundary_exits > 0)) out.pass = false;

    json cj = json::array();
    for (const CheckpointStats& cp : rep.checkpoints) {
        json e;
        e["time"] = cp.time;
        e["frame"] = cp.frame;
        std::vector<double> ks(cp.ks.begin(), cp.ks.begin() + series.grid().dim());
        e["ks"] = ks;
        e["ks_critical"] = cp.ks_critical;
        e["chi2"] = cp.chi2;
        e["chi2_critical"] = cp.chi2_critical;
        e["chi2_bins"] = cp.chi2_bins;
        e["n"] = cp.n;
        e["pass"] = cp.pass;
        cj.push_back(e);
    }
    json j;
    j["checkpoints"] = cj;
    j["all_pass"] = rep.all_pass;
    j["ks_bound"] = a.ks_bound;
    j["worst_ks"] = worst_ks;
    j["node_aborts"] = node_aborts;
    j["boundary_exits"] = boundary_exits;
    j["pass"] = out.pass;
    write_text(dir / "equivariance.json", j.dump(2) + "\n");

    out.details.push_back("checkpoints " + std::to_string(rep.checkpoints.size()) +
                          ", worst marginal KS " + fmt(worst_ks) +
                          (a.ks_bound > 0.0 ? " (bound " + fmt(a.ks_bound) + ")"
                                            : " (99% critical per checkpoint)"));
    out.details.push_back("node aborts " + std::to_string(node_aborts) + ", boundary exits " +
                          std::to_string(boundary_exits) +
                          (a.require_no_aborts ? " (none allowed)" : ""));
    return out;
}

AnalysisOutcome analyze_non_crossing(const TrajectorySet& tset) {
    AnalysisOutcome out{"non_crossing", false, {}};
    out.pass = non_crossing_check(tset);
    out.details.push_back(out.pass ? "surviving paths keep their ordering at every frame"
                                   : "path ordering changed between frames");
    return out;
}

AnalysisOutcome analyze_polar(const AnalysisConfig& a, const FrameSeries& series,
                              const Potential& v, const fs::path& dir) {
    AnalysisOutcome out{"polar", false, {}};
    const double t = std::clamp(a.time, series.times().front(), series.times().back());
    const std::size_t f = nearest_frame(series.times(), t);

    WaveFunction psi = series.frame(f);
    PolarFields fields = polar_decompose(psi);
    write_polar(fields, dir / "polar");

    double u_min = 0.0, u_max = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < fields.U.size(); ++i) {
        if (!fields.mask[i]) continue;
        if (!any) {
            u_min = u_max = fields.U[i];
            any = true;
        }
        u_min = std::min(u_min, fields.U[i]);
        u_max = std::max(u_max, fields.U[i]);
    }

    json j;
    j["time"] = series.time(f);
    j["frame"] = f;
    j["epsilon"] = fields.epsilon;
    j["components"] = fields.components;
    j["u_min"] = u_min;
    j["u_max"] = u_max;

    out.pass = true;
    out.details.push_back("frame " + std::to_string(f) + " (t = " + fmt(series.time(f)) +
                          "), U in [" + fmt(u_min) + ", " + fmt(u_max) + "], " +
                          std::to_string(fields.components) + " component(s)");

    if (a.has_energy) {
        const Grid& g = series.grid();
        const std::vector<double>& pot = v.values();
        double resid = 0.0;
        std::size_t checked = 0;
        for (std::size_t i = 0; i < fields.U.size(); ++i) {
            if (!fields.mask[i]) continue;
            Point q = g.point_at(i);
            double r2 = 0.0;
            for (int ax = 0; ax < g.dim(); ++ax) r2 += q[ax] * q[ax];
            if (std::sqrt(r2) >= a.radius) continue;
            resid = std::max(resid, std::abs(pot[i] + fields.U[i] - a.stationary_energy));
            ++checked;
        }
        out.pass = checked > 0 && resid <= a.stationary_tol;
        j["stationary_energy"] = a.stationary_energy;
        j["stationary_tol"] = a.stationary_tol;
        j["radius"] = a.radius;
        j["max_energy_residual"] = resid;
        j["cells_checked"] = checked;
        out.details.push_back("max |V + U - E| = " + fmt(resid) + " over " +
                              std::to_string(checked) + " cells within radius " + fmt(a.radius) +
                              " (tol " + fmt(a.stationary_tol) + ")");
    }
    j["pass"] = out.pass;
    write_text(dir / "polar.json", j.dump(2) + "\n");
    return out;
}

AnalysisOutcome analyze_nonlocality(const AnalysisConfig& a, const FrameSeries& series,
                                    const fs::path& dir) {
    AnalysisOutcome out{"nonlocality", false, {}};
    NonlocalityResult r = nonlocality_probe(series.frame(0), a.q1, a.q2);

    out.pass = true;
    if (a.has_min_spread && r.spread < a.min_spread) out.pass = false;
    if (a.has_max_spread && r.spread > a.max_spread) out.pass = false;

    json j;
    j["q1"] = a.q1;
    j["q2"] = a.q2;
    j["v1"] = r.v1;
    j["spread"] = r.spread;
    if (a.has_min_spread) j["min_spread"] = a.min_spread;
    if (a.has_max_spread) j["max_spread"] = a.max_spread;
    j["pass"] = out.pass;
    write_text(dir / "nonlocality.json", j.dump(2) + "\n");

    std::string band;
    if (a.has_min_spread) band += " (needs >= " + fmt(a.min_spread) + ")";
    if (a.has_max_spread) band += " (needs <= " + fmt(a.max_spread) + ")";
    out.details.push_back("velocity of particle 1 at q1 = " + fmt(a.q1) + " spans " +
                          fmt(r.spread) + " across " + std::to_string(a.q2.size()) +
                          " partner positions" + band);
    return out;
}

AnalysisOutcome analyze_classical_limit(const AnalysisConfig& a, const ScenarioConfig& cfg,
                                        GridPtr grid, const Potential& v,
                                        const PhysicalParams& params, const fs::path& dir) {
    AnalysisOutcome out{"classical_limit", false, {}};
    const TermConfig& t = cfg.state.terms.front();
    LimitScenario sc;
    sc.grid = grid;
    sc.potential = v;
    sc.params = params;
    sc.center = t.center;
    sc.sigma = t.sigma;
    for (int ax = 0; ax < grid->dim(); ++ax)
        sc.velocity[std::size_t(ax)] =
            params.hbar * t.momentum[std::size_t(ax)] / params.masses[std::size_t(ax)];
    sc.offset = a.offset;
    sc.total_time = cfg.total_time;
    sc.dt = cfg.dt;

    std::vector<LimitCase> table = classical_limit_study(sc, a.scales);
    export_csv(table, dir / "classical_limit.csv");

    bool decreasing = true;
    for (std::size_t i = 1; i < table.size(); ++i)
        if (!(table[i].max_deviation < table[i - 1].max_deviation)) decreasing = false;
    out.pass = decreasing;

    for (const LimitCase& row : table)
        out.details.push_back("scale " + fmt(row.scale) + ": max deviation " +
                              fmt(row.max_deviation) + ", max force ratio " +
                              fmt(row.max_force_ratio));
    out.details.push_back(decreasing ? "deviation strictly decreases with mass"
                                     : "deviation fails to decrease monotonically");
    return out;
}

// ---------------------------------------------------------- pipeline bodies

void run_evolution(const ScenarioConfig& cfg, const fs::path& dir, std::size_t threads,
                   RunManifest& m) {
    GridPtr grid;
    PhysicalParams params;
    std::optional<Potential> v;
    std::optional<FrameSeries> series;

    phase("evolve", m, [&] {
        grid = make_grid(cfg);
        params = make_params(cfg);
        v.emplace(make_potential(cfg, grid, params));
        WaveFunction psi0 =
            WaveFunction::from_values(grid, params, term_sum(cfg.state.terms, grid, params));
        PropagatorSpec ps;
        ps.method = cfg.method;
        ps.dt = cfg.dt;
        ps.total_time = cfg.total_time;
        ps.frame_stride = cfg.frame_stride;
        ps.frame_delta_guard = cfg.frame_delta_guard;
        ps.memory_budget = cfg.memory_budget;
        series.emplace(evolve(psi0, *v, ps));
    });

    TrajectorySet tset;
    if (cfg.paths > 0) {
        std::vector<Point> starts;
        phase("sample", m, [&] {
            starts = sample_equilibrium(series->frame(0), cfg.paths, cfg.seed);
        });
        phase("integrate", m, [&] {
            EnsembleSpec es;
            es.n_trajectories = starts.size();
            es.master_seed = cfg.seed;
            es.base_dt = cfg.base_dt;
            es.threads = std::max<std::size_t>(threads, 1);
            tset = integrate_ensemble(*series, starts, es);
        });
    }

    phase("artifacts", m, [&] {
        write_frame_artifacts(*series, dir);
        write_trajectory_artifact(tset, dir);
    });

    phase("analyze", m, [&] {
        for (const AnalysisConfig& a : cfg.analyses) {
            if (a.kind == "equivariance")
                m.outcomes.push_back(analyze_equivariance(a, *series, tset, dir));
            else if (a.kind == "non_crossing")
                m.outcomes.push_back(analyze_non_crossing(tset));
            else if (a.kind == "polar")
                m.outcomes.push_back(analyze_polar(a, *series, *v, dir));
            else if (a.kind == "nonlocality")
                m.outcomes.push_back(analyze_nonlocality(a, *series, dir));
            else if (a.kind == "classical_limit")
                m.outcomes.push_back(analyze_classical_limit(a, cfg, grid, *v, params, dir));
        }
    });
}

PointerExperimentSpec pointer_spec(const ScenarioConfig& cfg, const AnalysisConfig& a,
                                   std::size_t threads) {
    PointerExperimentSpec spec;
    spec.grid = make_grid(cfg);
    spec.params = make_params(cfg);
    spec.branches = cfg.state.branches;
    spec.pointer_sigma = cfg.state.pointer_sigma;
    spec.coupling = a.coupling;
    spec.interaction_time = a.interaction_time;
    spec.drift_time = a.drift_time;
    spec.reversal_gain = a.reversal_gain;
    spec.revival_drift = a.revival_drift;
    spec.ensemble_size = cfg.paths;
    spec.seed = cfg.seed;
    spec.pulse_dt = a.pulse_dt;
    spec.drift_dt = a.drift_dt;
    spec.pulse_frame_time = a.pulse_frame_time;
    spec.drift_frame_time = a.drift_frame_time;
    spec.overlap_threshold = a.overlap_threshold;
    spec.threads = std::max<std::size_t>(threads, 1);
    return spec;
}

void run_pointer(const ScenarioConfig& cfg, const fs::path& dir, std::size_t threads,
                 RunManifest& m) {
    const AnalysisConfig* ma = nullptr;
    for (const AnalysisConfig& a : cfg.analyses)
        if (a.kind == "measurement") ma = &a;
    PointerExperimentSpec spec = pointer_spec(cfg, *ma, threads);

    // a deliberately reconverging schedule cannot pass the disjoint-support
    // gate of the full experiment, so probe it without the gate instead
    if (ma->reversal_gain != 0.0) {
        std::optional<RevivalProbe> probe;
        phase("experiment", m, [&] { probe.emplace(branch_revival_probe(spec)); });
        phase("artifacts", m, [&] { write_revival(*probe, dir / "revival.json"); });
        phase("analyze", m, [&] {
            AnalysisOutcome out{"measurement", false, {}};
            double dip = probe->overlap.front();
            std::size_t sealed = 0, switches_sealed = 0;
            for (std::size_t f = 0; f < probe->overlap.size(); ++f) {
                dip = std::min(dip, probe->overlap[f]);
                if (probe->overlap[f] < ma->overlap_threshold) {
                    ++sealed;
                    switches_sealed += probe->switch_counts[f];
                }
            }
            out.pass = switches_sealed == 0;
            out.details.push_back("branch overlap dips to " + fmt(dip) + ", ends at " +
                                  fmt(probe->overlap.back()));
            out.details.push_back(std::to_string(probe->total_switches) +
                                  " label switches in total, " +
                                  std::to_string(switches_sealed) + " within the " +
                                  std::to_string(sealed) + " frame(s) of sealed branches");
            m.outcomes.push_back(out);
        });
        return;
    }

    std::optional<PointerExperimentResult> res;
    phase("experiment", m, [&] { res.emplace(run_pointer_experiment(spec)); });

    phase("artifacts", m, [&] {
        write_frame_artifacts(res->series, dir);
        write_trajectory_artifact(res->trajectories, dir);
        write_report(*res, spec, dir / "measurement_report.json");
    });

    phase("analyze", m, [&] {
        AnalysisOutcome out{"measurement", false, {}};
        bool ok = true;

        // Born statistics of the labeled outcomes
        std::size_t n = 0;
        for (std::size_t c : res->counts) n += c;
        if (n == 0) {
            ok = false;
            out.details.push_back("no labeled paths");
        }
        for (std::size_t b = 0; b < res->counts.size() && n > 0; ++b) {
            const double w = std::norm(res->amplitudes[b]);
            const double phat = double(res->counts[b]) / double(n);
            const double band = ma->born_sigmas * std::sqrt(w * (1.0 - w) / double(n));
            const bool inside = std::abs(phat - w) <= band;
            if (!inside) ok = false;
            out.details.push_back("branch " + std::to_string(b) + ": frequency " + fmt(phat) +
                                  " vs weight " + fmt(w) + " (band " + fmt(band) + ", " +
                                  std::to_string(res->counts[b]) + "/" + std::to_string(n) +
                                  ")" + (inside ? "" : " OUT OF BAND"));
        }

        if (ma->check_collapse) {
            std::size_t p = res->trajectories.paths.size();
            for (std::size_t i = 0; i < res->trajectories.paths.size(); ++i)
                if (res->trajectories.status[i] == PathStatus::ok && res->labels[i] >= 0) {
                    p = i;
                    break;
                }
            if (p == res->trajectories.paths.size()) {
                ok = false;
                out.details.push_back("collapse: no surviving labeled path to follow");
            } else {
                CollapseReport rep = effective_collapse_report(*res, p, spec);
                double max_cross = 0.0;
                for (const CollapseRow& row : rep.rows)
                    if (row.structure) max_cross = std::max(max_cross, row.cross_mass);
                const bool good = !rep.any_excluded && rep.first_separated_frame >= 0 &&
                                  max_cross < ma->overlap_threshold;
                if (!good) ok = false;
                out.details.push_back(
                    "collapse: path " + std::to_string(p) + " separates at frame " +
                    std::to_string(rep.first_separated_frame) + ", max unoccupied-branch mass " +
                    fmt(max_cross) + " (bound " + fmt(ma->overlap_threshold) + ")");
            }
        }

        if (ma->check_switching) {
            const std::vector<double>& times = res->series.times();
            double t_sep = -1.0;
            for (std::size_t f = 0; f < res->overlap_curve.size(); ++f)
                if (res->overlap_curve[f] < ma->overlap_threshold) {
                    t_sep = times[f];
                    break;
                }
            std::size_t late = 0;
            for (double t : res->phase_switch_times)
                if (t_sep >= 0.0 && t >= t_sep) ++late;
            const bool good = t_sep >= 0.0 && late == 0;
            if (!good) ok = false;
            out.details.push_back("switching: " + std::to_string(res->phase_switch_times.size()) +
                                  " label switches while branches overlap, " +
                                  std::to_string(late) + " after separation at t = " +
                                  fmt(t_sep));
        }

        out.details.push_back(std::string("final branch supports ") +
                              (res->final_decomposition.disjoint ? "disjoint" : "overlapping") +
                              ", max pairwise overlap " +
                              fmt(res->final_decomposition.max_pairwise_overlap));
        out.pass = ok;
        m.outcomes.push_back(out);
    });
}

void run_spinor(const ScenarioConfig& cfg, const fs::path& dir, RunManifest& m) {
    phase("evaluate", m, [&] {
        GridPtr grid = make_grid(cfg);
        PhysicalParams params = make_params(cfg);
        std::vector<cd> up = term_sum(cfg.state.up, grid, params);
        std::vector<cd> down = term_sum(cfg.state.down, grid, params);
        SpinorWaveFunction chi = SpinorWaveFunction::from_values(grid, params, up, down);
        VelocityField vf = velocity_spinor_grid(chi);

        write_complex_field(dir / "spinor_up.cfield", chi.up());
        write_complex_field(dir / "spinor_down.cfield", chi.down());
        for (int ax = 0; ax < grid->dim(); ++ax)
            write_real_field(dir / ("velocity_" + std::to_string(ax) + ".rfield"),
                             vf.v[std::size_t(ax)]);
        std::vector<double> mask(vf.mask.begin(), vf.mask.end());
        write_real_field(dir / "velocity_mask.rfield", mask);

        std::vector<double> rho(grid->size());
        for (std::size_t i = 0; i < rho.size(); ++i)
            rho[i] = std::norm(chi.up()[i]) + std::norm(chi.down()[i]);
        write_real_field(dir / "density_map.rfield", rho);

        json fj;
        fj["grid"] = {{"axes", axes_json(*grid)}};
        fj["times"] = std::vector<double>{0.0};
        fj["frame_interval"] = 0.0;
        fj["max_frame_delta"] = 0.0;
        fj["density_frames"] = std::vector<std::size_t>{0};
        fj["topology"] = "periodic";
        write_text(dir / "frames.json", fj.dump(2) + "\n");
    });
}

}  // namespace

const std::vector<ScenarioInfo>& scenario_registry() {
    static const std::vector<ScenarioInfo> reg = {
        {"free-gaussian-1d",
         "spreading free packet: equivariance at 10^4 paths, non-crossing, polar fields",
         kFreeGaussian},
        {"harmonic-ground-1d",
         "trap ground state: static density and V + U pinned at the ground energy",
         kHarmonicGround},
        {"harmonic-coherent-1d",
         "coherent state sloshing through one full trap period without changing shape",
         kHarmonicCoherent},
        {"barrier-tunneling-1d",
         "packet splitting on a smooth barrier into reflected and transmitted parts",
         kBarrier},
        {"double-slit-2d",
         "two-slit interference: trajectory fan and equivariance at 10^4 paths",
         kDoubleSlit},
        {"entangled-pair-1d1d",
         "entangled pair: the velocity of one particle depends on where the other sits",
         kEntangledPair},
        {"pointer-measurement-2d",
         "pointer measurement of a two-branch system: Born statistics, effective collapse",
         kPointer},
        {"classical-limit-ladder",
         "mass ladder on a free packet: guided paths converge to the straight line",
         kClassicalLadder},
    };
    return reg;
}

const ScenarioInfo* find_scenario(const std::string& name) {
    for (const ScenarioInfo& s : scenario_registry())
        if (s.name == name) return &s;
    return nullptr;
}

std::uint64_t combined_checksum(const std::map<std::string, std::string>& checksums) {
    std::uint64_t h = kFnvOffset;
    for (const auto& [name, hash] : checksums) {
        const std::string line = name + ":" + hash + "\n";
        h = fnv1a(line.data(), line.size(), h);
    }
    return h;
}

void write_manifest(const RunManifest& m, const fs::path& path) {
    json j;
    j["tool_version"] = m.tool_version;
    j["name"] = m.name;
    j["seed"] = m.seed;
    j["config"] = json::parse(m.canonical);
    json tj = json::array();
    for (const auto& [name, secs] : m.timings) tj.push_back({{"phase", name}, {"seconds", secs}});
    j["timings"] = tj;
    j["checksums"] = m.checksums;
    j["checksum"] = hex64(m.checksum);
    json oj = json::array();
    for (const AnalysisOutcome& o : m.outcomes)
        oj.push_back({{"kind", o.kind}, {"pass", o.pass}, {"details", o.details}});
    j["outcomes"] = oj;
    j["pass"] = m.pass;
    write_text(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const fs::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::parse_error& e) {
        throw IoError("manifest unreadable: " + path.string() + ": " + e.what());
    }
    RunManifest m;
    try {
        m.tool_version = j.at("tool_version").get<std::string>();
        m.name = j.at("name").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.canonical = j.at("config").dump(2) + "\n";
        for (const json& t : j.at("timings"))
            m.timings.emplace_back(t.at("phase").get<std::string>(),
                                   t.at("seconds").get<double>());
        m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
        m.checksum = unhex64(j.at("checksum").get<std::string>());
        for (const json& o : j.at("outcomes")) {
            AnalysisOutcome a;
            a.kind = o.at("kind").get<std::string>();
            a.pass = o.at("pass").get<bool>();
            a.details = o.at("details").get<std::vector<std::string>>();
            m.outcomes.push_back(a);
        }
        m.pass = j.at("pass").get<bool>();
    } catch (const json::exception& e) {
        throw IoError("manifest malformed: " + path.string() + ": " + e.what());
    }
    return m;
}

RunManifest run_scenario(const ScenarioConfig& cfg, const fs::path& run_dir,
                         std::size_t threads) {
    RunManifest m;
    m.tool_version = kToolVersion;
    m.name = cfg.name;
    m.seed = cfg.seed;
    m.canonical = canonical_config(cfg);

    phase("setup", m, [&] {
        fs::create_directories(run_dir);
        write_text(run_dir / "config.canonical.json", m.canonical);
    });

    if (cfg.state.kind == "pointer")
        run_pointer(cfg, run_dir, threads, m);
    else if (cfg.state.kind == "spinor")
        run_spinor(cfg, run_dir, m);
    else
        run_evolution(cfg, run_dir, threads, m);

    phase("plots", m, [&] {
        std::vector<std::string> notices;
        export_plots(run_dir, &notices);
    });

    phase("manifest", m, [&] {
        std::vector<std::string> names;
        for (const fs::directory_entry& e : fs::directory_iterator(run_dir))
            if (e.is_regular_file() && e.path().filename() != "manifest.json")
                names.push_back(e.path().filename().string());
        std::sort(names.begin(), names.end());
        for (const std::string& name : names)
            m.checksums[name] = hex64(fnv1a_file(run_dir / name));
        m.checksum = combined_checksum(m.checksums);
    });

    m.pass = true;
    for (const AnalysisOutcome& o : m.outcomes)
        if (!o.pass) m.pass = false;
    write_manifest(m, run_dir / "manifest.json");
    return m;
}

VerifyResult verify_run(const fs::path& run_dir) {
    RunManifest m = read_manifest(run_dir / "manifest.json");
    VerifyResult r;
    for (const auto& [name, hash] : m.checksums) {
        const fs::path p = run_dir / name;
        if (!fs::exists(p)) {
            r.mismatches.push_back(name + ": missing");
            continue;
        }
        if (hex64(fnv1a_file(p)) != hash) r.mismatches.push_back(name + ": checksum mismatch");
    }
    for (const fs::directory_entry& e : fs::directory_iterator(run_dir)) {
        if (!e.is_regular_file()) continue;
        const std::string name = e.path().filename().string();
        if (name == "manifest.json") continue;
        if (!m.checksums.count(name)) r.mismatches.push_back(name + ": not in manifest");
    }
    if (combined_checksum(m.checksums) != m.checksum)
        r.mismatches.push_back("combined checksum: inconsistent manifest");
    std::sort(r.mismatches.begin(), r.mismatches.end());
    r.ok = r.mismatches.empty();
    return r;
}

}  // namespace pilotwave
