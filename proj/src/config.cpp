#include "pilotwave/config.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <sstream>
#include <string>

#include "json.hpp"

#include "pilotwave/errors.hpp"

namespace pilotwave {
namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string idx(const std::string& path, std::size_t i) {
    return path + "[" + std::to_string(i) + "]";
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

void check_keys(const json& obj, const std::string& path,
                std::initializer_list<const char*> allowed, std::vector<std::string>& issues) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(),
                         [&](const char* k) { return it.key() == k; }))
            issues.push_back(join(path, it.key()) + ": unknown key");
    }
}

bool get_double(const json& obj, const char* key, const std::string& path,
                std::vector<std::string>& issues, double& out, bool required = false) {
    const json* j = find(obj, key);
    if (!j) {
        if (required) issues.push_back(join(path, key) + ": required");
        return false;
    }
    if (!j->is_number()) {
        issues.push_back(join(path, key) + ": expected a number");
        return false;
    }
    out = j->get<double>();
    return true;
}

bool get_uint(const json& obj, const char* key, const std::string& path,
              std::vector<std::string>& issues, std::uint64_t& out, bool required = false) {
    const json* j = find(obj, key);
    if (!j) {
        if (required) issues.push_back(join(path, key) + ": required");
        return false;
    }
    if (!(j->is_number_unsigned() || (j->is_number_integer() && j->get<std::int64_t>() >= 0))) {
        issues.push_back(join(path, key) + ": expected a non-negative integer");
        return false;
    }
    out = j->get<std::uint64_t>();
    return true;
}

bool get_string(const json& obj, const char* key, const std::string& path,
                std::vector<std::string>& issues, std::string& out, bool required = false) {
    const json* j = find(obj, key);
    if (!j) {
        if (required) issues.push_back(join(path, key) + ": required");
        return false;
    }
    if (!j->is_string()) {
        issues.push_back(join(path, key) + ": expected a string");
        return false;
    }
    out = j->get<std::string>();
    return true;
}

bool get_bool(const json& obj, const char* key, const std::string& path,
              std::vector<std::string>& issues, bool& out) {
    const json* j = find(obj, key);
    if (!j) return false;
    if (!j->is_boolean()) {
        issues.push_back(join(path, key) + ": expected a boolean");
        return false;
    }
    out = j->get<bool>();
    return true;
}

bool get_vec(const json& obj, const char* key, const std::string& path,
             std::vector<std::string>& issues, std::vector<double>& out, bool required = false) {
    const json* j = find(obj, key);
    if (!j) {
        if (required) issues.push_back(join(path, key) + ": required");
        return false;
    }
    if (!j->is_array() || !std::all_of(j->begin(), j->end(), [](const json& v) { return v.is_number(); })) {
        issues.push_back(join(path, key) + ": expected an array of numbers");
        return false;
    }
    out = j->get<std::vector<double>>();
    return true;
}

// dim-length number array -> Point (trailing components zero)
bool get_point(const json& obj, const char* key, const std::string& path, int dim,
               std::vector<std::string>& issues, Point& out, bool required = false) {
    std::vector<double> v;
    if (!get_vec(obj, key, path, issues, v, required)) return false;
    if (dim > 0 && v.size() != std::size_t(dim)) {
        issues.push_back(join(path, key) + ": expected " + std::to_string(dim) + " entries, got " +
                         std::to_string(v.size()));
        return false;
    }
    out = Point{};
    for (std::size_t a = 0; a < v.size() && a < std::size_t(kMaxDim); ++a) out[a] = v[a];
    return true;
}

bool get_complex(const json& obj, const char* key, const std::string& path,
                 std::vector<std::string>& issues, cd& out) {
    std::vector<double> v;
    if (!get_vec(obj, key, path, issues, v)) return false;
    if (v.size() != 2) {
        issues.push_back(join(path, key) + ": expected [re, im]");
        return false;
    }
    out = cd(v[0], v[1]);
    return true;
}

bool power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

TermConfig parse_term(const json& j, const std::string& path, int dim,
                      std::vector<std::string>& issues) {
    TermConfig t;
    if (!j.is_object()) {
        issues.push_back(path + ": expected an object");
        return t;
    }
    check_keys(j, path, {"amplitude", "center", "sigma", "momentum"}, issues);
    get_complex(j, "amplitude", path, issues, t.amplitude);
    get_point(j, "center", path, dim, issues, t.center, true);
    if (get_point(j, "sigma", path, dim, issues, t.sigma, true)) {
        for (int a = 0; a < std::max(dim, 1); ++a)
            if (dim > 0 && t.sigma[a] <= 0.0)
                issues.push_back(join(path, "sigma") + ": entries must be positive");
    }
    get_point(j, "momentum", path, dim, issues, t.momentum);
    return t;
}

// packet narrower than four cells along any axis aliases under the spectral
// stepper, so refuse it here rather than let the run produce garbage
void check_resolution(const TermConfig& t, const std::string& path,
                      const std::vector<AxisSpec>& axes, std::vector<std::string>& issues) {
    for (std::size_t a = 0; a < axes.size(); ++a) {
        if (axes[a].points == 0) continue;
        const double dx = (axes[a].upper - axes[a].lower) / double(axes[a].points);
        if (t.sigma[a] > 0.0 && t.sigma[a] < 4.0 * dx) {
            std::ostringstream os;
            os << join(path, "sigma") << "[" << a << "] = " << t.sigma[a]
               << " under-resolves the grid (needs >= 4*dx = " << 4.0 * dx << ")";
            issues.push_back(os.str());
        }
    }
}

BranchSpec parse_branch(const json& j, const std::string& path, std::vector<std::string>& issues) {
    BranchSpec b;
    if (!j.is_object()) {
        issues.push_back(path + ": expected an object");
        return b;
    }
    check_keys(j, path, {"amplitude", "center", "sigma", "momentum"}, issues);
    get_complex(j, "amplitude", path, issues, b.amplitude);
    get_double(j, "center", path, issues, b.center, true);
    if (get_double(j, "sigma", path, issues, b.sigma) && b.sigma <= 0.0)
        issues.push_back(join(path, "sigma") + ": must be positive");
    get_double(j, "momentum", path, issues, b.momentum);
    return b;
}

AnalysisConfig parse_analysis(const json& j, const std::string& path, int dim,
                              std::vector<std::string>& issues) {
    AnalysisConfig a;
    if (!j.is_object()) {
        issues.push_back(path + ": expected an object");
        return a;
    }
    if (!get_string(j, "kind", path, issues, a.kind, true)) return a;

    if (a.kind == "equivariance") {
        check_keys(j, path, {"kind", "checkpoints", "ks_bound", "require_no_aborts"}, issues);
        std::uint64_t n = 4;
        if (get_uint(j, "checkpoints", path, issues, n)) {
            if (n == 0) issues.push_back(join(path, "checkpoints") + ": must be at least 1");
            a.checkpoints = std::size_t(n);
        }
        if (get_double(j, "ks_bound", path, issues, a.ks_bound) && a.ks_bound < 0.0)
            issues.push_back(join(path, "ks_bound") + ": must be non-negative");
        get_bool(j, "require_no_aborts", path, issues, a.require_no_aborts);
    } else if (a.kind == "non_crossing") {
        check_keys(j, path, {"kind"}, issues);
        if (dim > 1) issues.push_back(path + ": non_crossing applies to 1-D runs only");
    } else if (a.kind == "polar") {
        check_keys(j, path, {"kind", "time", "stationary_energy", "stationary_tol", "radius"},
                   issues);
        get_double(j, "time", path, issues, a.time);
        a.has_energy = get_double(j, "stationary_energy", path, issues, a.stationary_energy);
        if (get_double(j, "stationary_tol", path, issues, a.stationary_tol) &&
            a.stationary_tol <= 0.0)
            issues.push_back(join(path, "stationary_tol") + ": must be positive");
        if (get_double(j, "radius", path, issues, a.radius) && a.radius <= 0.0)
            issues.push_back(join(path, "radius") + ": must be positive");
    } else if (a.kind == "classical_limit") {
        check_keys(j, path, {"kind", "scales", "offset"}, issues);
        if (get_vec(j, "scales", path, issues, a.scales, true)) {
            if (a.scales.empty())
                issues.push_back(join(path, "scales") + ": expected at least one entry");
            for (double s : a.scales)
                if (s < 1.0)
                    issues.push_back(join(path, "scales") + ": entries must be >= 1");
        }
        if (get_double(j, "offset", path, issues, a.offset) && a.offset <= 0.0)
            issues.push_back(join(path, "offset") + ": must be positive");
    } else if (a.kind == "nonlocality") {
        check_keys(j, path, {"kind", "q1", "q2", "min_spread", "max_spread"}, issues);
        if (dim != 2) issues.push_back(path + ": nonlocality needs a 2-D run");
        get_double(j, "q1", path, issues, a.q1, true);
        if (get_vec(j, "q2", path, issues, a.q2, true) && a.q2.empty())
            issues.push_back(join(path, "q2") + ": expected at least one entry");
        a.has_min_spread = get_double(j, "min_spread", path, issues, a.min_spread);
        a.has_max_spread = get_double(j, "max_spread", path, issues, a.max_spread);
    } else if (a.kind == "measurement") {
        check_keys(j, path,
                   {"kind", "coupling", "interaction_time", "drift_time", "reversal_gain",
                    "revival_drift", "pulse_dt", "drift_dt", "pulse_frame_time",
                    "drift_frame_time", "overlap_threshold", "born_sigmas", "check_collapse",
                    "check_switching"},
                   issues);
        get_double(j, "coupling", path, issues, a.coupling);
        get_double(j, "interaction_time", path, issues, a.interaction_time);
        get_double(j, "drift_time", path, issues, a.drift_time);
        get_double(j, "reversal_gain", path, issues, a.reversal_gain);
        get_double(j, "revival_drift", path, issues, a.revival_drift);
        get_double(j, "pulse_dt", path, issues, a.pulse_dt);
        get_double(j, "drift_dt", path, issues, a.drift_dt);
        get_double(j, "pulse_frame_time", path, issues, a.pulse_frame_time);
        get_double(j, "drift_frame_time", path, issues, a.drift_frame_time);
        get_double(j, "overlap_threshold", path, issues, a.overlap_threshold);
        get_double(j, "born_sigmas", path, issues, a.born_sigmas);
        get_bool(j, "check_collapse", path, issues, a.check_collapse);
        get_bool(j, "check_switching", path, issues, a.check_switching);
        for (auto [v, name] : {std::pair<double, const char*>{a.interaction_time, "interaction_time"},
                               {a.drift_time, "drift_time"},
                               {a.pulse_dt, "pulse_dt"},
                               {a.drift_dt, "drift_dt"},
                               {a.pulse_frame_time, "pulse_frame_time"},
                               {a.drift_frame_time, "drift_frame_time"},
                               {a.overlap_threshold, "overlap_threshold"},
                               {a.born_sigmas, "born_sigmas"}})
            if (v <= 0.0) issues.push_back(join(path, name) + ": must be positive");
    } else {
        issues.push_back(join(path, "kind") + ": unknown analysis '" + a.kind + "'");
    }
    return a;
}

json point_json(const Point& p, int dim) {
    json arr = json::array();
    for (int a = 0; a < dim; ++a) arr.push_back(p[a]);
    return arr;
}

json complex_json(const cd& z) { return json::array({z.real(), z.imag()}); }

json term_json(const TermConfig& t, int dim) {
    json j;
    j["amplitude"] = complex_json(t.amplitude);
    j["center"] = point_json(t.center, dim);
    j["momentum"] = point_json(t.momentum, dim);
    j["sigma"] = point_json(t.sigma, dim);
    return j;
}

json branch_json(const BranchSpec& b) {
    json j;
    j["amplitude"] = complex_json(b.amplitude);
    j["center"] = b.center;
    j["momentum"] = b.momentum;
    j["sigma"] = b.sigma;
    return j;
}

json analysis_json(const AnalysisConfig& a) {
    json j;
    j["kind"] = a.kind;
    if (a.kind == "equivariance") {
        j["checkpoints"] = a.checkpoints;
        j["ks_bound"] = a.ks_bound;
        j["require_no_aborts"] = a.require_no_aborts;
    } else if (a.kind == "polar") {
        j["time"] = a.time;
        j["radius"] = a.radius;
        if (a.has_energy) {
            j["stationary_energy"] = a.stationary_energy;
            j["stationary_tol"] = a.stationary_tol;
        }
    } else if (a.kind == "classical_limit") {
        j["scales"] = a.scales;
        j["offset"] = a.offset;
    } else if (a.kind == "nonlocality") {
        j["q1"] = a.q1;
        j["q2"] = a.q2;
        if (a.has_min_spread) j["min_spread"] = a.min_spread;
        if (a.has_max_spread) j["max_spread"] = a.max_spread;
    } else if (a.kind == "measurement") {
        j["coupling"] = a.coupling;
        j["interaction_time"] = a.interaction_time;
        j["drift_time"] = a.drift_time;
        j["reversal_gain"] = a.reversal_gain;
        j["revival_drift"] = a.revival_drift;
        j["pulse_dt"] = a.pulse_dt;
        j["drift_dt"] = a.drift_dt;
        j["pulse_frame_time"] = a.pulse_frame_time;
        j["drift_frame_time"] = a.drift_frame_time;
        j["overlap_threshold"] = a.overlap_threshold;
        j["born_sigmas"] = a.born_sigmas;
        j["check_collapse"] = a.check_collapse;
        j["check_switching"] = a.check_switching;
    }
    return j;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min(e.byte > 0 ? e.byte - 1 : 0, text.size());
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError({"syntax error at line " + std::to_string(line) + ", column " +
                           std::to_string(col)});
    }

    if (!root.is_object()) throw ConfigError({"top level: expected an object"});

    std::vector<std::string> issues;
    ScenarioConfig cfg;

    check_keys(root, "",
               {"name", "seed", "output", "grid", "physics", "potential", "state", "evolution",
                "ensemble", "analyses"},
               issues);

    if (get_string(root, "name", "", issues, cfg.name, true)) {
        if (cfg.name.empty() ||
            cfg.name.find_first_not_of(
                "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_-") !=
                std::string::npos)
            issues.push_back("name: use letters, digits, '-' and '_' only");
    }
    get_uint(root, "seed", "", issues, cfg.seed, true);
    get_string(root, "output", "", issues, cfg.output);

    // --- grid ---
    int dim = 0;
    if (const json* g = find(root, "grid")) {
        if (!g->is_object()) {
            issues.push_back("grid: expected an object");
        } else {
            check_keys(*g, "grid", {"axes"}, issues);
            const json* axes = find(*g, "axes");
            if (!axes || !axes->is_array() || axes->empty()) {
                issues.push_back("grid.axes: expected a non-empty array");
            } else if (axes->size() > std::size_t(kMaxDim)) {
                issues.push_back("grid.axes: at most " + std::to_string(kMaxDim) + " axes");
            } else {
                dim = int(axes->size());
                std::size_t total = 1;
                for (std::size_t i = 0; i < axes->size(); ++i) {
                    const std::string path = idx("grid.axes", i);
                    AxisSpec ax;
                    const json& aj = (*axes)[i];
                    if (!aj.is_object()) {
                        issues.push_back(path + ": expected an object");
                        cfg.axes.push_back(ax);
                        continue;
                    }
                    check_keys(aj, path, {"lower", "upper", "points"}, issues);
                    get_double(aj, "lower", path, issues, ax.lower, true);
                    get_double(aj, "upper", path, issues, ax.upper, true);
                    std::uint64_t pts = 0;
                    if (get_uint(aj, "points", path, issues, pts, true)) {
                        if (pts < 16 || !power_of_two(pts))
                            issues.push_back(join(path, "points") +
                                             ": expected a power of two >= 16");
                        ax.points = std::size_t(pts);
                        total *= std::max<std::size_t>(ax.points, 1);
                    }
                    if (ax.upper <= ax.lower)
                        issues.push_back(path + ": upper bound must exceed lower bound");
                    cfg.axes.push_back(ax);
                }
                if (total > (std::size_t(1) << 22))
                    issues.push_back("grid: total points exceed the " +
                                     std::to_string(std::size_t(1) << 22) + "-point cap");
            }
        }
    } else {
        issues.push_back("grid: required");
    }

    // --- physics ---
    if (const json* p = find(root, "physics")) {
        if (!p->is_object()) {
            issues.push_back("physics: expected an object");
        } else {
            check_keys(*p, "physics", {"hbar", "masses"}, issues);
            if (get_double(*p, "hbar", "physics", issues, cfg.hbar) && cfg.hbar <= 0.0)
                issues.push_back("physics.hbar: must be positive");
            if (get_vec(*p, "masses", "physics", issues, cfg.masses, true)) {
                if (dim > 0 && cfg.masses.size() != std::size_t(dim))
                    issues.push_back("physics.masses: expected one mass per axis (" +
                                     std::to_string(dim) + "), got " +
                                     std::to_string(cfg.masses.size()));
                for (double m : cfg.masses)
                    if (m <= 0.0) issues.push_back("physics.masses: entries must be positive");
            }
        }
    } else {
        issues.push_back("physics: required");
    }

    // --- potential ---
    if (const json* p = find(root, "potential")) {
        if (!p->is_object()) {
            issues.push_back("potential: expected an object");
        } else if (get_string(*p, "kind", "potential", issues, cfg.potential.kind, true)) {
            PotentialConfig& pot = cfg.potential;
            if (pot.kind == "free") {
                check_keys(*p, "potential", {"kind"}, issues);
            } else if (pot.kind == "harmonic") {
                check_keys(*p, "potential", {"kind", "omega", "center"}, issues);
                if (get_point(*p, "omega", "potential", dim, issues, pot.omega, true)) {
                    for (int a = 0; a < dim; ++a)
                        if (pot.omega[a] <= 0.0) {
                            issues.push_back("potential.omega: entries must be positive");
                            break;
                        }
                }
                get_point(*p, "center", "potential", dim, issues, pot.center);
            } else if (pot.kind == "barrier") {
                check_keys(*p, "potential", {"kind", "height", "width", "position"}, issues);
                get_double(*p, "height", "potential", issues, pot.height, true);
                if (get_double(*p, "width", "potential", issues, pot.width, true) &&
                    pot.width <= 0.0)
                    issues.push_back("potential.width: must be positive");
                get_double(*p, "position", "potential", issues, pot.position);
            } else if (pot.kind == "double_slit") {
                check_keys(*p, "potential",
                           {"kind", "separation", "slit_width", "wall_position", "wall_height",
                            "wall_width"},
                           issues);
                if (dim != 2) issues.push_back("potential: double_slit needs a 2-D grid");
                for (auto [key, out] : {std::pair<const char*, double*>{"separation", &pot.separation},
                                        {"slit_width", &pot.slit_width},
                                        {"wall_height", &pot.wall_height},
                                        {"wall_width", &pot.wall_width}})
                    if (get_double(*p, key, "potential", issues, *out, true) && *out <= 0.0)
                        issues.push_back(join("potential", key) + ": must be positive");
                get_double(*p, "wall_position", "potential", issues, pot.wall_position, true);
            } else if (pot.kind == "csv") {
                check_keys(*p, "potential", {"kind", "path"}, issues);
                if (get_string(*p, "path", "potential", issues, pot.csv, true) && pot.csv.empty())
                    issues.push_back("potential.path: must not be empty");
            } else {
                issues.push_back("potential.kind: unknown potential '" + pot.kind + "'");
            }
        }
    }

    // --- state ---
    if (const json* s = find(root, "state")) {
        if (!s->is_object()) {
            issues.push_back("state: expected an object");
        } else if (get_string(*s, "kind", "state", issues, cfg.state.kind, true)) {
            StateConfig& st = cfg.state;
            if (st.kind == "gaussian" || st.kind == "superposition") {
                check_keys(*s, "state", {"kind", "terms"}, issues);
                const json* terms = find(*s, "terms");
                if (!terms || !terms->is_array()) {
                    issues.push_back("state.terms: expected an array");
                } else {
                    const std::size_t need = st.kind == "gaussian" ? 1 : 2;
                    if (terms->size() < need)
                        issues.push_back("state.terms: " + st.kind + " needs at least " +
                                         std::to_string(need) + " term(s)");
                    for (std::size_t i = 0; i < terms->size(); ++i) {
                        TermConfig t = parse_term((*terms)[i], idx("state.terms", i), dim, issues);
                        check_resolution(t, idx("state.terms", i), cfg.axes, issues);
                        st.terms.push_back(t);
                    }
                }
            } else if (st.kind == "spinor") {
                check_keys(*s, "state", {"kind", "up", "down"}, issues);
                for (auto [key, out] : {std::pair<const char*, std::vector<TermConfig>*>{"up", &st.up},
                                        {"down", &st.down}}) {
                    const json* comp = find(*s, key);
                    if (!comp) continue;
                    if (!comp->is_array()) {
                        issues.push_back(join("state", key) + ": expected an array");
                        continue;
                    }
                    for (std::size_t i = 0; i < comp->size(); ++i) {
                        const std::string path = idx(join("state", key), i);
                        TermConfig t = parse_term((*comp)[i], path, dim, issues);
                        check_resolution(t, path, cfg.axes, issues);
                        out->push_back(t);
                    }
                }
                if (st.up.empty() && st.down.empty())
                    issues.push_back("state: spinor needs at least one term in up or down");
            } else if (st.kind == "pointer") {
                check_keys(*s, "state", {"kind", "branches", "pointer_sigma"}, issues);
                if (dim != 2) issues.push_back("state: pointer runs need a 2-D grid");
                const json* branches = find(*s, "branches");
                if (!branches || !branches->is_array() || branches->empty()) {
                    issues.push_back("state.branches: expected a non-empty array");
                } else {
                    for (std::size_t i = 0; i < branches->size(); ++i)
                        st.branches.push_back(
                            parse_branch((*branches)[i], idx("state.branches", i), issues));
                }
                if (get_double(*s, "pointer_sigma", "state", issues, st.pointer_sigma) &&
                    st.pointer_sigma <= 0.0)
                    issues.push_back("state.pointer_sigma: must be positive");
            } else {
                issues.push_back("state.kind: unknown state '" + st.kind + "'");
            }
        }
    } else {
        issues.push_back("state: required");
    }

    // --- evolution ---
    if (const json* e = find(root, "evolution")) {
        if (!e->is_object()) {
            issues.push_back("evolution: expected an object");
        } else {
            check_keys(*e, "evolution",
                       {"method", "dt", "total_time", "frame_stride", "frame_delta_guard",
                        "memory_budget"},
                       issues);
            std::string method;
            if (get_string(*e, "method", "evolution", issues, method)) {
                if (method == "split_step_spectral") {
                    cfg.method = Method::split_step_spectral;
                } else if (method == "crank_nicolson_1d") {
                    cfg.method = Method::crank_nicolson_1d;
                    if (dim > 1)
                        issues.push_back("evolution.method: crank_nicolson_1d needs a 1-D grid");
                } else {
                    issues.push_back("evolution.method: unknown method '" + method + "'");
                }
            }
            if (get_double(*e, "dt", "evolution", issues, cfg.dt) && cfg.dt <= 0.0)
                issues.push_back("evolution.dt: must be positive");
            if (get_double(*e, "total_time", "evolution", issues, cfg.total_time) &&
                cfg.total_time < 0.0)
                issues.push_back("evolution.total_time: must be non-negative");
            std::uint64_t u = 0;
            if (get_uint(*e, "frame_stride", "evolution", issues, u)) {
                if (u == 0) issues.push_back("evolution.frame_stride: must be at least 1");
                cfg.frame_stride = std::size_t(u);
            }
            if (get_double(*e, "frame_delta_guard", "evolution", issues, cfg.frame_delta_guard) &&
                cfg.frame_delta_guard <= 0.0)
                issues.push_back("evolution.frame_delta_guard: must be positive");
            if (get_uint(*e, "memory_budget", "evolution", issues, u)) {
                if (u == 0) issues.push_back("evolution.memory_budget: must be positive");
                cfg.memory_budget = std::size_t(u);
            }
        }
    }

    // --- ensemble ---
    if (const json* e = find(root, "ensemble")) {
        if (!e->is_object()) {
            issues.push_back("ensemble: expected an object");
        } else {
            check_keys(*e, "ensemble", {"paths", "base_dt"}, issues);
            std::uint64_t u = 0;
            if (get_uint(*e, "paths", "ensemble", issues, u)) cfg.paths = std::size_t(u);
            if (get_double(*e, "base_dt", "ensemble", issues, cfg.base_dt) && cfg.base_dt <= 0.0)
                issues.push_back("ensemble.base_dt: must be positive");
        }
    }

    // --- analyses ---
    if (const json* arr = find(root, "analyses")) {
        if (!arr->is_array()) {
            issues.push_back("analyses: expected an array");
        } else {
            for (std::size_t i = 0; i < arr->size(); ++i)
                cfg.analyses.push_back(parse_analysis((*arr)[i], idx("analyses", i), dim, issues));
        }
    }

    // --- cross-cutting rules ---
    const bool pointer = cfg.state.kind == "pointer";
    const bool spinor = cfg.state.kind == "spinor";
    std::size_t measurement_count = 0;
    for (std::size_t i = 0; i < cfg.analyses.size(); ++i) {
        const AnalysisConfig& a = cfg.analyses[i];
        if (a.kind == "measurement") {
            ++measurement_count;
            if (!pointer)
                issues.push_back(idx("analyses", i) + ": measurement analysis needs a pointer state");
        } else if (pointer) {
            issues.push_back(idx("analyses", i) + ": pointer runs support only the measurement analysis");
        }
        if ((a.kind == "equivariance" || a.kind == "non_crossing" || a.kind == "measurement") &&
            cfg.paths == 0)
            issues.push_back(idx("analyses", i) + ": " + a.kind + " needs ensemble.paths > 0");
        if (a.kind == "polar" && (a.time < 0.0 || a.time > cfg.total_time) && !pointer)
            issues.push_back(idx("analyses", i) +
                             ".time: outside the evolution window [0, total_time]");
        if (a.kind == "classical_limit" && cfg.state.kind != "gaussian")
            issues.push_back(idx("analyses", i) + ": classical_limit needs a single gaussian state");
    }
    if (pointer && measurement_count != 1)
        issues.push_back("state: pointer runs need exactly one measurement analysis");
    if (spinor) {
        if (!cfg.analyses.empty())
            issues.push_back("state: spinor states are static; remove analyses");
        if (cfg.total_time != 0.0)
            issues.push_back("state: spinor states are static; set evolution.total_time to 0");
        if (cfg.paths != 0)
            issues.push_back("state: spinor states are static; set ensemble.paths to 0");
    }

    if (!issues.empty()) throw ConfigError(issues);
    return cfg;
}

std::string canonical_config(const ScenarioConfig& cfg) {
    const int dim = int(cfg.axes.size());
    json j;
    j["name"] = cfg.name;
    j["seed"] = cfg.seed;
    j["output"] = cfg.output;

    json axes = json::array();
    for (const AxisSpec& a : cfg.axes)
        axes.push_back({{"lower", a.lower}, {"points", a.points}, {"upper", a.upper}});
    j["grid"] = {{"axes", axes}};
    j["physics"] = {{"hbar", cfg.hbar}, {"masses", cfg.masses}};

    json pot;
    pot["kind"] = cfg.potential.kind;
    if (cfg.potential.kind == "harmonic") {
        pot["omega"] = point_json(cfg.potential.omega, dim);
        pot["center"] = point_json(cfg.potential.center, dim);
    } else if (cfg.potential.kind == "barrier") {
        pot["height"] = cfg.potential.height;
        pot["width"] = cfg.potential.width;
        pot["position"] = cfg.potential.position;
    } else if (cfg.potential.kind == "double_slit") {
        pot["separation"] = cfg.potential.separation;
        pot["slit_width"] = cfg.potential.slit_width;
        pot["wall_position"] = cfg.potential.wall_position;
        pot["wall_height"] = cfg.potential.wall_height;
        pot["wall_width"] = cfg.potential.wall_width;
    } else if (cfg.potential.kind == "csv") {
        pot["path"] = cfg.potential.csv;
    }
    j["potential"] = pot;

    json st;
    st["kind"] = cfg.state.kind;
    if (cfg.state.kind == "gaussian" || cfg.state.kind == "superposition") {
        json terms = json::array();
        for (const TermConfig& t : cfg.state.terms) terms.push_back(term_json(t, dim));
        st["terms"] = terms;
    } else if (cfg.state.kind == "spinor") {
        json up = json::array(), down = json::array();
        for (const TermConfig& t : cfg.state.up) up.push_back(term_json(t, dim));
        for (const TermConfig& t : cfg.state.down) down.push_back(term_json(t, dim));
        st["up"] = up;
        st["down"] = down;
    } else if (cfg.state.kind == "pointer") {
        json branches = json::array();
        for (const BranchSpec& b : cfg.state.branches) branches.push_back(branch_json(b));
        st["branches"] = branches;
        st["pointer_sigma"] = cfg.state.pointer_sigma;
    }
    j["state"] = st;

    j["evolution"] = {
        {"method", cfg.method == Method::split_step_spectral ? "split_step_spectral"
                                                             : "crank_nicolson_1d"},
        {"dt", cfg.dt},
        {"total_time", cfg.total_time},
        {"frame_stride", cfg.frame_stride},
        {"frame_delta_guard", cfg.frame_delta_guard},
        {"memory_budget", cfg.memory_budget}};
    j["ensemble"] = {{"paths", cfg.paths}, {"base_dt", cfg.base_dt}};

    json analyses = json::array();
    for (const AnalysisConfig& a : cfg.analyses) analyses.push_back(analysis_json(a));
    j["analyses"] = analyses;

    return j.dump(2) + "\n";
}

}  // namespace pilotwave
