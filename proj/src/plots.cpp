#include "pilotwave/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "pilotwave/errors.hpp"
#include "pilotwave/frame_io.hpp"

namespace pilotwave {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// trajectory polylines drawn per plot; the CSV may hold more paths
constexpr std::size_t kPlotPathCap = 200;

struct AxisMeta {
    double lower = 0.0, upper = 0.0;
    std::size_t points = 0;
};

struct RunMeta {
    int dim = 0;
    std::array<AxisMeta, 3> axes{};
    std::vector<double> times;
    std::vector<std::size_t> density_frames;
    std::size_t grid_size = 1;
};

struct TrajPoint {
    double t = 0.0, q0 = 0.0, q1 = 0.0;
};

struct PathData {
    std::vector<TrajPoint> pts;
    bool ok = true;
};

std::string num(double v, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open: " + p.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + p.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + p.string());
}

RunMeta load_meta(const fs::path& dir) {
    json j;
    try {
        j = json::parse(read_text(dir / "frames.json"));
    } catch (const json::parse_error& e) {
        throw IoError("frames.json unreadable: " + std::string(e.what()));
    }
    RunMeta m;
    const json& axes = j.at("grid").at("axes");
    m.dim = int(axes.size());
    for (int a = 0; a < m.dim; ++a) {
        AxisMeta& ax = m.axes[std::size_t(a)];
        ax.lower = axes[std::size_t(a)].at("lower").get<double>();
        ax.upper = axes[std::size_t(a)].at("upper").get<double>();
        ax.points = axes[std::size_t(a)].at("points").get<std::size_t>();
        m.grid_size *= ax.points;
    }
    m.times = j.at("times").get<std::vector<double>>();
    m.density_frames = j.at("density_frames").get<std::vector<std::size_t>>();
    return m;
}

// first kPlotPathCap paths of the CSV, in file order
std::vector<PathData> load_paths(const fs::path& file, int dim) {
    std::vector<PathData> out;
    std::ifstream in(file);
    if (!in) return out;
    std::string line;
    std::getline(in, line);  // header
    long current = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::array<std::string, 6> field{};
        std::size_t nf = 0, start = 0;
        for (std::size_t i = 0; i <= line.size() && nf < field.size(); ++i) {
            if (i == line.size() || line[i] == ',') {
                field[nf++] = line.substr(start, i - start);
                start = i + 1;
            }
        }
        if (nf < std::size_t(3 + dim - 1)) continue;
        const long id = std::strtol(field[0].c_str(), nullptr, 10);
        if (id >= long(kPlotPathCap)) break;  // path-major file: nothing smaller follows
        if (id != current) {
            out.emplace_back();
            current = id;
        }
        TrajPoint p;
        p.t = std::strtod(field[1].c_str(), nullptr);
        p.q0 = std::strtod(field[2].c_str(), nullptr);
        if (dim > 1) p.q1 = std::strtod(field[3].c_str(), nullptr);
        out.back().pts.push_back(p);
        if (field[std::size_t(2 + dim)] != "ok") out.back().ok = false;
    }
    return out;
}

// --------------------------------------------------------------- rendering

struct Frame2D {
    double x = 0.0, y = 0.0, w = 0.0, h = 0.0;  // pixel box
    double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;  // data ranges
    double px(double v) const { return x + (v - x0) / (x1 - x0) * w; }
    double py(double v) const { return y + h - (v - y0) / (y1 - y0) * h; }
};

constexpr int kLevels = 12;

std::string level_color(int level) {
    // white -> mid blue -> deep navy, quantized
    const double t = double(level) / double(kLevels - 1);
    auto lerp = [](double a, double b, double u) { return a + (b - a) * u; };
    double r, g, b;
    if (t < 0.5) {
        const double u = t / 0.5;
        r = lerp(255, 78, u);
        g = lerp(255, 142, u);
        b = lerp(255, 196, u);
    } else {
        const double u = (t - 0.5) / 0.5;
        r = lerp(78, 19, u);
        g = lerp(142, 53, u);
        b = lerp(196, 95, u);
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", int(r + 0.5), int(g + 0.5), int(b + 0.5));
    return buf;
}

int quantize(double rho, double rho_max) {
    if (rho_max <= 0.0 || rho <= 0.0) return 0;
    const double t = std::sqrt(rho / rho_max);  // compress the dynamic range
    int level = int(t * (kLevels - 1) + 0.5);
    return std::clamp(level, 0, kLevels - 1);
}

void open_svg(std::ostringstream& s, double w, double h, const std::string& title) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w, 0) << "\" height=\""
      << num(h, 0) << "\" viewBox=\"0 0 " << num(w, 0) << " " << num(h, 0) << "\">\n";
    s << "<rect x=\"0\" y=\"0\" width=\"" << num(w, 0) << "\" height=\"" << num(h, 0)
      << "\" fill=\"#ffffff\"/>\n";
    s << "<text x=\"16\" y=\"24\" font-family=\"monospace\" font-size=\"15\" fill=\"#222222\">"
      << title << "</text>\n";
}

void axis_box(std::ostringstream& s, const Frame2D& f, const std::string& xlabel,
              const std::string& ylabel) {
    s << "<rect x=\"" << num(f.x) << "\" y=\"" << num(f.y) << "\" width=\"" << num(f.w)
      << "\" height=\"" << num(f.h) << "\" fill=\"none\" stroke=\"#888888\"/>\n";
    auto text = [&](double x, double y, const std::string& t, const char* anchor) {
        s << "<text x=\"" << num(x) << "\" y=\"" << num(y)
          << "\" font-family=\"monospace\" font-size=\"11\" fill=\"#444444\" text-anchor=\""
          << anchor << "\">" << t << "</text>\n";
    };
    text(f.x, f.y + f.h + 14, num(f.x0), "middle");
    text(f.x + f.w, f.y + f.h + 14, num(f.x1), "middle");
    text(f.x + f.w / 2, f.y + f.h + 28, xlabel, "middle");
    text(f.x - 6, f.y + f.h, num(f.y0), "end");
    text(f.x - 6, f.y + 10, num(f.y1), "end");
    text(f.x - 6, f.y - 8, ylabel, "end");
}

// one row of the heatmap as run-length-merged rects
void heat_row(std::ostringstream& s, const std::vector<int>& levels, double x, double y,
              double cell_w, double cell_h) {
    std::size_t i = 0;
    while (i < levels.size()) {
        std::size_t jn = i;
        while (jn + 1 < levels.size() && levels[jn + 1] == levels[i]) ++jn;
        if (levels[i] > 0) {
            s << "<rect x=\"" << num(x + double(i) * cell_w) << "\" y=\"" << num(y)
              << "\" width=\"" << num(double(jn - i + 1) * cell_w + 0.3) << "\" height=\""
              << num(cell_h + 0.3) << "\" fill=\"" << level_color(levels[i]) << "\"/>\n";
        }
        i = jn + 1;
    }
}

// block-average a row-major field down to at most max_x by max_y cells
std::vector<double> downsample_2d(const std::vector<double>& src, std::size_t nx, std::size_t ny,
                                  std::size_t bx, std::size_t by, std::size_t ox,
                                  std::size_t oy) {
    std::vector<double> out(ox * oy, 0.0);
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j) {
            const std::size_t oi = std::min(i / bx, ox - 1), oj = std::min(j / by, oy - 1);
            out[oi * oy + oj] += src[i * ny + j];
        }
    const double inv = 1.0 / double(bx * by);
    for (double& v : out) v *= inv;
    return out;
}

std::string polyline(const std::vector<std::array<double, 2>>& pts, const std::string& stroke,
                     double width, double opacity) {
    std::ostringstream s;
    s << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width, 1)
      << "\" stroke-opacity=\"" << num(opacity) << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) s << ' ';
        s << num(pts[i][0], 1) << ',' << num(pts[i][1], 1);
    }
    s << "\"/>\n";
    return s.str();
}

std::string path_line(const std::vector<std::array<double, 2>>& pts, const std::string& stroke,
                      double width, const char* dash = nullptr) {
    std::ostringstream s;
    s << "<path fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"" << num(width, 1)
      << "\"";
    if (dash) s << " stroke-dasharray=\"" << dash << "\"";
    s << " d=\"";
    for (std::size_t i = 0; i < pts.size(); ++i)
        s << (i == 0 ? 'M' : 'L') << num(pts[i][0], 1) << ' ' << num(pts[i][1], 1);
    s << "\"/>\n";
    return s.str();
}

// ------------------------------------------------------------ plot bodies

void render_density_1d(std::ostringstream& s, const RunMeta& m,
                       const std::vector<double>& density, const std::vector<PathData>& paths) {
    const std::size_t nx = m.axes[0].points;
    const std::size_t nf = m.density_frames.size();
    const double t0 = m.times[m.density_frames.front()];
    const double t1 = m.times[m.density_frames.back()];

    Frame2D f{70, 50, 700, 430, m.axes[0].lower, m.axes[0].upper, t0,
              t1 > t0 ? t1 : t0 + 1.0};
    double rho_max = 0.0;
    for (double v : density) rho_max = std::max(rho_max, v);

    const std::size_t block = (nx + 255) / 256;
    const std::size_t ox = (nx + block - 1) / block;
    const double cell_w = f.w / double(ox);
    const double cell_h = f.h / double(nf);

    for (std::size_t r = 0; r < nf; ++r) {
        std::vector<int> levels(ox, 0);
        for (std::size_t i = 0; i < ox; ++i) {
            double acc = 0.0;
            std::size_t cnt = 0;
            for (std::size_t kk = i * block; kk < std::min(nx, (i + 1) * block); ++kk, ++cnt)
                acc += density[r * nx + kk];
            levels[i] = quantize(cnt ? acc / double(cnt) : 0.0, rho_max);
        }
        // row r sits at time times[density_frames[r]]
        const double yt = f.py(m.times[m.density_frames[r]]);
        heat_row(s, levels, f.x, yt - cell_h, cell_w, cell_h);
    }

    for (std::size_t p = 0; p < paths.size(); ++p) {
        std::vector<std::array<double, 2>> pts;
        pts.reserve(paths[p].pts.size());
        for (const TrajPoint& q : paths[p].pts) pts.push_back({f.px(q.q0), f.py(q.t)});
        s << polyline(pts, paths[p].ok ? "#c0392b" : "#7f8c8d", 0.7, 0.5);
    }
    axis_box(s, f, "x", "t");
}

void render_density_2d(std::ostringstream& s, const RunMeta& m,
                       const std::vector<double>& density, const std::vector<PathData>& paths) {
    const std::size_t nx = m.axes[0].points, ny = m.axes[1].points;
    const std::size_t nf = m.density_frames.size();
    const double panel = 240.0, gap = 34.0;

    double rho_max = 0.0;
    for (double v : density) rho_max = std::max(rho_max, v);

    const std::size_t bx = (nx + 127) / 128, by = (ny + 127) / 128;
    const std::size_t ox = (nx + bx - 1) / bx, oy = (ny + by - 1) / by;

    for (std::size_t k = 0; k < nf; ++k) {
        Frame2D f{40 + double(k) * (panel + gap), 70, panel, panel,
                  m.axes[0].lower, m.axes[0].upper, m.axes[1].lower, m.axes[1].upper};
        s << "<text x=\"" << num(f.x + panel / 2) << "\" y=\"" << num(f.y - 10)
          << "\" font-family=\"monospace\" font-size=\"12\" fill=\"#444444\" "
             "text-anchor=\"middle\">t = "
          << num(m.times[m.density_frames[k]]) << "</text>\n";

        std::vector<double> block(density.begin() + long(k * nx * ny),
                                  density.begin() + long((k + 1) * nx * ny));
        std::vector<double> ds = downsample_2d(block, nx, ny, bx, by, ox, oy);
        const double cw = panel / double(ox), ch = panel / double(oy);
        // rows of constant q1 (vertical axis), run-length along q0
        for (std::size_t j = 0; j < oy; ++j) {
            std::vector<int> levels(ox, 0);
            for (std::size_t i = 0; i < ox; ++i) levels[i] = quantize(ds[i * oy + j], rho_max);
            const double yt = f.y + panel - double(j + 1) * ch;
            heat_row(s, levels, f.x, yt, cw, ch);
        }
        s << "<rect x=\"" << num(f.x) << "\" y=\"" << num(f.y) << "\" width=\"" << num(panel)
          << "\" height=\"" << num(panel) << "\" fill=\"none\" stroke=\"#888888\"/>\n";

        if (k + 1 == nf) {
            for (std::size_t p = 0; p < paths.size(); ++p) {
                std::vector<std::array<double, 2>> pts;
                pts.reserve(paths[p].pts.size());
                for (const TrajPoint& q : paths[p].pts) pts.push_back({f.px(q.q0), f.py(q.q1)});
                s << polyline(pts, paths[p].ok ? "#c0392b" : "#7f8c8d", 0.6, 0.45);
            }
            axis_box(s, f, "q0", "q1");
        } else if (k == 0) {
            axis_box(s, f, "q0", "q1");
        }
    }
}

bool plot_density(const fs::path& dir, std::vector<fs::path>& written,
                  std::vector<std::string>& notices) {
    if (!fs::exists(dir / "frames.json")) {
        notices.push_back("density_trajectories.svg skipped: no frame artifacts in this run");
        return false;
    }
    RunMeta m = load_meta(dir);
    if (m.density_frames.empty() || !fs::exists(dir / "density_map.rfield")) {
        notices.push_back("density_trajectories.svg skipped: no stored density frames");
        return false;
    }
    std::vector<double> density =
        read_real_field(dir / "density_map.rfield", m.density_frames.size() * m.grid_size);
    std::vector<PathData> paths = load_paths(dir / "trajectories.csv", m.dim);

    std::ostringstream s;
    if (m.dim == 1) {
        open_svg(s, 800, 540, "probability density and trajectories");
        render_density_1d(s, m, density, paths);
    } else if (m.dim == 2) {
        const double w = 40 + double(m.density_frames.size()) * 274.0 + 20;
        open_svg(s, w, 380, "probability density and trajectories");
        render_density_2d(s, m, density, paths);
    } else {
        notices.push_back("density_trajectories.svg skipped: no 3-D density view");
        return false;
    }
    s << "</svg>\n";
    write_text(dir / "density_trajectories.svg", s.str());
    written.push_back(dir / "density_trajectories.svg");
    return true;
}

bool plot_ks(const fs::path& dir, std::vector<fs::path>& written,
             std::vector<std::string>& notices) {
    if (!fs::exists(dir / "equivariance.json")) {
        notices.push_back("ks_curve.svg skipped: no equivariance results in this run");
        return false;
    }
    json j;
    try {
        j = json::parse(read_text(dir / "equivariance.json"));
    } catch (const json::parse_error& e) {
        throw IoError("equivariance.json unreadable: " + std::string(e.what()));
    }
    std::vector<double> times, worst, critical;
    for (const json& cp : j.at("checkpoints")) {
        times.push_back(cp.at("time").get<double>());
        double w = 0.0;
        for (const json& v : cp.at("ks")) w = std::max(w, v.get<double>());
        worst.push_back(w);
        critical.push_back(cp.at("ks_critical").get<double>());
    }
    const double bound = j.value("ks_bound", 0.0);
    if (times.empty()) {
        notices.push_back("ks_curve.svg skipped: no checkpoints recorded");
        return false;
    }

    double ymax = bound;
    for (double v : worst) ymax = std::max(ymax, v);
    for (double v : critical) ymax = std::max(ymax, v);
    ymax *= 1.25;
    if (ymax <= 0.0) ymax = 1.0;
    const double x0 = 0.0, x1 = std::max(times.back(), times.front() + 1e-9);

    std::ostringstream s;
    open_svg(s, 640, 420, "marginal KS distance against checkpoints");
    Frame2D f{70, 50, 520, 310, x0, x1, 0.0, ymax};

    auto to_pts = [&](const std::vector<double>& ys) {
        std::vector<std::array<double, 2>> pts;
        for (std::size_t i = 0; i < times.size(); ++i) pts.push_back({f.px(times[i]), f.py(ys[i])});
        return pts;
    };
    s << path_line(to_pts(critical), "#7f8c8d", 1.2, "6,4");
    if (bound > 0.0)
        s << path_line({{f.px(x0), f.py(bound)}, {f.px(x1), f.py(bound)}}, "#b03a2e", 1.2,
                       "2,3");
    s << path_line(to_pts(worst), "#1a5276", 1.8);
    for (std::size_t i = 0; i < times.size(); ++i)
        s << "<circle cx=\"" << num(f.px(times[i])) << "\" cy=\"" << num(f.py(worst[i]))
          << "\" r=\"3\" fill=\"#1a5276\"/>\n";

    s << "<text x=\"600\" y=\"66\" font-family=\"monospace\" font-size=\"11\" fill=\"#7f8c8d\" "
         "text-anchor=\"end\">dashed: 99% critical</text>\n";
    if (bound > 0.0)
        s << "<text x=\"600\" y=\"80\" font-family=\"monospace\" font-size=\"11\" "
             "fill=\"#b03a2e\" text-anchor=\"end\">dotted: configured bound</text>\n";
    axis_box(s, f, "t", "KS");
    s << "</svg>\n";
    write_text(dir / "ks_curve.svg", s.str());
    written.push_back(dir / "ks_curve.svg");
    return true;
}

// U along an index line; mask gaps split the curve
void u_profile_path(std::ostringstream& s, const Frame2D& f, const std::vector<double>& coord,
                    const std::vector<double>& u, const std::vector<bool>& on,
                    const std::string& color) {
    std::vector<std::array<double, 2>> seg;
    for (std::size_t i = 0; i <= coord.size(); ++i) {
        const bool live = i < coord.size() && on[i];
        if (live) {
            seg.push_back({f.px(coord[i]), f.py(u[i])});
        } else if (!seg.empty()) {
            s << path_line(seg, color, 1.6);
            seg.clear();
        }
    }
}

bool plot_potential(const fs::path& dir, std::vector<fs::path>& written,
                    std::vector<std::string>& notices) {
    if (!fs::exists(dir / "polar.U.bin") || !fs::exists(dir / "frames.json")) {
        notices.push_back("quantum_potential.svg skipped: no polar fields in this run");
        return false;
    }
    RunMeta m = load_meta(dir);
    std::vector<double> u = read_real_field(dir / "polar.U.bin", m.grid_size);
    std::vector<double> mask = read_real_field(dir / "polar.mask.bin", m.grid_size);

    // collect the profiles: the full line in 1D, central slices in 2D
    struct Profile {
        std::vector<double> coord, value;
        std::vector<bool> on;
        std::string label, color;
    };
    std::vector<Profile> profiles;
    const AxisMeta& a0 = m.axes[0];
    const double dx0 = (a0.upper - a0.lower) / double(a0.points);
    if (m.dim == 1) {
        Profile p;
        p.label = "U(x)";
        p.color = "#1a5276";
        for (std::size_t i = 0; i < a0.points; ++i) {
            p.coord.push_back(a0.lower + double(i) * dx0);
            p.value.push_back(u[i]);
            p.on.push_back(mask[i] != 0.0);
        }
        profiles.push_back(std::move(p));
    } else if (m.dim == 2) {
        const AxisMeta& a1 = m.axes[1];
        const double dx1 = (a1.upper - a1.lower) / double(a1.points);
        Profile p0;
        p0.label = "U along axis 0 (axis 1 centered)";
        p0.color = "#1a5276";
        const std::size_t jmid = a1.points / 2;
        for (std::size_t i = 0; i < a0.points; ++i) {
            p0.coord.push_back(a0.lower + double(i) * dx0);
            p0.value.push_back(u[i * a1.points + jmid]);
            p0.on.push_back(mask[i * a1.points + jmid] != 0.0);
        }
        Profile p1;
        p1.label = "U along axis 1 (axis 0 centered)";
        p1.color = "#b03a2e";
        const std::size_t imid = a0.points / 2;
        for (std::size_t jj = 0; jj < a1.points; ++jj) {
            p1.coord.push_back(a1.lower + double(jj) * dx1);
            p1.value.push_back(u[imid * a1.points + jj]);
            p1.on.push_back(mask[imid * a1.points + jj] != 0.0);
        }
        profiles.push_back(std::move(p0));
        profiles.push_back(std::move(p1));
    } else {
        notices.push_back("quantum_potential.svg skipped: no 3-D profile view");
        return false;
    }

    double lo = 0.0, hi = 0.0;
    bool any = false;
    double cmin = 0.0, cmax = 1.0;
    for (const Profile& p : profiles)
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            if (!any) {
                cmin = p.coord.front();
                cmax = p.coord.back();
            }
            cmin = std::min(cmin, p.coord[i]);
            cmax = std::max(cmax, p.coord[i]);
            if (!p.on[i]) continue;
            if (!any) {
                lo = hi = p.value[i];
                any = true;
            }
            lo = std::min(lo, p.value[i]);
            hi = std::max(hi, p.value[i]);
        }
    if (!any) {
        notices.push_back("quantum_potential.svg skipped: polar mask is empty");
        return false;
    }
    const double pad = std::max(0.05 * (hi - lo), 1e-12);
    lo -= pad;
    hi += pad;
    lo = std::min(lo, 0.0);

    std::ostringstream s;
    open_svg(s, 640, 420, "quantum potential profiles");
    Frame2D f{70, 50, 520, 310, cmin, cmax, lo, hi};
    s << path_line({{f.px(cmin), f.py(0.0)}, {f.px(cmax), f.py(0.0)}}, "#cccccc", 1.0);
    double ly = 66;
    for (const Profile& p : profiles) {
        u_profile_path(s, f, p.coord, p.value, p.on, p.color);
        s << "<text x=\"600\" y=\"" << num(ly) << "\" font-family=\"monospace\" font-size=\"11\" fill=\""
          << p.color << "\" text-anchor=\"end\">" << p.label << "</text>\n";
        ly += 14;
    }
    axis_box(s, f, "coordinate", "U");
    s << "</svg>\n";
    write_text(dir / "quantum_potential.svg", s.str());
    written.push_back(dir / "quantum_potential.svg");
    return true;
}

}  // namespace

std::vector<fs::path> export_plots(const fs::path& run_dir, std::vector<std::string>* notices) {
    if (!fs::is_directory(run_dir)) throw IoError("not a run directory: " + run_dir.string());
    std::vector<fs::path> written;
    std::vector<std::string> local;
    plot_density(run_dir, written, local);
    plot_ks(run_dir, written, local);
    plot_potential(run_dir, written, local);
    if (notices) *notices = std::move(local);
    return written;
}

}  // namespace pilotwave
