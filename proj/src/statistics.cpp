#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pilotwave/ensemble.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/frame_io.hpp"

namespace pilotwave {

double ks_quantile_99(std::size_t n) { return 1.628 / std::sqrt(double(n)); }

double chi_squared_quantile_99(std::size_t dof) {
    // Wilson-Hilferty cube-root normal approximation, z for the 99th percentile
    const double z = 2.3263478740408408;
    const double d = double(dof);
    const double c = 1.0 - 2.0 / (9.0 * d) + z * std::sqrt(2.0 / (9.0 * d));
    return d * c * c * c;
}

namespace {

// cells are centered on their grid points (matching the sampler); on periodic
// grids the strip above the last point belongs to cell 0
std::size_t covering_cell(const Grid& g, Topology topo, int axis, double x) {
    const double p = (x - g.lower(axis)) / g.dx(axis);
    long j = long(std::floor(p + 0.5));
    const long n = long(g.points(axis));
    if (j >= n) j = topo == Topology::periodic ? 0 : n - 1;
    if (j < 0) j = 0;
    return std::size_t(j);
}

}  // namespace

EquivarianceReport equivariance_check(const TrajectorySet& tset, const FrameSeries& series,
                                      const std::vector<double>& checkpoints) {
    const Grid& g = series.grid();
    const auto& times = series.times();
    const double tiny = 1e-9 * series.frame_interval();

    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < tset.status.size(); ++i)
        if (tset.status[i] == PathStatus::ok) ok.push_back(i);
    const std::size_t n = ok.size();
    if (n < 100) throw SamplingError("fewer than 100 surviving paths; statistics undefined");

    EquivarianceReport report;
    report.all_pass = true;

    for (double t : checkpoints) {
        std::size_t frame = times.size();
        for (std::size_t j = 0; j < times.size(); ++j)
            if (std::abs(times[j] - t) <= tiny) { frame = j; break; }
        if (frame == times.size()) throw StateError("checkpoint does not sit on a stored frame");

        auto rho = density(series.frame(frame));
        const double dv = g.cell_volume();

        // marginal cell masses and the joint expected counts
        std::array<std::vector<double>, kMaxDim> axis_mass;
        for (int a = 0; a < g.dim(); ++a) axis_mass[a].assign(g.points(a), 0.0);
        for (std::size_t c = 0; c < g.size(); ++c) {
            const auto idx = g.unflat(c);
            const double m = rho[c] * dv;
            for (int a = 0; a < g.dim(); ++a) axis_mass[a][idx[a]] += m;
        }

        CheckpointStats stats;
        stats.time = t;
        stats.frame = frame;
        stats.n = n;
        stats.ks_critical = ks_quantile_99(n);

        // per-axis marginal KS against the piecewise-linear quadrature CDF of
        // the centered-cell density the sampler draws from
        for (int a = 0; a < g.dim(); ++a) {
            const std::size_t np = g.points(a);
            std::vector<double> prefix(np + 1, 0.0);
            for (std::size_t j = 0; j < np; ++j) prefix[j + 1] = prefix[j] + axis_mass[a][j];
            const double total = prefix[np];
            const double m0 = axis_mass[a][0];

            std::vector<double> cdf(n);
            for (std::size_t s = 0; s < n; ++s) {
                const double x = tset.paths[ok[s]][frame][a];
                const double p = (x - g.lower(a)) / g.dx(a);
                const long j = long(std::floor(p + 0.5));
                double f;
                if (j <= 0) {
                    f = p * m0;  // right half of the wrap cell
                } else if (j >= long(np)) {
                    f = total - 0.5 * m0 + (p - (double(np) - 0.5)) * m0;
                } else {
                    f = 0.5 * m0 + (prefix[j] - prefix[1]) +
                        (p - (double(j) - 0.5)) * axis_mass[a][std::size_t(j)];
                }
                cdf[s] = std::clamp(f, 0.0, total);
            }
            std::sort(cdf.begin(), cdf.end());
            double d = 0.0;
            for (std::size_t s = 0; s < n; ++s) {
                d = std::max(d, cdf[s] - double(s) / double(n));
                d = std::max(d, double(s + 1) / double(n) - cdf[s]);
            }
            stats.ks[a] = d;
        }

        // chi-squared on row-major superbins of at least 20 expected counts
        std::vector<double> observed(g.size(), 0.0);
        for (std::size_t s = 0; s < n; ++s) {
            std::array<std::size_t, kMaxDim> idx{};
            for (int a = 0; a < g.dim(); ++a)
                idx[a] = covering_cell(g, series.topology(), a, tset.paths[ok[s]][frame][a]);
            observed[g.flat(idx)] += 1.0;
        }
        std::vector<double> bin_exp, bin_obs;
        double acc_e = 0.0, acc_o = 0.0;
        for (std::size_t c = 0; c < g.size(); ++c) {
            acc_e += double(n) * rho[c] * dv;
            acc_o += observed[c];
            if (acc_e >= 20.0) {
                bin_exp.push_back(acc_e);
                bin_obs.push_back(acc_o);
                acc_e = acc_o = 0.0;
            }
        }
        if (acc_e > 0.0 && !bin_exp.empty()) {
            bin_exp.back() += acc_e;
            bin_obs.back() += acc_o;
        }
        stats.chi2_bins = bin_exp.size();
        if (bin_exp.size() >= 2) {
            for (std::size_t b = 0; b < bin_exp.size(); ++b) {
                const double r = bin_obs[b] - bin_exp[b];
                stats.chi2 += r * r / bin_exp[b];
            }
            stats.chi2_critical = chi_squared_quantile_99(bin_exp.size() - 1);
        }

        stats.pass = true;
        for (int a = 0; a < g.dim(); ++a)
            if (!(stats.ks[a] < stats.ks_critical)) stats.pass = false;
        if (bin_exp.size() >= 2 && !(stats.chi2 < stats.chi2_critical)) stats.pass = false;

        report.all_pass = report.all_pass && stats.pass;
        report.checkpoints.push_back(stats);
    }
    return report;
}

void export_csv(const TrajectorySet& tset, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << std::setprecision(17);
    const int dim = tset.grid->dim();
    out << "path,time";
    for (int a = 0; a < dim; ++a) out << ",q" << a;
    out << ",status\n";
    for (std::size_t i = 0; i < tset.paths.size(); ++i) {
        for (std::size_t f = 0; f < tset.times.size(); ++f) {
            out << i << ',' << tset.times[f];
            for (int a = 0; a < dim; ++a) out << ',' << tset.paths[i][f][a];
            out << ',' << to_string(tset.status[i]) << '\n';
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

void export_binary(const TrajectorySet& tset, const std::filesystem::path& path) {
    const int dim = tset.grid->dim();
    std::vector<double> flat;
    flat.reserve(tset.paths.size() * tset.times.size() * std::size_t(dim));
    for (const auto& p : tset.paths)
        for (const auto& q : p)
            for (int a = 0; a < dim; ++a) flat.push_back(q[a]);
    write_real_field(path, flat);
}

std::string report_text(const EquivarianceReport& report) {
    std::ostringstream out;
    out << std::setprecision(12);
    out << "{\n  \"all_pass\": " << (report.all_pass ? "true" : "false")
        << ",\n  \"checkpoints\": [\n";
    for (std::size_t i = 0; i < report.checkpoints.size(); ++i) {
        const auto& c = report.checkpoints[i];
        out << "    {\"time\": " << c.time << ", \"n\": " << c.n << ", \"ks\": [";
        for (std::size_t a = 0; a < kMaxDim; ++a) {
            if (a) out << ", ";
            out << c.ks[a];
        }
        out << "], \"ks_critical\": " << c.ks_critical << ", \"chi2\": " << c.chi2
            << ", \"chi2_critical\": " << c.chi2_critical << ", \"chi2_bins\": " << c.chi2_bins
            << ", \"pass\": " << (c.pass ? "true" : "false") << "}"
            << (i + 1 < report.checkpoints.size() ? "," : "") << "\n";
    }
    out << "  ]\n}\n";
    return out.str();
}

void write_report(const EquivarianceReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string());
    out << report_text(report);
    if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace pilotwave
