#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "pilotwave/ensemble.hpp"
#include "pilotwave/errors.hpp"
#include "pilotwave/frame_io.hpp"
#include "pilotwave/propagator.hpp"
#include "pilotwave/rng.hpp"

using namespace pilotwave;

namespace {

GridPtr box_1d(std::size_t n = 256, double half = 10.0) {
    return Grid::make({{{-half, half, n}}, std::size_t(1) << 24});
}

const PhysicalParams kUnit{1.0, {1.0}};

// free gaussian evolved over [0, 2]: sigma(t) = sqrt(1 + t^2/4) for
// sigma0 = 1 and m = hbar = 1, starting trajectories stretch affinely
FrameSeries free_gaussian_series(const GridPtr& g, double total = 2.0) {
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    auto free = Potential::free_space(g);
    PropagatorSpec spec{Method::split_step_spectral, 1e-3, total, 20};
    return evolve(psi, free, spec);
}

}  // namespace

TEST_CASE("sampling follows the density: mean and variance of a gaussian") {
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {0.5, 0, 0}, {1.0, 0, 0});
    const std::size_t n = 100000;
    auto pts = sample_equilibrium(psi, n, 42);
    REQUIRE(pts.size() == n);
    double mean = 0.0;
    for (const auto& p : pts) mean += p[0];
    mean /= double(n);
    // central limit: the sample mean sits within 4 sigma/sqrt(n) of the center
    CHECK(std::abs(mean - 0.5) < 4.0 / std::sqrt(double(n)));
    double var = 0.0;
    for (const auto& p : pts) var += (p[0] - mean) * (p[0] - mean);
    var /= double(n - 1);
    // var(s^2) = 2 sigma^4 / n for a gaussian; five standard errors
    CHECK(std::abs(var - 1.0) < 5.0 * std::sqrt(2.0 / double(n)));
}

TEST_CASE("sampling: single draw lands inside the grid") {
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    auto pts = sample_equilibrium(psi, 1, 7);
    REQUIRE(pts.size() == 1);
    CHECK(g->inside(pts[0]));
}

TEST_CASE("sampling is a pure function of the seed") {
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {-1.0, 0, 0}, {0.8, 0, 0}, {2.0, 0, 0});
    auto a = sample_equilibrium(psi, 500, 1234);
    auto b = sample_equilibrium(psi, 500, 1234);
    auto c = sample_equilibrium(psi, 500, 1235);
    bool identical = true;
    bool differs = false;
    for (std::size_t i = 0; i < 500; ++i) {
        if (a[i][0] != b[i][0]) identical = false;
        if (a[i][0] != c[i][0]) differs = true;
    }
    CHECK(identical);
    CHECK(differs);
}

TEST_CASE("sampling rejects a pathologically peaked density") {
    auto g = box_1d(16384);
    std::vector<cd> values(g->size(), cd(0.0, 0.0));
    values[8000] = 1.0;  // all mass in one cell: acceptance rate 1/N
    auto psi = WaveFunction::from_values(g, kUnit, std::move(values));
    CHECK_THROWS_AS(sample_equilibrium(psi, 10, 3), SamplingError);
}

TEST_CASE("zero velocity field parks the trajectory") {
    // stationary state by construction: real profile times a global phase,
    // so the velocity field vanishes identically
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {0.707, 0, 0});
    PropagatorSpec pspec{Method::split_step_spectral, 0.1, 1.0, 1};
    FrameSeries series(g, kUnit, Topology::periodic, pspec);
    for (int i = 0; i <= 10; ++i) {
        const double t = 0.1 * double(i);
        std::vector<cd> vals(g->size());
        const cd phase = std::exp(cd(0.0, -0.5 * t));
        for (std::size_t f = 0; f < g->size(); ++f) vals[f] = phase * psi.values()[f];
        series.append(t, std::move(vals));
    }
    EnsembleSpec espec;
    espec.base_dt = 1e-2;
    auto path = integrate_trajectory(series, {0.3, 0, 0}, espec);
    REQUIRE(path.status == PathStatus::ok);
    for (const auto& q : path.positions) CHECK(std::abs(q[0] - 0.3) < 1e-10);
}

TEST_CASE("propagated oscillator ground state stays parked") {
    auto g = box_1d();
    auto pot = Potential::harmonic(g, kUnit, {1.0, 0, 0});
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {std::sqrt(0.5), 0, 0});
    PropagatorSpec pspec{Method::split_step_spectral, 1e-3, 1.0, 100};
    auto series = evolve(psi, pot, pspec);
    EnsembleSpec espec;
    auto path = integrate_trajectory(series, {0.3, 0, 0}, espec);
    REQUIRE(path.status == PathStatus::ok);
    for (const auto& q : path.positions) CHECK(std::abs(q[0] - 0.3) < 1e-4);
}

TEST_CASE("free gaussian trajectory stretches with the packet") {
    auto g = box_1d();
    auto series = free_gaussian_series(g);
    EnsembleSpec espec;
    auto path = integrate_trajectory(series, {1.0, 0, 0}, espec);
    REQUIRE(path.status == PathStatus::ok);
    // Q(t) = q0 sigma(t)/sigma0; at t = 2 that is sqrt(2)
    const double expect = std::sqrt(2.0);
    const double got = path.positions.back()[0];
    CHECK(std::abs(got - expect) / expect < 1e-3);
}

TEST_CASE("plane-wave trajectory drifts at hbar k / m and wraps") {
    auto g = box_1d();
    auto psi = WaveFunction::plane_wave(g, kUnit, {8, 0, 0});
    auto free = Potential::free_space(g);
    PropagatorSpec pspec{Method::split_step_spectral, 1e-3, 4.0, 20};
    auto series = evolve(psi, free, pspec);
    const double k = g->wavenumber(0, 8);

    EnsembleSpec espec;
    auto path = integrate_trajectory(series, {1.0, 0, 0}, espec);
    REQUIRE(path.status == PathStatus::ok);

    // constant-velocity oracle within the first box length
    for (std::size_t f = 0; f < series.size(); ++f) {
        const double t = series.times()[f];
        if (1.0 + k * t >= 10.0) break;
        CHECK(std::abs(path.positions[f][0] - (1.0 + k * t)) < 1e-6);
    }
    // the path leaves through the seam once and keeps drifting
    REQUIRE_FALSE(path.wraps.empty());
    CHECK(path.wraps.back()[0] == 1);
    const double unwrapped = path.positions.back()[0] + 20.0 * double(path.wraps.back()[0]);
    CHECK(std::abs(unwrapped - (1.0 + k * 4.0)) < 1e-6);
}

TEST_CASE("walls end the path with boundary_exit") {
    auto g = Grid::make({{{0.0, 10.0, 256}}, std::size_t(1) << 24});
    std::vector<cd> vals(g->size());
    for (std::size_t f = 0; f < g->size(); ++f) {
        const double x = g->point_at(f)[0];
        vals[f] = std::sin(std::numbers::pi * x / 10.0) * std::exp(cd(0.0, 4.0 * x));
    }
    auto psi = WaveFunction::from_values(g, kUnit, std::move(vals), 0.0, Topology::dirichlet);
    PropagatorSpec pspec{Method::crank_nicolson_1d, 1.0, 1.0, 1};
    FrameSeries series(g, kUnit, Topology::dirichlet, pspec);
    series.append(0.0, std::vector<cd>(psi.values()));
    series.append(1.0, std::vector<cd>(psi.values()));

    EnsembleSpec espec;
    auto path = integrate_trajectory(series, {8.5, 0, 0}, espec);
    CHECK(path.status == PathStatus::boundary_exit);
    // the frozen tail still reports the last position reached, inside the grid
    CHECK(g->inside(path.positions.back()));
}

TEST_CASE("node retries shrink the step, then abort") {
    // two far-separated packets: starting in the gap, the walker sits in
    // density below the node threshold from the first evaluation
    auto g = box_1d();
    auto a = WaveFunction::gaussian(g, kUnit, {-6.0, 0, 0}, {0.4, 0, 0});
    auto b = WaveFunction::gaussian(g, kUnit, {6.0, 0, 0}, {0.4, 0, 0});
    auto psi = superpose(a, b, 1.0, 1.0);
    PropagatorSpec pspec{Method::split_step_spectral, 0.05, 0.5, 1};
    FrameSeries series(g, kUnit, Topology::periodic, pspec);
    for (int i = 0; i <= 10; ++i) series.append(0.05 * double(i), std::vector<cd>(psi.values()));

    EnsembleSpec espec;
    espec.max_retries = 3;
    auto path = integrate_trajectory(series, {0.0, 0, 0}, espec);
    CHECK(path.status == PathStatus::node_abort);
}

TEST_CASE("ensemble of one equals the single trajectory bitwise") {
    auto g = box_1d();
    auto series = free_gaussian_series(g, 1.0);
    EnsembleSpec espec;
    auto single = integrate_trajectory(series, {0.7, 0, 0}, espec);
    auto set = integrate_ensemble(series, {{0.7, 0, 0}}, espec);
    REQUIRE(set.paths.size() == 1);
    REQUIRE(set.status[0] == single.status);
    for (std::size_t f = 0; f < set.times.size(); ++f)
        CHECK(set.paths[0][f][0] == single.positions[f][0]);
}

TEST_CASE("permuting the input points permutes the paths") {
    auto g = box_1d();
    auto series = free_gaussian_series(g, 1.0);
    EnsembleSpec espec;
    std::vector<Point> pts{{-0.5, 0, 0}, {0.2, 0, 0}, {1.4, 0, 0}};
    std::vector<Point> perm{{1.4, 0, 0}, {-0.5, 0, 0}, {0.2, 0, 0}};
    auto s1 = integrate_ensemble(series, pts, espec);
    auto s2 = integrate_ensemble(series, perm, espec);
    const std::size_t F = s1.times.size();
    for (std::size_t f = 0; f < F; ++f) {
        CHECK(s1.paths[0][f][0] == s2.paths[1][f][0]);
        CHECK(s1.paths[1][f][0] == s2.paths[2][f][0]);
        CHECK(s1.paths[2][f][0] == s2.paths[0][f][0]);
    }
}

TEST_CASE("thread count never changes the result") {
    auto g = box_1d();
    auto series = free_gaussian_series(g, 1.0);
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    auto pts = sample_equilibrium(psi, 201, 99);
    EnsembleSpec serial;
    EnsembleSpec parallel;
    parallel.threads = 4;
    auto s1 = integrate_ensemble(series, pts, serial);
    auto s4 = integrate_ensemble(series, pts, parallel);
    REQUIRE(s1.paths.size() == s4.paths.size());
    for (std::size_t i = 0; i < s1.paths.size(); ++i) {
        CHECK(s1.status[i] == s4.status[i]);
        for (std::size_t f = 0; f < s1.times.size(); ++f)
            CHECK(s1.paths[i][f][0] == s4.paths[i][f][0]);
    }
}

TEST_CASE("equilibrium ensemble stays equilibrated") {
    auto g = box_1d();
    auto series = free_gaussian_series(g);
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    const std::size_t n = 10000;
    auto pts = sample_equilibrium(psi, n, 2024);
    EnsembleSpec espec;
    espec.n_trajectories = n;
    espec.master_seed = 2024;
    espec.threads = 4;
    auto tset = integrate_ensemble(series, pts, espec);

    // nodeless evolution: nothing aborts
    std::size_t aborts = 0;
    for (auto s : tset.status)
        if (s != PathStatus::ok) ++aborts;
    CHECK(aborts == 0);

    auto report = equivariance_check(tset, series, {0.0, 1.0, 2.0});
    REQUIRE(report.checkpoints.size() == 3);
    for (const auto& c : report.checkpoints) {
        CHECK(c.n == n);
        for (int a = 0; a < 1; ++a) CHECK(c.ks[a] < c.ks_critical);
        CHECK(c.pass);
    }
    // the spread packet still matches its own density
    CHECK(report.checkpoints.back().ks[0] < 0.02);
    CHECK(report.all_pass);

    // ordering of 1D paths is preserved
    CHECK(non_crossing_check(tset));

    // a deliberately swapped pair at the final frame breaks the ordering
    auto broken = tset;
    const std::size_t last = broken.times.size() - 1;
    std::swap(broken.paths[10][last], broken.paths[20][last]);
    CHECK_FALSE(non_crossing_check(broken));
}

TEST_CASE("corrupted ensemble fails the check") {
    auto g = box_1d();
    auto series = free_gaussian_series(g, 1.0);
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    const std::size_t n = 1000;
    auto pts = sample_equilibrium(psi, n, 5);

    TrajectorySet tset;
    tset.grid = g;
    tset.times = series.times();
    tset.paths.assign(n, std::vector<Point>(series.size()));
    tset.wraps.assign(n, {});
    tset.status.assign(n, PathStatus::ok);
    tset.seeds.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        Point q = pts[i];
        q[0] += 1.0;  // one full sigma off
        for (std::size_t f = 0; f < series.size(); ++f) tset.paths[i][f] = q;
    }
    auto report = equivariance_check(tset, series, {0.0});
    CHECK(report.checkpoints[0].ks[0] > 0.2);
    CHECK_FALSE(report.checkpoints[0].pass);
    CHECK_FALSE(report.all_pass);
}

TEST_CASE("single path passes the ordering check vacuously") {
    auto g = box_1d();
    auto series = free_gaussian_series(g, 1.0);
    EnsembleSpec espec;
    auto tset = integrate_ensemble(series, {{0.4, 0, 0}}, espec);
    CHECK(non_crossing_check(tset));
}

TEST_CASE("halving the substep barely moves the endpoints") {
    auto g = box_1d();
    auto series = free_gaussian_series(g);
    EnsembleSpec coarse;
    coarse.base_dt = 1e-3;
    EnsembleSpec fine;
    fine.base_dt = 5e-4;
    auto a = integrate_trajectory(series, {1.0, 0, 0}, coarse);
    auto b = integrate_trajectory(series, {1.0, 0, 0}, fine);
    // bound is 1e-4 of the box length
    CHECK(std::abs(a.positions.back()[0] - b.positions.back()[0]) < 1e-4 * 20.0);
}

TEST_CASE("spec validation rejects bad ensembles") {
    auto g = box_1d();
    auto series = free_gaussian_series(g, 1.0);
    EnsembleSpec espec;
    espec.base_dt = 1.0;  // larger than the frame spacing
    CHECK_THROWS_AS(integrate_ensemble(series, {{0, 0, 0}}, espec), StateError);
    espec = {};
    espec.node_retry_shrink = 1.0;
    CHECK_THROWS_AS(integrate_ensemble(series, {{0, 0, 0}}, espec), StateError);
    espec = {};
    espec.threads = 0;
    CHECK_THROWS_AS(integrate_ensemble(series, {{0, 0, 0}}, espec), StateError);
    espec = {};
    CHECK_THROWS_AS(integrate_ensemble(series, {{25.0, 0, 0}}, espec), BoundaryError);
}

TEST_CASE("statistics preconditions") {
    auto g = box_1d();
    auto series = free_gaussian_series(g, 1.0);
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    auto pts = sample_equilibrium(psi, 120, 8);
    EnsembleSpec espec;
    auto tset = integrate_ensemble(series, pts, espec);
    CHECK_THROWS_AS(equivariance_check(tset, series, {0.123456}), StateError);
    auto few = integrate_ensemble(series, sample_equilibrium(psi, 50, 9), espec);
    CHECK_THROWS_AS(equivariance_check(few, series, {0.0}), SamplingError);
}

TEST_CASE("critical values match the references") {
    CHECK(ks_quantile_99(10000) == doctest::Approx(0.01628).epsilon(1e-6));
    // chi-squared 99th percentiles: 76.154 at 50 dof, 135.807 at 100
    CHECK(chi_squared_quantile_99(50) == doctest::Approx(76.154).epsilon(5e-3));
    CHECK(chi_squared_quantile_99(100) == doctest::Approx(135.807).epsilon(5e-3));
}

TEST_CASE("exports round-trip") {
    auto g = box_1d();
    auto series = free_gaussian_series(g, 1.0);
    EnsembleSpec espec;
    auto tset = integrate_ensemble(series, {{0.3, 0, 0}, {-0.6, 0, 0}}, espec);

    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "pilotwave-export-test";
    fs::create_directories(dir);

    export_csv(tset, dir / "paths.csv");
    std::ifstream in(dir / "paths.csv");
    std::size_t lines = 0;
    std::string line;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 1 + 2 * tset.times.size());

    export_binary(tset, dir / "paths.bin");
    auto flat = read_real_field(dir / "paths.bin", 2 * tset.times.size());
    CHECK(flat[0] == 0.3);
    CHECK(flat[tset.times.size()] == -0.6);
    fs::remove_all(dir);
}

TEST_CASE("report text carries the verdict") {
    EquivarianceReport report;
    CheckpointStats c;
    c.time = 1.0;
    c.n = 500;
    c.ks = {0.01, 0.0, 0.0};
    c.ks_critical = 0.0728;
    c.pass = true;
    report.checkpoints.push_back(c);
    report.all_pass = true;
    auto text = report_text(report);
    CHECK(text.find("\"all_pass\": true") != std::string::npos);
    CHECK(text.find("\"n\": 500") != std::string::npos);
}
