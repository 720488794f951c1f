#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "pilotwave/errors.hpp"
#include "pilotwave/guidance.hpp"
#include "pilotwave/interpolate.hpp"
#include "pilotwave/propagator.hpp"

using namespace pilotwave;

namespace {

GridPtr box_1d(std::size_t n = 256, double half = 10.0) {
    return Grid::make({{{-half, half, n}}, std::size_t(1) << 24});
}

const PhysicalParams kUnit{1.0, {1.0}};
const PhysicalParams kUnit2{1.0, {1.0, 1.0}};

}  // namespace

TEST_CASE("plane wave rides at hbar k / m") {
    auto g = box_1d();
    auto psi = WaveFunction::plane_wave(g, kUnit, {5, 0, 0});
    const double k = g->wavenumber(0, 5);
    auto field = velocity_grid(psi);
    for (std::size_t f = 0; f < g->size(); ++f) {
        REQUIRE(field.mask[f] == 1);
        CHECK(std::abs(field.v[0][f] - k) < 1e-10);
    }
    CHECK(field.clamp_count == 0);
}

TEST_CASE("real state stands still") {
    auto g = box_1d();
    const double sigma = 1.0 / std::sqrt(2.0);  // harmonic omega=1 ground shape
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {sigma, 0, 0});
    // transform rounding noise divided by a tail amplitude breaks 1e-10, so
    // keep the mask at densities a numerical zero cannot reach
    auto field = velocity_grid(psi, {1e-8 / 20.0, 0.0});
    double worst = 0.0;
    for (std::size_t f = 0; f < g->size(); ++f) {
        if (field.mask[f]) worst = std::max(worst, std::abs(field.v[0][f]));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("spreading gaussian velocity profile") {
    // v(x,t) = x (sigma'/sigma) = x t/4 / (1 + t^2/4) for sigma0=m=hbar=1
    auto g = box_1d();
    auto free = Potential::free_space(g);
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    PropagatorSpec spec{Method::split_step_spectral, 1e-3, 1.0, 100};
    auto series = evolve(psi, free, spec);
    auto field = velocity_grid(series.frame(series.size() - 1));

    const double t = 1.0;
    const double slope = (t / 4.0) / (1.0 + t * t / 4.0);
    const double sig = std::sqrt(1.0 + t * t / 4.0);
    double worst = 0.0;
    for (std::size_t f = 0; f < g->size(); ++f) {
        const double x = g->point_at(f)[0];
        if (std::abs(x) > 3.0 * sig || std::abs(x) < 0.1) continue;
        worst = std::max(worst, std::abs(field.v[0][f] - slope * x) / std::abs(slope * x));
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("spinor velocity reduces to the scalar field") {
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {0.5, 0, 0}, {1.0, 0, 0}, {2.0, 0, 0});
    std::vector<cd> zero(g->size(), cd(0.0, 0.0));
    auto chi = SpinorWaveFunction::from_values(g, kUnit, psi.values(), zero);
    auto sf = velocity_spinor_grid(chi);
    auto vf = velocity_grid(psi);
    auto rho = density(psi);
    for (std::size_t f = 0; f < g->size(); ++f) {
        // the two routes renormalize separately; transform rounding noise in the
        // gradients grows like 1/sqrt(rho), so compare where the state lives
        if (rho[f] < 0.05) continue;
        CHECK(std::abs(sf.v[0][f] - vf.v[0][f]) < 1e-14);
    }
}

TEST_CASE("spinor with a common phase moves at hbar k / m") {
    auto g = box_1d();
    auto pw = WaveFunction::plane_wave(g, kUnit, {4, 0, 0});
    auto chi = SpinorWaveFunction::from_values(g, kUnit, pw.values(), pw.values());
    auto field = velocity_spinor_grid(chi);
    const double k = g->wavenumber(0, 4);
    for (std::size_t f = 0; f < g->size(); f += 7) {
        CHECK(std::abs(field.v[0][f] - k) < 1e-10);
    }
}

TEST_CASE("spinor with split phases averages the wave vectors") {
    // hand oracle for components e^{ik1 x}, e^{ik2 x} with equal weight:
    // numerator Im = (k1 + k2)/2 x density
    auto g = box_1d();
    auto p1 = WaveFunction::plane_wave(g, kUnit, {2, 0, 0});
    auto p2 = WaveFunction::plane_wave(g, kUnit, {6, 0, 0});
    auto chi = SpinorWaveFunction::from_values(g, kUnit, p1.values(), p2.values());
    auto field = velocity_spinor_grid(chi);
    const double expect = 0.5 * (g->wavenumber(0, 2) + g->wavenumber(0, 6));
    for (std::size_t f = 0; f < g->size(); f += 7) {
        CHECK(std::abs(field.v[0][f] - expect) < 1e-10);
    }
}

TEST_CASE("current equals density times velocity") {
    auto g = box_1d();
    // random-ish smooth state: superposed displaced packets with momenta
    auto a = WaveFunction::gaussian(g, kUnit, {-1.5, 0, 0}, {0.9, 0, 0}, {1.3, 0, 0});
    auto b = WaveFunction::gaussian(g, kUnit, {1.0, 0, 0}, {0.7, 0, 0}, {-0.6, 0, 0});
    auto psi = superpose(a, b, cd(0.8, 0.1), cd(0.5, -0.4));

    auto field = velocity_grid(psi);
    auto j = current_grid(psi);
    auto rho = density(psi);
    double worst = 0.0;
    for (std::size_t f = 0; f < g->size(); ++f) {
        if (!field.mask[f]) continue;
        worst = std::max(worst, std::abs(j[0][f] - rho[f] * field.v[0][f]));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("plane-wave current is uniform") {
    auto g = box_1d();
    auto psi = WaveFunction::plane_wave(g, kUnit, {5, 0, 0});
    auto j = current_grid(psi);
    const double expect = g->wavenumber(0, 5) / 20.0;  // k x density 1/L
    for (std::size_t f = 0; f < g->size(); f += 13) {
        CHECK(std::abs(j[0][f] - expect) < 1e-10);
    }
}

TEST_CASE("real state carries no current") {
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {0.5, 0, 0}, {1.1, 0, 0});
    auto j = current_grid(psi);
    for (std::size_t f = 0; f < g->size(); f += 13) {
        CHECK(std::abs(j[0][f]) < 1e-12);
    }
}

TEST_CASE("global phase and amplitude scaling leave v and J unchanged") {
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {0.3, 0, 0}, {1.0, 0, 0}, {1.5, 0, 0});
    const cd phase = std::exp(cd(0.0, 1.234));
    std::vector<cd> rotated(g->size());
    for (std::size_t f = 0; f < g->size(); ++f) rotated[f] = phase * psi.values()[f];
    auto psi2 = WaveFunction::from_values(g, kUnit, std::move(rotated));

    auto f1 = velocity_grid(psi);
    auto f2 = velocity_grid(psi2);
    auto j1 = current_grid(psi);
    auto j2 = current_grid(psi2);
    auto rho = density(psi);
    for (std::size_t f = 0; f < g->size(); f += 7) {
        if (f1.mask[f]) CHECK(std::abs(j1[0][f] - j2[0][f]) < 1e-13);
        // the tight velocity bound holds where rounding noise (~1e-15/sqrt(rho))
        // stays under it
        if (rho[f] < 0.05) continue;
        CHECK(std::abs(f1.v[0][f] - f2.v[0][f]) < 1e-14);
    }
}

TEST_CASE("galilei boost shifts the velocity field by u") {
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    const double u = g->wavenumber(0, 8);  // boost by a grid mode keeps periodicity
    std::vector<cd> boosted(g->size());
    for (std::size_t f = 0; f < g->size(); ++f) {
        const double x = g->point_at(f)[0];
        boosted[f] = psi.values()[f] * std::exp(cd(0.0, u * x));  // m=hbar=1
    }
    auto psi_b = WaveFunction::from_values(g, kUnit, std::move(boosted));
    auto f0 = velocity_grid(psi);
    auto fb = velocity_grid(psi_b);
    auto rho = density(psi);
    for (std::size_t f = 0; f < g->size(); ++f) {
        if (rho[f] < 1e-4) continue;  // below that, rounding noise dominates
        CHECK(std::abs(fb.v[0][f] - f0.v[0][f] - u) < 1e-10);
    }
}

TEST_CASE("discrete continuity on the free gaussian") {
    // d rho/dt + div J = 0; centered time difference of stored densities
    auto g = box_1d();
    auto free = Potential::free_space(g);
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    PropagatorSpec spec{Method::split_step_spectral, 1e-3, 0.2, 10};
    auto series = evolve(psi, free, spec);
    REQUIRE(series.size() >= 3);
    const std::size_t mid = series.size() / 2;
    const double h = series.frame_interval();

    auto rho_prev = density(series.frame(mid - 1));
    auto rho_next = density(series.frame(mid + 1));
    auto j = current_grid(series.frame(mid));
    Fft fft(*g);
    auto div_j = spectral_gradient_real(*g, j[0], 0, fft);

    double worst = 0.0;
    for (std::size_t f = 0; f < g->size(); ++f) {
        const double drho = (rho_next[f] - rho_prev[f]) / (2.0 * h);
        worst = std::max(worst, std::abs(drho + div_j[f]));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("velocity_at agrees with velocity_grid on frame points") {
    auto g = box_1d();
    auto free = Potential::free_space(g);
    auto psi = WaveFunction::gaussian(g, kUnit, {0.5, 0, 0}, {1.0, 0, 0}, {1.0, 0, 0});
    PropagatorSpec spec{Method::split_step_spectral, 1e-3, 0.5, 50};
    auto series = evolve(psi, free, spec);

    const std::size_t fi = 3;
    auto field = velocity_grid(series.frame(fi));
    GuidanceField guide(series);
    for (std::size_t f = 70; f < 190; f += 17) {
        REQUIRE(field.mask[f] == 1);
        const Point q = g->point_at(f);
        const Point v = guide.velocity(series.time(fi), q);
        CHECK(std::abs(v[0] - field.v[0][f]) < 1e-12);
    }
}

TEST_CASE("velocity_at on a plane wave is flat off-grid") {
    auto g = box_1d();
    auto free = Potential::free_space(g);
    auto psi = WaveFunction::plane_wave(g, kUnit, {3, 0, 0});
    PropagatorSpec spec{Method::split_step_spectral, 1e-3, 0.1, 10};
    auto series = evolve(psi, free, spec);
    const double k = g->wavenumber(0, 3);
    GuidanceField guide(series);
    for (double x : {-7.13, -2.4142, 0.333, 4.99, 8.501}) {
        for (double t : {0.0, 0.033, 0.1}) {
            const Point v = guide.velocity(t, {x, 0, 0});
            CHECK(std::abs(v[0] - k) < 1e-8);
        }
    }
}

TEST_CASE("velocity_at is exactly homogeneous of degree zero") {
    auto g = box_1d();
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0}, {1.0, 0, 0});
    PropagatorSpec spec{Method::split_step_spectral, 1e-3, 0.1, 100};

    FrameSeries plain(g, kUnit, Topology::periodic, spec);
    FrameSeries doubled(g, kUnit, Topology::periodic, spec);
    std::vector<cd> twice(g->size());
    for (std::size_t f = 0; f < g->size(); ++f) twice[f] = 2.0 * psi.values()[f];
    plain.append(0.0, psi.values());
    plain.append(0.1, psi.values());
    doubled.append(0.0, twice);
    doubled.append(0.1, twice);

    GuidanceField ga(plain), gb(doubled);
    for (double x : {-3.7, -0.21, 1.13, 2.99}) {
        const Point va = ga.velocity(0.05, {x, 0, 0});
        const Point vb = gb.velocity(0.05, {x, 0, 0});
        CHECK(std::abs(va[0] - vb[0]) < 1e-14);
    }
}

TEST_CASE("velocity_at error paths") {
    auto g = box_1d();
    auto free = Potential::free_space(g);
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    PropagatorSpec spec{Method::split_step_spectral, 1e-3, 0.1, 10};
    auto series = evolve(psi, free, spec);
    GuidanceField guide(series);
    CHECK_THROWS_AS(guide.velocity(0.05, {11.0, 0, 0}), BoundaryError);
    CHECK_THROWS_AS(guide.velocity(5.0, {0.0, 0, 0}), StateError);
    // deep in the gaussian tail the interpolated density vanishes
    CHECK_THROWS_AS(guide.velocity(0.05, {-9.7, 0, 0}), NodeEncounter);
}

TEST_CASE("node encounter reports where and when") {
    auto g = box_1d();
    auto free = Potential::free_space(g);
    auto psi = WaveFunction::gaussian(g, kUnit, {0, 0, 0}, {1.0, 0, 0});
    PropagatorSpec spec{Method::split_step_spectral, 1e-3, 0.1, 10};
    auto series = evolve(psi, free, spec);
    GuidanceField guide(series);
    try {
        guide.velocity(0.03, {9.5, 0, 0});
        FAIL("expected a node encounter");
    } catch (const NodeEncounter& e) {
        CHECK(e.q[0] == doctest::Approx(9.5));
        CHECK(e.t == doctest::Approx(0.03));
    }
}

TEST_CASE("product state: partner position is irrelevant") {
    auto g = Grid::make({{{-8.0, 8.0, 128}, {-8.0, 8.0, 128}}, 1 << 22});
    auto psi = WaveFunction::gaussian(g, kUnit2, {-1.0, 1.5, 0}, {0.8, 0.8, 0}, {1.0, -0.5, 0});
    std::vector<double> partners{-2.0, -0.5, 0.8, 1.5, 2.9};
    auto res = nonlocality_probe(psi, -1.0, partners);
    CHECK(res.spread < 1e-12);
}

TEST_CASE("entangled state: partner position steers particle 1") {
    // (phi_a(x1) phi_b(x2) + phi_b(x1) phi_a(x2)) / norm with packets at
    // +-2 moving toward each other
    auto g = Grid::make({{{-8.0, 8.0, 128}, {-8.0, 8.0, 128}}, 1 << 22});
    auto ab = WaveFunction::gaussian(g, kUnit2, {-2.0, 2.0, 0}, {0.5, 0.5, 0}, {1.0, -1.0, 0});
    auto ba = WaveFunction::gaussian(g, kUnit2, {2.0, -2.0, 0}, {0.5, 0.5, 0}, {-1.0, 1.0, 0});
    auto cat = superpose(ab, ba, 1.0, 1.0);
    std::vector<double> partners{-2.5, -2.0, -1.5, 1.5, 2.0, 2.5};
    auto res = nonlocality_probe(cat, 0.0, partners);
    CHECK(res.spread > 0.1);

    // switch one branch off: constancy returns (probe near that branch's
    // partner packet; the far side is now a genuine node)
    auto nearly = superpose(ab, ba, 1.0, 0.0);
    auto res0 = nonlocality_probe(nearly, 0.0, {1.5, 2.0, 2.5});
    CHECK(res0.spread < 1e-10);
}
