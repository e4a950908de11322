#include "doctest.h"

#include "dwlab/errors.hpp"
#include "dwlab/freeconv.hpp"

#include <cmath>
#include <numbers>

using namespace dwlab;

namespace {

// Closed form on the branch with G ~ 1/z, independent of the library.
cplx semicircle(double v, cplx z) {
    cplx r = std::sqrt(z * z - 4.0 * v);
    if ((r / z).real() < 0) r = -r;
    return (z - r) / (2.0 * v);
}

}  // namespace

TEST_CASE("stieltjes transform of atomic measures") {
    const auto d0 = AtomicMeasure::dirac(0.0);
    CHECK(std::abs(stieltjes(d0, {0, 2}) - cplx(0, -0.5)) < 1e-15);
    const auto pm = AtomicMeasure({{-1, 0.5}, {1, 0.5}});
    CHECK(std::abs(stieltjes(pm, {0, 2}) - cplx(0, -0.4)) < 1e-15);
    const cplx w(0.4, 0.9);
    CHECK(std::abs(stieltjes(d0, w, 1) + 1.0 / (w * w)) < 1e-14);
    CHECK_THROWS_AS(stieltjes(pm, 1.0), DomainError);
    CHECK_THROWS_AS(AtomicMeasure({{0, 0.5}, {1, 0.4}}), ParameterError);
}

TEST_CASE("semicircle fixed point") {
    const auto d0 = AtomicMeasure::dirac(0.0);
    const auto s = solve_pastur(d0, 1.0, {0, 2});
    CHECK(std::abs(s.G - cplx(0, 1 - std::sqrt(2.0))) < 1e-12);
    CHECK(s.residual <= 1e-12);
    for (double re = -5; re <= 5; re += 0.5)
        for (double im : {0.1, 0.5, 1.0, 2.0, 4.0}) {
            const cplx z(re, im);
            const auto sol = solve_pastur(d0, 1.0, z);
            CHECK(std::abs(sol.G - semicircle(1.0, z)) < 1e-10);
            CHECK(std::abs(sol.omega * sol.G - 1.0) < 1e-10);
        }
}

TEST_CASE("solution invariants") {
    const auto nu = AtomicMeasure({{-1, 0.25}, {0.5, 0.5}, {2, 0.25}});
    for (cplx z : {cplx(0.1, 0.2), cplx(-1.3, 0.05), cplx(3, 1)}) {
        const auto s = solve_pastur(nu, 0.7, z);
        CHECK(s.G.imag() < 0);
        CHECK(s.omega.imag() >= z.imag());
        CHECK(std::abs(s.omega1 - 1.0 / (1.0 + 0.7 * nu.stieltjes(s.omega, 1))) < 1e-10);
        CHECK(std::abs(s.G1 - nu.stieltjes(s.omega, 1) * s.omega1) < 1e-10);
        const auto c = solve_pastur(nu, 0.7, std::conj(z));
        CHECK(c.G == std::conj(s.G));
        CHECK(c.omega1 == std::conj(s.omega1));
    }
}

TEST_CASE("derivatives against finite differences") {
    const auto nu = AtomicMeasure({{-1, 0.5}, {1, 0.5}});
    const double h = 1e-5;
    for (cplx z : {cplx(0.3, 0.6), cplx(-2, 0.4), cplx(0, 2)}) {
        const auto s = solve_pastur(nu, 1.0, z);
        const auto p = solve_pastur(nu, 1.0, z + h), m = solve_pastur(nu, 1.0, z - h);
        CHECK(std::abs((p.G - m.G) / (2 * h) - s.G1) <= 1e-5 * std::abs(s.G1));
        CHECK(std::abs((p.G - 2.0 * s.G + m.G) / (h * h) - s.G2) <= 1e-5 * std::abs(s.G2) + 1e-4);
        CHECK(std::abs((p.omega - m.omega) / (2 * h) - s.omega1) <= 1e-5 * std::abs(s.omega1));
        const cplx fd2 = (p.omega1 - m.omega1) / (2 * h);
        CHECK(std::abs(fd2 - s.omega2) <= 1e-5 * std::abs(s.omega2));
    }
}

TEST_CASE("vanishing semicircle variance") {
    const auto nu = AtomicMeasure({{-1, 0.5}, {1, 0.5}});
    const cplx z(0.2, 0.5);
    CHECK(std::abs(solve_pastur(nu, 1e-8, z).G - nu.stieltjes(z)) < 1e-6);
}

TEST_CASE("density") {
    const auto d0 = AtomicMeasure::dirac(0.0);
    CHECK(density(d0, 1.0, 0.0).value == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-6));
    CHECK(std::abs(density(d0, 1.0, 3.0).value) < 1e-6);
    CHECK(density(d0, 1.0, 1.2).value == doctest::Approx(std::sqrt(4 - 1.44) / (2 * std::numbers::pi)).epsilon(1e-6));
    // Normalisation by the trapezoid rule on a fine grid.
    const auto nu = AtomicMeasure({{-1, 0.5}, {1, 0.5}});
    const auto w = support_window(nu, 1.0);
    const int m = 2000;
    double total = 0;
    for (int i = 1; i < m; ++i) total += density(nu, 1.0, w.lo + (w.hi - w.lo) * i / m).value;
    total *= (w.hi - w.lo) / m;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("integration against rho") {
    const auto d0 = AtomicMeasure::dirac(0.0);
    CHECK(integrate_against_rho(d0, 1.0, TestFunction::constant(1.0)).value == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(std::abs(integrate_against_rho(d0, 1.0, TestFunction::monomial(1)).value) < 1e-4);
    CHECK(integrate_against_rho(d0, 1.0, TestFunction::monomial(2)).value == doctest::Approx(1.0).epsilon(1e-3));
    // Second moment of semicircle(v) boxplus nu is v + E nu^2.
    const auto nu = AtomicMeasure({{-1, 0.5}, {1, 0.5}});
    CHECK(integrate_against_rho(nu, 0.5, TestFunction::monomial(2)).value == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("omega domain") {
    const auto nu = AtomicMeasure({{-1, 0.5}, {1, 0.5}});
    const auto s = solve_pastur(nu, 1.0, {0.4, 0.3});
    CHECK(is_in_omega(nu, 1.0, s.omega));
}
