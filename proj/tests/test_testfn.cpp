#include "doctest.h"

#include "dwlab/errors.hpp"
#include "dwlab/testfn.hpp"

#include <cmath>

using namespace dwlab;

TEST_CASE("evaluation") {
    CHECK(std::abs(TestFunction::resolvent({0, 2})(0.0) - cplx(0, -0.5)) < 1e-16);
    CHECK(TestFunction::real_resolvent_pair({0, 2}).real(0.0) == doctest::Approx(0.0));
    CHECK(TestFunction::smooth_bump(0, 1, 7).real(2.0) == 0.0);
    CHECK(TestFunction::smooth_bump(0, 1, 7).real(0.0) == doctest::Approx(1.0));
    CHECK_THROWS_AS(TestFunction::resolvent(1.0), DomainError);
}

TEST_CASE("pair equals resolvent plus its conjugate") {
    const cplx z(0.4, -0.9);
    const auto r = TestFunction::resolvent(z), pr = TestFunction::real_resolvent_pair(z);
    for (double x = -3; x <= 3; x += 0.125) {
        const cplx v = r(x);
        CHECK(std::abs(pr(x) - (v + std::conj(v))) <= 1e-15);
        CHECK(pr(x).imag() == 0.0);
    }
}

TEST_CASE("bump derivatives are continuous across the support edge") {
    for (int k : {1, 2, 3}) {
        const auto f = TestFunction::smooth_bump(0, 1, k);
        auto diff = [&](int order, double x, double h) {
            double acc = 0;
            for (int j = 0; j <= order; ++j) acc += (j % 2 ? -1 : 1) * std::tgamma(order + 1) /
                                                    (std::tgamma(j + 1) * std::tgamma(order - j + 1)) * f.real(x - j * h);
            return acc / std::pow(h, order);
        };
        // Halving h halves the k-th quotient at the edge but leaves the (k+1)-th alone.
        const double h = 1e-2;
        CHECK(diff(k, 1.0, h) / diff(k, 1.0, h / 2) == doctest::Approx(2.0).epsilon(0.05));
        CHECK(diff(k + 1, 1.0, h) / diff(k + 1, 1.0, h / 2) == doctest::Approx(1.0).epsilon(0.1));
    }
}

TEST_CASE("smoothstep") {
    for (int k : {0, 1, 3, 7}) {
        CHECK(smoothstep(k, 0.0) == 0.0);
        CHECK(smoothstep(k, 1.0) == doctest::Approx(1.0));
        CHECK(smoothstep(k, 0.5) == doctest::Approx(0.5));
    }
}

TEST_CASE("registry") {
    CHECK(TestFunction::from_spec("arctan").real(1.0) == doctest::Approx(std::atan(1.0)));
    CHECK(TestFunction::from_spec("monomial:3").real(2.0) == doctest::Approx(8.0));
    CHECK(TestFunction::from_spec("indicator:-1,1").real(0.5) == 1.0);
    CHECK(TestFunction::from_spec("bump:0,1,7").smoothness() == 7);
    CHECK(TestFunction::from_spec("pair:0.5,1").kind() == TestKind::RealResolventPair);
    CHECK(TestFunction::from_spec("polycap:2,-1,1,0.5,3").real(0.5) == doctest::Approx(0.25));
    CHECK_THROWS_AS(TestFunction::from_spec("nope"), ConfigError);
}

TEST_CASE("H_s classification") {
    CHECK(classify(TestFunction::smooth_bump(0, 1, 7), 6.6).cls == HsClass::InHs);
    CHECK(classify(TestFunction::smooth_bump(0, 1, 2), 1.6).cls == HsClass::InHs);
    CHECK(classify(TestFunction::indicator(-1, 1), 1.6).cls == HsClass::NotInHs);
    CHECK(classify(TestFunction::resolvent({0, 1}), 3.0).cls == HsClass::InHs);
    CHECK(to_string(HsClass::InHs) == "in_Hs");
}
