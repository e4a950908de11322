#include "doctest.h"

#include "dwlab/errors.hpp"
#include "dwlab/spectral.hpp"

#include <cmath>
#include <sstream>

using namespace dwlab;

namespace {

Eigen::MatrixXcd random_hermitian(std::size_t n, std::uint64_t seed) {
    const auto p = EnsembleParams::make(n, EntryLaw::gaussian_complex(), 1.0, std::nullopt,
                                        std::vector<double>(n, 0.0));
    return sample(p, seed, 0).matrix;
}

}  // namespace

TEST_CASE("small eigenvalue problems") {
    Eigen::MatrixXcd d(2, 2);
    d << 1, 0, 0, -1;
    CHECK(eigenvalues(d).eigenvalues == std::vector<double>{-1, 1});
    Eigen::MatrixXcd x(2, 2);
    x << 0, 1, 1, 0;
    const auto e = eigenvalues(x).eigenvalues;
    CHECK(e[0] == doctest::Approx(-1.0));
    CHECK(e[1] == doctest::Approx(1.0));
}

TEST_CASE("reconstruction of a random hermitian matrix") {
    const Eigen::MatrixXcd a = random_hermitian(5, 17);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a);
    const Eigen::MatrixXcd back = es.eigenvectors() * es.eigenvalues().asDiagonal() * es.eigenvectors().adjoint();
    CHECK((back - a).cwiseAbs().maxCoeff() < 1e-10);
    const auto spec = eigenvalues(a);
    for (int i = 0; i < 5; ++i) CHECK(spec.eigenvalues[i] == doctest::Approx(es.eigenvalues()(i)).epsilon(1e-10));
    double sum = 0;
    for (double l : spec.eigenvalues) sum += l;
    CHECK(std::abs(sum - a.trace().real()) < 1e-8 * 5 * a.norm());
}

TEST_CASE("non-finite input is rejected") {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(2, 2);
    a(0, 0) = std::nan("");
    CHECK_THROWS_AS(eigenvalues(a), InputError);
}

TEST_CASE("trace of the resolvent") {
    Spectrum s;
    s.eigenvalues = {-1, 1};
    const cplx t = trace_resolvent(s, {0, 2});
    CHECK(std::abs(t - cplx(0, -0.8)) < 1e-15);
    CHECK_THROWS_AS(trace_resolvent(s, 1.0), DomainError);

    Spectrum zero;
    zero.eigenvalues.assign(7, 0.0);
    const cplx z(0.3, 1.7);
    CHECK(std::abs(trace_resolvent(zero, z) - 7.0 / z) < 1e-14);

    const auto r = eigenvalues(random_hermitian(30, 3));
    CHECK(trace_resolvent(r, std::conj(z)) == std::conj(trace_resolvent(r, z)));
    CHECK(std::abs(trace_resolvent(r, z)) <= 30 / z.imag());
    CHECK(trace_resolvent(r, z).imag() < 0);
}

TEST_CASE("linear statistics") {
    const Eigen::MatrixXcd a = random_hermitian(20, 4);
    const auto s = eigenvalues(a);
    CHECK(linear_statistic(s, TestFunction::constant(1.0)).value.real() == doctest::Approx(20.0));
    CHECK(linear_statistic(s, TestFunction::monomial(1)).value.real() == doctest::Approx(a.trace().real()));
    const cplx z(0.5, 1.0);
    CHECK(std::abs(linear_statistic(s, TestFunction::resolvent(z)).value - trace_resolvent(s, z)) < 1e-13);
    const auto arctan = linear_statistic(s, TestFunction::arctan());
    CHECK(std::abs(arctan.value.imag()) <= 1e-12 * std::abs(arctan.value));
}

TEST_CASE("schur identities") {
    Eigen::MatrixXcd x(2, 2);
    x << 0.3, cplx(0.2, -0.1), cplx(0.2, 0.1), -0.7;
    const auto r2 = verify_schur(x, 0, {0, 1});
    CHECK(r2.diagonal_residual <= 1e-12);
    CHECK(r2.trace_residual <= 1e-12);

    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto r = verify_schur(random_hermitian(50, seed), seed * 7 % 50, {0.0, 0.5});
        CHECK(r.ok());
        CHECK(r.minor_trace_gap <= 1.0 / 0.5);
    }
}

TEST_CASE("resolvent identity") {
    const Eigen::MatrixXcd a = random_hermitian(10, 1), b = random_hermitian(10, 2);
    CHECK(verify_resolvent_identity(a, a, {0, 1}, {0, 1}).residual == doctest::Approx(0.0));
    const Eigen::MatrixXcd zero = Eigen::MatrixXcd::Zero(3, 3);
    CHECK(verify_resolvent_identity(zero, zero, {1, 1}, {0, 2}).ok());
    CHECK(verify_resolvent_identity(a, b, {0.3, 0.7}, {-1, 0.4}).ok());
}

TEST_CASE("norm, imaginary part and lipschitz identities") {
    const Eigen::MatrixXcd a = random_hermitian(40, 8);
    const auto s = eigenvalues(a);
    for (cplx z : {cplx(0, 0.1), cplx(1.5, 0.3), cplx(-2, 2)}) {
        CHECK(resolvent_norm_ratio(s, z) <= 1.0);
        CHECK(im_identity_residual(s, z) < 1e-10);
    }
    Eigen::MatrixXcd pert = a;
    pert(0, 1) += cplx(0.01, 0.02);
    pert(1, 0) = std::conj(pert(0, 1));
    pert(3, 3) += 0.05;
    CHECK(lipschitz_check(s, eigenvalues(pert), TestFunction::arctan(), 1.0).ok());
}

TEST_CASE("spectrum csv") {
    Spectrum s;
    s.eigenvalues = {-1, 0.5};
    std::ostringstream out;
    write_spectrum_csv(out, s, {"seed=1"});
    const std::string text = out.str();
    CHECK(text.rfind("# seed=1", 0) == 0);
    CHECK(text.find("0.5") != std::string::npos);
}
