// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "dwlab/ensemble.hpp"
#include "dwlab/errors.hpp"
#include "dwlab/freeconv.hpp"
#include "dwlab/infinitesimal.hpp"
#include "dwlab/montecarlo.hpp"
#include "dwlab/spectral.hpp"
#include "dwlab/testfn.hpp"
#include "dwlab/theory.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

using namespace dwlab;

namespace {

// Fixed before any large run was looked at; not tuned.
constexpr std::uint64_t kSeed = 20261018;

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void guarded(int id, const std::string& name, const std::function<std::pair<bool, std::string>()>& body) {
    try {
        const auto [pass, detail] = body();
        report(id, name, pass, detail);
    } catch (const std::exception& e) {
        report(id, name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Quadratic-formula semicircle transform on the branch with G ~ 1/z.
cplx semicircle(double v, cplx z) {
    cplx r = std::sqrt(z * z - 4.0 * v);
    if ((r / z).real() < 0) r = -r;
    return (z - r) / (2.0 * v);
}

std::vector<cplx> grid200() {
    std::vector<cplx> g;
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 10; ++j) g.emplace_back(-5.0 + 10.0 * i / 19.0, 0.1 + 3.9 * j / 9.0);
    return g;
}

ExperimentPlan big_plan(EntryLaw law, const std::string& deformation) {
    ExperimentPlan plan;
    plan.params = EnsembleParams::make(400, std::move(law), 1.0, std::nullopt, deformation_from_spec(deformation, 400));
    plan.samples = 2000;
    plan.z_grid = {{0, 2}, {1, 1}, {-1, 0.5}};
    plan.pairs = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
    plan.master_seed = kSeed;
    return plan;
}

std::pair<bool, std::string> covariance_ok(const EstimatorReport& r, const EnsembleParams& e) {
    const auto p = FluctuationParams::finite_n(e);
    std::vector<cplx> theory;
    for (const auto& pe : r.pairs) theory.push_back(gamma_value(p, pe.z1, pe.z2));
    double worst = 0, worst_conj = 0;
    for (const auto& row : covariance_check(r, theory)) worst = std::max(worst, row.ratio);
    for (const auto& row : covariance_check_conjugated(r)) worst_conj = std::max(worst_conj, row.ratio);
    return {worst <= 3.0, fmt("max ratio %.3f over %g pairs; conjugated pairing max %.3f", worst,
                              static_cast<double>(r.pairs.size()), worst_conj)};
}

}  // namespace

int main() {
    const auto d0 = AtomicMeasure::dirac(0.0);

    guarded(1, "semicircle oracle", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        double worst = 0;
        for (cplx z : grid200()) worst = std::max(worst, std::abs(solve_pastur(d0, 1.0, z).G - semicircle(1.0, z)));
        const double t = seconds_since(t0);
        return std::pair{worst <= 1e-10 && t < 1.0, fmt("max |G - closed form| = %.2e, %.3f s", worst, t)};
    });

    guarded(2, "subordination identity", [&] {
        double worst = 0;
        for (cplx z : grid200()) {
            const auto s = solve_pastur(d0, 1.0, z);
            worst = std::max(worst, std::abs(s.omega * s.G - 1.0));
        }
        return std::pair{worst <= 1e-10, fmt("max |omega G - 1| = %.2e", worst)};
    });

    guarded(3, "dual-path specialisation", [&] {
        std::mt19937_64 rng(kSeed);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        double wb = 0, wg = 0;
        for (int k = 0; k < 50; ++k) {
            const double sigma2 = 0.3 + 1.7 * u(rng), s2 = 0.3 + 2 * u(rng);
            const double tau = sigma2 * (2 * u(rng) - 1), kappa = -2 * sigma2 * sigma2 * u(rng);
            const auto p = FluctuationParams::limit(sigma2, s2, tau, kappa, d0);
            const cplx z(6 * u(rng) - 3, 0.2 + 3 * u(rng));
            const cplx z2(6 * u(rng) - 3, (u(rng) < 0.5 ? -1.0 : 1.0) * (0.2 + 3 * u(rng)));
            const cplx b = beta(p, z), b0 = bao_xie_b0(sigma2, s2, tau, kappa, z);
            const cplx g = gamma_value(p, z, z2), c0 = bao_xie_C0(sigma2, s2, tau, kappa, z, z2);
            wb = std::max(wb, std::abs(b - b0) / std::abs(b0));
            wg = std::max(wg, std::abs(g - c0) / std::abs(c0));
        }
        return std::pair{wb <= 1e-9 && wg <= 1e-9, fmt("max rel |beta - b0| = %.2e, |Gamma - C0| = %.2e", wb, wg)};
    });

    guarded(4, "kernel derivative check", [&] {
        const auto p = FluctuationParams::limit(1.0, 1.3, 0.6, -0.8, AtomicMeasure({{-1, 0.3}, {0.2, 0.3}, {1.5, 0.4}}));
        std::mt19937_64 rng(kSeed + 4);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const double h = 1e-4;
        double worst = 0;
        for (int k = 0; k < 20; ++k) {
            const cplx z1(6 * u(rng) - 3, 0.3 + 2 * u(rng)), z2(6 * u(rng) - 3, (k % 2 ? -1.0 : 1.0) * (0.3 + 2 * u(rng)));
            const cplx fd = (gamma_primitive(p, z1 + h, z2 + h) - gamma_primitive(p, z1 + h, z2 - h) -
                             gamma_primitive(p, z1 - h, z2 + h) + gamma_primitive(p, z1 - h, z2 - h)) /
                            (4 * h * h);
            const cplx g = gamma_value(p, z1, z2);
            worst = std::max(worst, std::abs(fd - g) / std::abs(g));
        }
        return std::pair{worst <= 1e-5, fmt("max relative deviation %.2e at 20 points", worst)};
    });

    // One deformed GUE and one Rademacher run serve criteria 5 to 9.
    std::optional<EstimatorReport> gue, rad;
    ExperimentPlan gue_plan = big_plan(EntryLaw::gaussian_complex(), "two_point:-1,1");
    ExperimentPlan rad_plan = big_plan(EntryLaw::rademacher_real(), "zero");
    double gue_time = 0, rad_time = 0;
    try {
        auto t0 = std::chrono::steady_clock::now();
        gue = run(gue_plan);
        gue_time = seconds_since(t0);
        t0 = std::chrono::steady_clock::now();
        rad = run(rad_plan);
        rad_time = seconds_since(t0);
    } catch (const std::exception& e) {
        std::printf("note: Monte Carlo run failed: %s\n", e.what());
    }

    guarded(5, "vanishing-bias experiment", [&] {
        if (!gue) throw Error("GUE run missing");
        double worst = 0;
        for (const auto& e : gue->z) worst = std::max(worst, std::abs(e.bias_hat) / e.bias_se);
        return std::pair{worst <= 3.0, fmt("N=400 M=2000, max |bias|/SE = %.3f, %.0f s", worst, gue_time)};
    });

    guarded(6, "nonzero-bias experiment", [&] {
        if (!rad) throw Error("Rademacher run missing");
        double worst = 0;
        for (const auto& e : rad->z) worst = std::max(worst, std::abs(e.bias_hat - e.beta_theory) / e.bias_se);
        return std::pair{worst <= 3.0, fmt("N=400 M=2000, max |bias - beta_N|/SE = %.3f, %.0f s", worst, rad_time)};
    });

    guarded(7, "covariance experiment", [&] {
        if (!gue || !rad) throw Error("Monte Carlo runs missing");
        const auto [g_ok, g_detail] = covariance_ok(*gue, gue_plan.params);
        const auto [r_ok, r_detail] = covariance_ok(*rad, rad_plan.params);
        return std::pair{g_ok && r_ok, "GUE " + g_detail + "; Rademacher " + r_detail};
    });

    guarded(8, "CLT property", [&] {
        if (!gue) throw Error("GUE run missing");
        double re = -1, im = -1;
        for (const auto& s : normality_check(*gue)) {
            if (s.id == "TrR(0+2i).re") re = s.ks_pvalue;
            if (s.id == "TrR(0+2i).im") im = s.ks_pvalue;
        }
        return std::pair{re > 0.01 && im > 0.01, fmt("KS p-values Re %.3f, Im %.3f", re, im)};
    });

    guarded(9, "variance bounds", [&] {
        if (!gue || !rad) throw Error("Monte Carlo runs missing");
        bool ok = true;
        double worst = 0;
        for (const auto& [r, e] : {std::pair{&*gue, &gue_plan.params}, std::pair{&*rad, &rad_plan.params}})
            for (const auto& row : variance_bound_check(*r, *e)) {
                ok = ok && row.pass;
                worst = std::max(worst, row.var_hat / std::min(row.crude, row.refined));
            }
        return std::pair{ok, fmt("max Var / min(bound) = %.3f", worst)};
    });

    guarded(10, "identity suite", [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const auto e = EnsembleParams::make(50, EntryLaw::gaussian_complex(), 1.0, std::nullopt, std::vector<double>(50, 0.0));
        const std::vector<cplx> zs{{0, 0.5}, {1, 1}, {-1.5, 0.2}};
        bool ok = true;
        double worst_schur = 0;
        for (std::uint64_t m = 0; m < 100; ++m) {
            const auto a = sample(e, kSeed, m), b = sample(e, kSeed, m + 100);
            const auto spec = eigenvalues(a);
            for (std::size_t k = 0; k < zs.size(); ++k) {
                const cplx z = zs[k];
                const auto s = verify_schur(a.matrix, m % 50, z);
                worst_schur = std::max(worst_schur, std::max(s.diagonal_residual, s.trace_residual) / s.tolerance);
                ok = ok && s.ok() && s.minor_trace_gap <= 1.0 / std::abs(z.imag());
                ok = ok && verify_resolvent_identity(a.matrix, b.matrix, z, zs[(k + 1) % zs.size()]).ok();
                ok = ok && resolvent_norm_ratio(spec, z) <= 1.0 + 1e-12;
            }
        }
        const double t = seconds_since(t0);
        return std::pair{ok, fmt("100 samples, worst Schur residual / tolerance %.2e, %.1f s", worst_schur, t)};
    });

    guarded(11, "infinitesimal suite", [&] {
        const std::vector<std::size_t> dims{8, 16, 32, 64};
        const auto none = [](std::size_t) { return GeneratorMap{}; };
        bool ok = infinitesimal_check(PairedWord::parse("w1 w1"), dims, 1.0, none).identically_zero;
        for (const auto& r : infinitesimal_check(PairedWord::parse("w1 w1 w1 w1"), dims, 1.0, none).results)
            ok = ok && std::abs(r.correction - 1.0 / double(r.n_dim * r.n_dim)) <= 1e-12;
        const auto two = PairedWord::parse("w1 w2 w1 w2");
        for (std::size_t n : dims)
            ok = ok && std::abs(xi_exact(two, n, 1.0 / n, {}) - 1.0 / double(n * n)) <= 1e-14;

        const auto gens = [](std::size_t n) {
            return GeneratorMap{{"a", generator_from_spec("alternating", n)}, {"b", generator_from_spec("linspace:0,2", n)}};
        };
        double worst_slope = -1e9;
        for (const char* w : {"w1 a w1 a w1 a w1 a", "w1 a w1 b w1 a w1 b", "w1 a w2 a w1 a w2 a", "w1 b w1 w1 b w1",
                              "w1 a w1 b w1 a w1 b w1 w1"}) {
            const auto r = infinitesimal_check(PairedWord::parse(w), dims, 1.0, gens);
            ok = ok && r.pass && !r.identically_zero;
            worst_slope = std::max(worst_slope, r.slope);
        }
        double worst_mc = 0;
        std::uint64_t offset = 0;
        for (const char* w : {"w1 w1", "w1 w1 w1 w1", "w1 w2 w1 w2"}) {
            const auto cc = monte_carlo_cross_check(PairedWord::parse(w), 50, 1.0, 5000, {}, kSeed + 11 + offset++);
            ok = ok && cc.pass;
            worst_mc = std::max(worst_mc, cc.ratio);
        }
        return std::pair{ok, fmt("worst mixed-word slope %.3f, worst Monte Carlo ratio %.3f", worst_slope, worst_mc)};
    });

    guarded(12, "truncation", [&] {
        bool bounded = true;
        std::vector<double> drift;
        const auto arctan = TestFunction::arctan();
        for (std::size_t n : {200, 400, 800}) {
            const auto e = EnsembleParams::make(n, EntryLaw::gaussian_real(), 1.0, std::nullopt, std::vector<double>(n, 0.0));
            const double delta = choose_delta(n);
            const std::size_t m = 30;
            double acc = 0;
            for (std::uint64_t k = 0; k < m; ++k) {
                const auto s = sample(e, kSeed + 12, k);
                const auto t = truncate_center_homogenize(s, e, delta);
                bounded = bounded && t.matrix.cwiseAbs().maxCoeff() <= 2 * delta;
                acc += std::abs(linear_statistic(eigenvalues(s), arctan).value - linear_statistic(eigenvalues(t), arctan).value);
            }
            drift.push_back(acc / m);
        }
        const bool decreasing = drift[1] < drift[0] && drift[2] < drift[1];
        return std::pair{bounded && decreasing, fmt("entries <= 2 delta; E|N - N_trunc| = %.3g, %.3g, %.3g", drift[0],
                                                    drift[1], drift[2])};
    });

    guarded(13, "extension consistency", [&] {
        const auto p = FluctuationParams::limit(1.0, 1.0, 1.0, -2.0, AtomicMeasure({{-1, 0.5}, {1, 0.5}}));
        const auto ys = default_y_schedule();
        bool ok = true;
        double worst = 0;
        for (cplx z : {cplx(0.5, 1.0), cplx(-1.2, 0.6)}) {
            const auto r = extend_bias(p, TestFunction::real_resolvent_pair(z), ys);
            const double exact = 2.0 * beta(p, z).real();
            ok = ok && std::abs(r.value - exact) <= 1e-4 + r.error;
            worst = std::max(worst, std::abs(r.value - exact));
        }
        const cplx z(0.3, 0.7);
        const auto v = extend_variance(p, TestFunction::real_resolvent_pair(z));
        const cplx ref = gamma_value(p, z, z) + 2.0 * gamma_value(p, z, std::conj(z)) + gamma_value(p, std::conj(z), std::conj(z));
        const double vdev = std::abs(v.value - ref.real()) / std::abs(ref);
        ok = ok && vdev <= 1e-12;
        return std::pair{ok, fmt("bias span deviation %.2e, variance relative deviation %.2e", worst, vdev)};
    });

    guarded(14, "reproducibility", [&] {
        bool ok = true;
        for (bool truncate : {false, true}) {
            ExperimentPlan plan;
            plan.params = EnsembleParams::make(40, EntryLaw::gaussian_real(), 1.0, std::nullopt,
                                               deformation_from_spec("uniform:-1,1", 40));
            plan.samples = 64;
            plan.z_grid = {{0, 2}, {0.5, 0.3}};
            plan.test_functions = {"arctan", "bump:0,1,7"};
            plan.master_seed = kSeed + 14;
            plan.truncate = truncate;
            ok = ok && run(plan, 1).to_json() == run(plan, 8).to_json();
        }
        return std::pair{ok, std::string("reports byte-identical for 1 and 8 threads")};
    });

    std::printf("%d of 14 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
