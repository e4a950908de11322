#include "dwlab/freeconv.hpp"

#include "dwlab/errors.hpp"
#include "dwlab/extrapolate.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>

namespace dwlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

SubordinationSolution conjugate(SubordinationSolution s) {
    s.z = std::conj(s.z);
    s.G = std::conj(s.G);
    s.omega = std::conj(s.omega);
    s.G1 = std::conj(s.G1);
    s.G2 = std::conj(s.G2);
    s.omega1 = std::conj(s.omega1);
    s.omega2 = std::conj(s.omega2);
    return s;
}

// Solve in the upper half plane.
SubordinationSolution solve_upper(const AtomicMeasure& nu, double v, cplx z, const PasturOptions& opts) {
    cplx g = opts.warm_start.value_or(1.0 / z);
    if (!(g.imag() < 0.0)) g = 1.0 / z;
    bool newton = false;
    int it = 0;
    double residual = std::numeric_limits<double>::infinity();
    // The fixed point alone contracts slowly near the real axis; after this
    // many steps Newton takes over regardless.
    const int fixed_point_budget = 2000;

    for (; it < opts.max_iterations; ++it) {
        const cplx w = z - v * g;
        const cplx gnu = nu.stieltjes(w, 0);
        const cplx f = g - gnu;
        residual = std::abs(f);
        const double scale = std::max(std::abs(g), 1e-300);
        if (residual <= 4.0 * kEps * scale) break;
        if (!newton && (residual < opts.newton_switch * std::max(1.0, scale) || it >= fixed_point_budget))
            newton = true;
        if (!newton) {
            g = (1.0 - opts.damping) * g + opts.damping * gnu;
            continue;
        }
        const cplx fprime = 1.0 + v * nu.stieltjes(w, 1);
        cplx step = f / fprime;
        // Backtrack to keep Im G < 0, i.e. Im omega >= Im z.
        cplx next = g - step;
        for (int k = 0; k < 60 && !(next.imag() < 0.0); ++k) {
            step *= 0.5;
            next = g - step;
        }
        g = next;
        if (std::abs(step) <= 2.0 * kEps * scale && residual <= 1e-12) {
            ++it;
            const cplx w2 = z - v * g;
            residual = std::abs(g - nu.stieltjes(w2, 0));
            break;
        }
    }
    if (!(residual <= 1e-12 * std::max(1.0, std::abs(g))))
        throw SolverError("Pastur iteration did not converge", residual);

    SubordinationSolution s;
    s.z = z;
    s.v = v;
    s.G = g;
    s.omega = z - v * g;
    s.iterations = it;
    s.residual = residual;
    if (opts.derivatives) {
        const cplx d1 = nu.stieltjes(s.omega, 1);
        const cplx d2 = nu.stieltjes(s.omega, 2);
        const cplx denom = 1.0 + v * d1;
        if (std::abs(denom) < 1e-10) throw SingularityError("|1 + v G_nu'(omega)| below 1e-10: too close to an edge");
        s.omega1 = 1.0 / denom;
        s.G1 = d1 * s.omega1;
        s.omega2 = -v * d2 * s.omega1 * s.omega1 * s.omega1;
        s.G2 = d2 * s.omega1 * s.omega1 + d1 * s.omega2;
    }
    return s;
}

}  // namespace

SubordinationSolution solve_pastur(const AtomicMeasure& nu, double v, cplx z, const PasturOptions& opts) {
    if (!(v > 0.0)) throw ParameterError("semicircle variance must be positive");
    if (z.imag() == 0.0) throw DomainError("solve_pastur needs Im z != 0");
    if (z.imag() > 0.0) return solve_upper(nu, v, z, opts);
    PasturOptions up = opts;
    if (up.warm_start) up.warm_start = std::conj(*up.warm_start);
    return conjugate(solve_upper(nu, v, std::conj(z), up));
}

cplx semicircle_stieltjes(double v, cplx z) {
    if (z.imag() == 0.0) throw DomainError("semicircle transform needs Im z != 0");
    // sqrt(z - 2 sqrt v) sqrt(z + 2 sqrt v) has the right branch cut [-2 sqrt v, 2 sqrt v].
    const double r = 2.0 * std::sqrt(v);
    const cplx root = std::sqrt(z - r) * std::sqrt(z + r);
    return (z - root) / (2.0 * v);
}

bool is_in_omega(const AtomicMeasure& nu, double v, cplx w) {
    return (w + v * nu.stieltjes(w, 0)).imag() > 0.0;
}

std::vector<double> default_eta_schedule() {
    std::vector<double> etas;
    for (double eta = 1e-2; eta >= 0.5e-6; eta *= 0.5) etas.push_back(eta);
    return etas;
}

DensityValue density(const AtomicMeasure& nu, double v, double x, std::span<const double> eta_schedule) {
    if (eta_schedule.size() < 3) throw ParameterError("density needs at least three eta values");
    if (eta_schedule.back() > 1e-6 * 1.0000001) throw ParameterError("eta schedule must reach 1e-6");
    for (std::size_t j = 1; j < eta_schedule.size(); ++j)
        if (!(eta_schedule[j] < eta_schedule[j - 1])) throw ParameterError("eta schedule must decrease");

    std::vector<double> f;
    f.reserve(eta_schedule.size());
    PasturOptions opts;
    opts.derivatives = false;
    for (double eta : eta_schedule) {
        const auto sol = solve_pastur(nu, v, cplx(x, eta), opts);
        opts.warm_start = sol.G;
        f.push_back(-sol.G.imag() / std::numbers::pi);
    }

    const Extrapolation e = extrapolate_to_zero(eta_schedule, f);
    return {std::max(0.0, e.value), e.error, !(e.converging || e.error <= 1e-10)};
}

DensityValue density(const AtomicMeasure& nu, double v, double x) {
    const auto etas = default_eta_schedule();
    return density(nu, v, x, etas);
}

Window support_window(const AtomicMeasure& nu, double v) {
    // The support sits inside [min - 2 sqrt v, max + 2 sqrt v]; the small
    // margin keeps the window ends strictly outside it.
    const double r = 2.1 * std::sqrt(v);
    return {nu.min_location() - r, nu.max_location() + r};
}

IntegralResult integrate_against_rho(const AtomicMeasure& nu, double v, const TestFunction& phi,
                                     const QuadratureSpec& spec) {
    const Window win = support_window(nu, v);
    // Margin check: the density must vanish just inside the window ends.
    if (density(nu, v, win.lo).value > 1e-8 || density(nu, v, win.hi).value > 1e-8)
        throw AccuracyError("support window detection failed: density does not vanish at the window ends");

    double sup_phi = 0.0;
    for (int i = 0; i <= 256; ++i) sup_phi = std::max(sup_phi, std::abs(phi.real(win.lo + (win.hi - win.lo) * i / 256.0)));
    const double target = spec.abs_tolerance * (1.0 + sup_phi);

    auto integrand = [&](double x) { return phi.real(x) * density(nu, v, x).value; };
    const std::size_t panels = std::max<std::size_t>(1, spec.panels);
    const double width = (win.hi - win.lo) / static_cast<double>(panels);
    double total = 0.0, error = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        const double a = win.lo + width * static_cast<double>(k);
        double e = 0.0;
        total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, a, a + width, spec.max_depth,
                                                                                 target, &e);
        error += e;
    }
    return {total, error};
}

void write_density_csv(std::ostream& out, const AtomicMeasure& nu, double v, std::span<const double> xs,
                       const std::vector<std::string>& metadata) {
    for (const auto& line : metadata) out << "# " << line << '\n';
    out << "x,density,error_estimate\n" << std::setprecision(17);
    for (double x : xs) {
        const auto d = density(nu, v, x);
        out << x << ',' << d.value << ',' << d.error << '\n';
    }
}

}  // namespace dwlab
