#include "dwlab/testfn.hpp"

#include "dwlab/config.hpp"
#include "dwlab/errors.hpp"
#include "dwlab/theory.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace dwlab {

namespace {

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

std::vector<double> parse_args(const std::string& text) {
    std::vector<double> out;
    for (const auto& a : split(text, ',')) out.push_back(std::stod(a));
    return out;
}

}  // namespace

double smoothstep(int order, double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double acc = 0.0;
    for (int n = 0; n <= order; ++n)
        acc += binomial(order + n, n) * binomial(2 * order + 1, order - n) * std::pow(-t, n);
    return std::pow(t, order + 1) * acc;
}

TestFunction TestFunction::resolvent(cplx z) {
    if (z.imag() == 0.0) throw DomainError("resolvent test function needs Im z != 0");
    TestFunction f("resolvent:" + format_complex(z), TestKind::Resolvent, [z](double x) { return 1.0 / (z - x); },
                   kSmooth);
    f.pole_ = z;
    return f;
}

TestFunction TestFunction::real_resolvent_pair(cplx z) {
    if (z.imag() == 0.0) throw DomainError("resolvent test function needs Im z != 0");
    TestFunction f("pair:" + format_complex(z), TestKind::RealResolventPair,
                   [z](double x) { return cplx(2.0 * (1.0 / (z - x)).real(), 0.0); }, kSmooth);
    f.pole_ = z;
    return f;
}

TestFunction TestFunction::smooth_bump(double center, double width, int order) {
    if (!(width > 0.0) || order < 0) throw ParameterError("bump needs width > 0 and order >= 0");
    TestFunction f("bump:" + num(center) + "," + num(width) + "," + std::to_string(order), TestKind::SmoothBump,
                   [center, width, order](double x) {
                       const double u = (x - center) / width;
                       if (std::abs(u) >= 1.0) return cplx(0.0);
                       return cplx(std::pow(1.0 - u * u, order + 1), 0.0);
                   },
                   order);
    f.support_ = {center - width, center + width};
    return f;
}

TestFunction TestFunction::poly_capped(int degree, double lo, double hi, double ramp, int order) {
    if (!(hi > lo) || !(ramp > 0.0) || degree < 0 || order < 0)
        throw ParameterError("polycap needs lo < hi, ramp > 0, degree and order >= 0");
    TestFunction f("polycap:" + std::to_string(degree) + "," + num(lo) + "," + num(hi) + "," + num(ramp) + "," +
                       std::to_string(order),
                   TestKind::PolyCapped,
                   [=](double x) {
                       const double cap = smoothstep(order, (x - lo + ramp) / ramp) *
                                          smoothstep(order, (hi + ramp - x) / ramp);
                       return cplx(std::pow(x, degree) * cap, 0.0);
                   },
                   order);
    f.support_ = {lo - ramp, hi + ramp};
    return f;
}

TestFunction TestFunction::grid_sampled(std::vector<double> x, std::vector<double> y) {
    if (x.size() != y.size() || x.size() < 2) throw ParameterError("grid function needs >= 2 matching samples");
    if (!std::is_sorted(x.begin(), x.end())) throw ParameterError("grid abscissae must be sorted");
    const double lo = x.front(), hi = x.back();
    TestFunction f("grid:" + std::to_string(x.size()), TestKind::GridSampled,
                   [x = std::move(x), y = std::move(y)](double t) {
                       if (t < x.front() || t > x.back()) return cplx(0.0);
                       const auto it = std::upper_bound(x.begin(), x.end(), t);
                       if (it == x.end()) return cplx(y.back());
                       const auto j = static_cast<std::size_t>(it - x.begin());
                       const double w = (t - x[j - 1]) / (x[j] - x[j - 1]);
                       return cplx((1.0 - w) * y[j - 1] + w * y[j]);
                   },
                   0);
    f.support_ = {lo, hi};
    return f;
}

TestFunction TestFunction::arctan() {
    return TestFunction("arctan", TestKind::Arctan, [](double x) { return cplx(std::atan(x)); }, kSmooth);
}

TestFunction TestFunction::monomial(int degree) {
    if (degree < 0) throw ParameterError("monomial degree must be >= 0");
    return TestFunction("monomial:" + std::to_string(degree), TestKind::Monomial,
                        [degree](double x) { return cplx(std::pow(x, degree)); }, kSmooth);
}

TestFunction TestFunction::constant(double value) {
    return TestFunction("constant:" + num(value), TestKind::Constant, [value](double) { return cplx(value); },
                        kSmooth);
}

TestFunction TestFunction::indicator(double lo, double hi) {
    if (!(hi > lo)) throw ParameterError("indicator needs lo < hi");
    TestFunction f("indicator:" + num(lo) + "," + num(hi), TestKind::Indicator,
                   [lo, hi](double x) { return cplx(x >= lo && x <= hi ? 1.0 : 0.0); }, kDiscontinuous);
    f.support_ = {lo, hi};
    return f;
}

TestFunction TestFunction::from_spec(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string kind = trim(spec.substr(0, colon));
    const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
    auto args = [&] { return parse_args(rest); };
    auto need = [&](std::size_t k) {
        auto a = args();
        if (a.size() != k) throw ConfigError("test function '" + spec + "' expects " + std::to_string(k) + " arguments");
        return a;
    };
    if (kind == "resolvent" || kind == "pair") {
        // Either `re,im` or a single complex literal.
        const auto parts = split(rest, ',');
        const cplx z = parts.size() == 2 ? cplx(std::stod(parts[0]), std::stod(parts[1])) : parse_complex(rest);
        return kind == "pair" ? real_resolvent_pair(z) : resolvent(z);
    }
    if (kind == "bump") {
        auto a = need(3);
        return smooth_bump(a[0], a[1], static_cast<int>(a[2]));
    }
    if (kind == "polycap") {
        auto a = need(5);
        return poly_capped(static_cast<int>(a[0]), a[1], a[2], a[3], static_cast<int>(a[4]));
    }
    if (kind == "arctan") return arctan();
    if (kind == "monomial") return monomial(static_cast<int>(need(1)[0]));
    if (kind == "constant") return constant(need(1)[0]);
    if (kind == "indicator") {
        auto a = need(2);
        return indicator(a[0], a[1]);
    }
    throw ConfigError("unknown test function '" + spec + "'");
}

std::string to_string(HsClass cls) {
    switch (cls) {
        case HsClass::InHs: return "in_Hs";
        case HsClass::NotInHs: return "not_in_Hs";
        case HsClass::Unknown: return "unknown";
    }
    return "unknown";
}

Classification classify(const TestFunction& phi, double s) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (phi.kind() == TestKind::Resolvent || phi.kind() == TestKind::RealResolventPair) {
        // The transform is 2 pi e^{-|t| |Im z|} on a half line (both half lines
        // for the real pair), so the norm is a one-dimensional integral.
        const double y = std::abs(phi.pole().imag());
        auto integrand = [&](double t) {
            return std::pow(1.0 + 2.0 * t, 2.0 * s) * 4.0 * std::numbers::pi * std::numbers::pi * std::exp(-2.0 * y * t);
        };
        double err = 0.0;
        double half = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
            integrand, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-12, &err);
        if (phi.kind() == TestKind::RealResolventPair) half *= 2.0;
        return {HsClass::InHs, std::sqrt(half), std::sqrt(err)};
    }
    const auto support = phi.support();
    if (!support) return {HsClass::Unknown, inf, inf};

    // Sample the support with a margin; refine until the full and decimated
    // grids agree. Very fine grids are avoided because rounding noise in the
    // transform is amplified by the (1+2|t|)^{2s} weight.
    const double lo = support->first, hi = support->second;
    const double margin = 0.5 * (hi - lo);
    double best_err = inf, best_norm = inf;
    for (std::size_t n : {128u, 256u, 512u, 1024u}) {
        const double h = (hi - lo + 2.0 * margin) / static_cast<double>(n);
        std::vector<double> y(n);
        for (std::size_t j = 0; j < n; ++j) y[j] = phi.real(lo - margin + static_cast<double>(j) * h);
        const HsNorm r = hs_norm(y, h, s);
        if (r.error < best_err) {
            best_err = r.error;
            best_norm = r.value;
        }
    }
    const bool converged = best_err <= kHsDivergenceThreshold * best_norm;
    // Structural claim: a C^k function of this construction is in H_s for s <= k.
    const int k = phi.smoothness();
    const bool claimed = k != TestFunction::kDiscontinuous && static_cast<double>(k) >= s;
    if (converged) return {claimed || k == TestFunction::kSmooth ? HsClass::InHs : HsClass::Unknown, best_norm, best_err};
    if (claimed) return {HsClass::Unknown, inf, best_err};
    return {HsClass::NotInHs, inf, best_err};
}

}  // namespace dwlab
