#include "dwlab/theory.hpp"

#include "dwlab/errors.hpp"
#include "dwlab/extrapolate.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <fftw3.h>

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>

namespace dwlab {

namespace {

// Eight-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::array<double, 8> x{};
    std::array<double, 8> w{};
    GaussRule() {
        using rule = boost::math::quadrature::gauss<double, 8>;
        const auto& a = rule::abscissa();
        const auto& wt = rule::weights();
        for (std::size_t i = 0; i < 4; ++i) {
            x[i] = -a[3 - i];
            w[i] = wt[3 - i];
            x[7 - i] = a[3 - i];
            w[7 - i] = wt[3 - i];
        }
    }
};

const GaussRule& gauss_rule() {
    static const GaussRule rule;
    return rule;
}

void require_offaxis(cplx z) {
    if (z.imag() == 0.0) throw DomainError("spectral parameter must satisfy Im z != 0");
}

cplx bracket(const FluctuationParams& p, const SubordinationSolution& s) {
    const cplx denom = p.tau + (p.sigma2 - p.tau) * s.omega1;
    if (std::abs(denom) < 1e-10) throw SingularityError("|tau + (sigma2 - tau) omega'| below 1e-10");
    return (p.s2 - p.sigma2) + p.tau * p.tau * (s.omega1 - 1.0) / denom - p.kappa * s.G1 / s.omega1;
}

// FFTW planning is not thread safe.
std::mutex& fftw_mutex() {
    static std::mutex m;
    return m;
}

double weighted_transform_sum(std::span<const double> y, double h, double s, std::size_t pad) {
    const std::size_t n = y.size();
    const std::size_t len = n * pad;
    double* in = fftw_alloc_real(len);
    fftw_complex* out = fftw_alloc_complex(len / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(len), in, out, FFTW_ESTIMATE);
    }
    std::fill(in, in + len, 0.0);
    std::copy(y.begin(), y.end(), in);
    fftw_execute(plan);

    const double dt = 2.0 * std::numbers::pi / (static_cast<double>(len) * h);
    double acc = 0.0;
    for (std::size_t k = 0; k <= len / 2; ++k) {
        const double t = dt * static_cast<double>(k);
        const double mag2 = h * h * (out[k][0] * out[k][0] + out[k][1] * out[k][1]);
        // Negative frequencies mirror the positive ones for real input.
        const double mult = (k == 0 || 2 * k == len) ? 1.0 : 2.0;
        acc += mult * std::pow(1.0 + 2.0 * t, 2.0 * s) * mag2;
    }
    {
        std::lock_guard<std::mutex> lock(fftw_mutex());
        fftw_destroy_plan(plan);
    }
    fftw_free(in);
    fftw_free(out);
    return acc * dt;
}

}  // namespace

FluctuationParams FluctuationParams::limit(double sigma2, double s2, double tau, double kappa, AtomicMeasure nu) {
    FluctuationParams p{sigma2, s2, tau, kappa, std::move(nu), FluctuationMode::Limit, 0};
    p.validate();
    return p;
}

FluctuationParams FluctuationParams::finite_n(const EnsembleParams& e) {
    e.validate();
    const double n = static_cast<double>(e.n);
    FluctuationParams p{n * e.sigma_n2(), n * e.s_n2(), n * e.tau_n(), n * n * e.kappa_n(), e.nu(),
                        FluctuationMode::FiniteN, e.n};
    p.validate();
    return p;
}

void FluctuationParams::validate() const {
    if (!(sigma2 > 0.0)) throw ParameterError("sigma2 must be positive");
    if (!(s2 > 0.0)) throw ParameterError("s2 must be positive");
    if (!std::isfinite(tau) || !std::isfinite(kappa)) throw ParameterError("tau and kappa must be finite");
    if (mode == FluctuationMode::FiniteN && n == 0) throw ParameterError("finite-N mode needs N");
}

SubordinationSolution subordination(const FluctuationParams& p, cplx z) {
    return solve_pastur(p.nu, p.sigma2, z);
}

cplx beta_at(const FluctuationParams& p, const SubordinationSolution& s) {
    return s.G2 / (2.0 * s.omega1 * s.omega1) * bracket(p, s);
}

cplx beta(const FluctuationParams& p, cplx z) {
    require_offaxis(z);
    return beta_at(p, subordination(p, z));
}

cplx beta_tilde(const FluctuationParams& p, cplx z) {
    require_offaxis(z);
    const auto s = subordination(p, z);
    return s.G2 / (2.0 * s.omega1 * s.omega1 * s.omega1) * bracket(p, s);
}

KernelValue gamma_kernel_at(const FluctuationParams& p, const SubordinationSolution& s1,
                         const SubordinationSolution& s2) {
    const cplx w1 = s1.omega, w2 = s2.omega;
    const cplx I = p.nu.mixed_moment(w1, w2, 1, 1);
    const cplx d1 = -s1.omega1 * p.nu.mixed_moment(w1, w2, 2, 1);
    const cplx d2 = -s2.omega1 * p.nu.mixed_moment(w1, w2, 1, 2);
    const cplx d12 = s1.omega1 * s2.omega1 * p.nu.mixed_moment(w1, w2, 2, 2);

    const cplx a = 1.0 - p.sigma2 * I;
    const cplx b = 1.0 - p.tau * I;
    cplx g = (p.s2 - p.sigma2 - p.tau) * d12 + p.kappa * (d1 * d2 + I * d12) + p.sigma2 * d12 / a +
             p.sigma2 * p.sigma2 * d1 * d2 / (a * a);
    if (p.tau != 0.0) g += p.tau * d12 / b + p.tau * p.tau * d1 * d2 / (b * b);

    KernelValue k;
    k.z1 = s1.z;
    k.z2 = s2.z;
    k.I = I;
    k.Gamma = g;
    k.branch_margin = std::min(std::abs(a), std::abs(b));
    k.valid = k.branch_margin > kBranchMarginFloor && std::isfinite(g.real()) && std::isfinite(g.imag());
    return k;
}

KernelValue gamma_kernel(const FluctuationParams& p, cplx z1, cplx z2) {
    require_offaxis(z1);
    require_offaxis(z2);
    return gamma_kernel_at(p, subordination(p, z1), subordination(p, z2));
}

cplx gamma_value(const FluctuationParams& p, cplx z1, cplx z2) {
    const KernelValue k = gamma_kernel(p, z1, z2);
    if (!k.valid) throw SingularityError("covariance kernel branch margin below 1e-6");
    return k.Gamma;
}

cplx gamma_primitive(const FluctuationParams& p, cplx z1, cplx z2) {
    require_offaxis(z1);
    require_offaxis(z2);
    PasturOptions opts;
    opts.derivatives = false;
    const auto s1 = solve_pastur(p.nu, p.sigma2, z1, opts);
    const auto s2 = solve_pastur(p.nu, p.sigma2, z2, opts);
    const cplx I = p.nu.mixed_moment(s1.omega, s2.omega, 1, 1);
    cplx g = (p.s2 - p.sigma2 - p.tau) * I + 0.5 * p.kappa * I * I - std::log(1.0 - p.sigma2 * I);
    if (p.tau != 0.0) g -= std::log(1.0 - p.tau * I);
    return g;
}

cplx bao_xie_b0(double sigma2, double s2, double tau, double kappa, cplx z) {
    const cplx G = semicircle_stieltjes(sigma2, z);
    const cplx G2 = G * G;
    const cplx d = 1.0 - sigma2 * G2;
    const cplx e = 1.0 - tau * G2;
    if (std::abs(d) < 1e-10 || std::abs(e) < 1e-10) throw SingularityError("Bao-Xie b0 denominator below 1e-10");
    const cplx Gp = -G2 / d;
    return -Gp * G * ((s2 - sigma2) + tau * tau * G2 / e + kappa * G2);
}

cplx bao_xie_C0(double sigma2, double s2, double tau, double kappa, cplx z1, cplx z2) {
    const cplx g1 = semicircle_stieltjes(sigma2, z1);
    const cplx g2 = semicircle_stieltjes(sigma2, z2);
    const cplx d1 = 1.0 - sigma2 * g1 * g1;
    const cplx d2 = 1.0 - sigma2 * g2 * g2;
    const cplx a = 1.0 - sigma2 * g1 * g2;
    const cplx b = 1.0 - tau * g1 * g2;
    if (std::abs(a) < 1e-10 || std::abs(b) < 1e-10 || std::abs(d1) < 1e-10 || std::abs(d2) < 1e-10)
        throw SingularityError("Bao-Xie C0 denominator below 1e-10");
    const cplx gp1 = -g1 * g1 / d1;
    const cplx gp2 = -g2 * g2 / d2;
    return gp1 * gp2 * ((s2 - sigma2 - tau) + 2.0 * kappa * g1 * g2 + sigma2 / (a * a) + tau / (b * b));
}

double well_defined_margin(const FluctuationParams& p, cplx z) {
    require_offaxis(z);
    PasturOptions opts;
    opts.derivatives = false;
    const auto s = solve_pastur(p.nu, p.sigma2, z, opts);
    return std::abs(p.sigma2 * p.nu.mixed_moment(s.omega, std::conj(s.omega), 1, 1));
}

double bias_bound(const FluctuationParams& p, cplx z) {
    if (p.mode != FluctuationMode::FiniteN) throw ParameterError("bias_bound needs finite-N parameters");
    require_offaxis(z);
    const double n = static_cast<double>(p.n);
    const double y = 1.0 / std::abs(z.imag());
    // N^2 m_N = kappa + 2 sigma^4 + tau^2 and N(3N+1) sigma_N^4 = (3N+1) sigma^4 / N.
    const double s4 = p.sigma2 * p.sigma2;
    const double p_tilde = (p.sigma2 + p.s2) * y + (p.kappa + 2.0 * s4 + p.tau * p.tau + (3.0 * n + 1.0) * s4 / n) * y * y * y;
    // Both branches of the case split in the proof.
    const double factor = std::max(1.0 + 2.0 * p.sigma2 * y * y, 4.0 * p.sigma2 * y * y);
    // N^-1 sum_k |R~_kk|^2 with E Tr R_N replaced by N G_rho_N, i.e. int nu_N |omega - x|^-2.
    PasturOptions opts;
    opts.derivatives = false;
    const auto s = solve_pastur(p.nu, p.sigma2, z, opts);
    double diag = 0.0;
    for (const auto& a : p.nu.atoms()) diag += a.weight / std::norm(s.omega - a.location);
    return factor * p_tilde * diag;
}

std::vector<double> default_y_schedule() {
    std::vector<double> ys;
    for (int j = 0; j <= 6; ++j) ys.push_back(0.064 * std::ldexp(1.0, -j));
    return ys;
}

ExtrapolatedValue extend_bias(const FluctuationParams& p, const TestFunction& phi, std::span<const double> ys) {
    if (!phi.is_real()) throw ParameterError("extend_bias needs a real test function");
    if (ys.size() < 3) throw ParameterError("y schedule needs at least three levels");
    for (std::size_t j = 1; j < ys.size(); ++j)
        if (!(ys[j] < ys[j - 1]) || !(ys[j] > 0.0)) throw ParameterError("y schedule must be positive and decreasing");
    if (ys.back() > 1e-3 * (1.0 + 1e-9)) throw ParameterError("y schedule must reach 1e-3");

    const Window win = support_window(p.nu, p.sigma2);
    const auto support = phi.support();
    // Functions without compact support must decay; their tails are cut at 1e4.
    const double a = support ? support->first : -1e4;
    const double b = support ? support->second : 1e4;
    const double h = ys.back();

    // Panels of width y_min where Im beta can be spiky, geometric grading outside.
    std::vector<std::pair<double, double>> panels;
    const double c = std::max(a, win.lo - 0.5), d = std::min(b, win.hi + 0.5);
    auto grade = [&](double from, double to, double dir) {
        double x = from, w = h;
        while ((to - x) * dir > 0.0) {
            const double next = (to - (x + dir * w)) * dir > 0.0 ? x + dir * w : to;
            panels.emplace_back(std::min(x, next), std::max(x, next));
            x = next;
            w *= 1.15;
        }
    };
    if (c < d) {
        const auto count = static_cast<std::size_t>(std::ceil((d - c) / h));
        const double w = (d - c) / static_cast<double>(count);
        for (std::size_t k = 0; k < count; ++k) panels.emplace_back(c + w * k, c + w * (k + 1));
        grade(c, a, -1.0);
        grade(d, b, 1.0);
    } else {
        // Support away from the spectrum: the integrand is smooth.
        const std::size_t count = 400;
        const double w = (b - a) / static_cast<double>(count);
        for (std::size_t k = 0; k < count; ++k) panels.emplace_back(a + w * k, a + w * (k + 1));
    }
    std::sort(panels.begin(), panels.end());

    const auto& rule = gauss_rule();
    std::vector<double> sums(ys.size(), 0.0);
    std::optional<cplx> top_warm;
    for (const auto& [lo, hi] : panels) {
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (std::size_t q = 0; q < 8; ++q) {
            const double x = mid + half * rule.x[q];
            const double fx = phi.real(x);
            if (fx == 0.0) continue;
            const double wx = half * rule.w[q] * fx;
            PasturOptions opts;
            opts.warm_start = top_warm;
            for (std::size_t j = 0; j < ys.size(); ++j) {
                const auto sol = solve_pastur(p.nu, p.sigma2, cplx(x, ys[j]), opts);
                if (j == 0) top_warm = sol.G;
                opts.warm_start = sol.G;
                sums[j] += wx * beta_at(p, sol).imag();
            }
        }
    }
    for (double& s : sums) s *= -1.0 / std::numbers::pi;

    const Extrapolation e = extrapolate_to_zero(ys, sums);
    if (!(e.error <= 1e-2 * (1.0 + std::abs(e.value))))
        throw AccuracyError("bias extrapolation in y diverges");
    return {e.value, e.error};
}

cplx variance_on_span(const FluctuationParams& p, std::span<const cplx> poles, std::span<const cplx> coefficients) {
    if (poles.size() != coefficients.size()) throw ParameterError("poles and coefficients differ in length");
    std::vector<SubordinationSolution> sols;
    sols.reserve(poles.size());
    for (cplx z : poles) {
        require_offaxis(z);
        sols.push_back(subordination(p, z));
    }
    cplx v = 0.0;
    for (std::size_t i = 0; i < poles.size(); ++i)
        for (std::size_t j = 0; j < poles.size(); ++j) {
            const KernelValue k = gamma_kernel_at(p, sols[i], sols[j]);
            if (!k.valid) throw SingularityError("covariance kernel branch margin below 1e-6");
            v += coefficients[i] * coefficients[j] * k.Gamma;
        }
    return v;
}

VarianceExtension extend_variance(const FluctuationParams& p, const TestFunction& phi, const PoleFitSpec& spec) {
    if (!phi.is_real()) throw ParameterError("extend_variance needs a real test function");
    if (spec.poles < 2 || spec.samples < 2 * spec.poles) throw ParameterError("pole fit needs samples >= 2 x poles");
    if (phi.kind() == TestKind::RealResolventPair) {
        // Already in the span: phi_z + phi_{conj z}.
        VarianceExtension out;
        out.poles = {phi.pole(), std::conj(phi.pole())};
        out.coefficients = {1.0, 1.0};
        const cplx v = variance_on_span(p, out.poles, out.coefficients);
        out.value = v.real();
        out.imag_residual = std::abs(v.imag());
        out.fit_residual = 0.0;
        return out;
    }
    const Window win = support_window(p.nu, p.sigma2);
    const double width = win.hi - win.lo;
    const double plo = win.lo - spec.margin * width, phi_hi = win.hi + spec.margin * width;
    const double spacing = (phi_hi - plo) / static_cast<double>(spec.poles - 1);
    const double eta = spec.eta > 0.0 ? spec.eta : 1.5 * spacing;

    std::vector<cplx> poles(spec.poles);
    for (std::size_t j = 0; j < spec.poles; ++j) poles[j] = cplx(plo + spacing * static_cast<double>(j), eta);

    auto basis = [&](const std::vector<double>& xs) {
        Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(2 * spec.poles));
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = 0; j < spec.poles; ++j) {
                const cplx k = 1.0 / (poles[j] - xs[i]);
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * j)) = k.real();
                m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(2 * j + 1)) = k.imag();
            }
        return m;
    };
    auto grid = [&](std::size_t n, double shift) {
        std::vector<double> xs(n);
        for (std::size_t i = 0; i < n; ++i) xs[i] = win.lo + width * (static_cast<double>(i) + shift) / static_cast<double>(n - 1);
        return xs;
    };

    const auto xs = grid(spec.samples, 0.0);
    Eigen::VectorXd rhs(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) rhs(static_cast<Eigen::Index>(i)) = phi.real(xs[i]);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(basis(xs), Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd.setThreshold(spec.rcond);
    const Eigen::VectorXd coef = svd.solve(rhs);

    // Check on a staggered grid of twice the density.
    auto check = grid(2 * spec.samples, 0.25);
    check.erase(std::remove_if(check.begin(), check.end(), [&](double x) { return x > win.hi; }), check.end());
    const Eigen::VectorXd fit = basis(check) * coef;
    double residual = 0.0;
    for (std::size_t i = 0; i < check.size(); ++i)
        residual = std::max(residual, std::abs(fit(static_cast<Eigen::Index>(i)) - phi.real(check[i])));
    if (residual > spec.max_residual)
        throw AccuracyError("pole fit residual " + std::to_string(residual) + " exceeds threshold");

    // Re k = (k + conj k)/2 and Im k = (k - conj k)/(2i) with conj k the kernel at conj z.
    VarianceExtension out;
    for (std::size_t j = 0; j < spec.poles; ++j) {
        const cplx c = 0.5 * cplx(coef(static_cast<Eigen::Index>(2 * j)), -coef(static_cast<Eigen::Index>(2 * j + 1)));
        out.poles.push_back(poles[j]);
        out.coefficients.push_back(c);
        out.poles.push_back(std::conj(poles[j]));
        out.coefficients.push_back(std::conj(c));
    }
    const cplx v = variance_on_span(p, out.poles, out.coefficients);
    out.value = v.real();
    out.imag_residual = std::abs(v.imag());
    out.fit_residual = residual;
    return out;
}

HsNorm hs_norm(std::span<const double> samples, double h, double s, std::size_t pad) {
    if (samples.size() < 8) throw ParameterError("hs_norm needs at least 8 samples");
    if (!(h > 0.0) || !(s >= 0.0) || pad < 1) throw ParameterError("hs_norm needs h > 0, s >= 0, pad >= 1");
    const double full = std::sqrt(weighted_transform_sum(samples, h, s, pad));
    std::vector<double> half;
    half.reserve(samples.size() / 2 + 1);
    for (std::size_t i = 0; i < samples.size(); i += 2) half.push_back(samples[i]);
    const double coarse = std::sqrt(weighted_transform_sum(half, 2.0 * h, s, pad));
    const double err = std::abs(full - coarse);
    return {full, err, !(err <= kHsDivergenceThreshold * full)};
}

void write_kernel_csv(std::ostream& out, const std::vector<KernelValue>& rows, const std::vector<std::string>& metadata) {
    for (const auto& line : metadata) out << "# " << line << '\n';
    out << "re_z1,im_z1,re_z2,im_z2,re_gamma,im_gamma,branch_margin\n" << std::setprecision(17);
    for (const auto& k : rows)
        out << k.z1.real() << ',' << k.z1.imag() << ',' << k.z2.real() << ',' << k.z2.imag() << ',' << k.Gamma.real()
            << ',' << k.Gamma.imag() << ',' << k.branch_margin << '\n';
}

}  // namespace dwlab
