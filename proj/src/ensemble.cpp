#include "dwlab/ensemble.hpp"

#include "dwlab/errors.hpp"
#include "dwlab/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace dwlab {

namespace {

constexpr double kMomentTol = 1e-12;

bool close_rel(double a, double b, double scale) {
    return std::abs(a - b) <= kMomentTol * std::max({std::abs(a), std::abs(b), scale});
}

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<SupportPoint> parse_support(const std::string& text) {
    std::vector<SupportPoint> out;
    for (const auto& item : split(text, ',')) {
        const auto colon = item.rfind(':');
        if (colon == std::string::npos) throw ConfigError("support point '" + item + "' must be value:weight");
        out.push_back({parse_complex(item.substr(0, colon)), std::stod(item.substr(colon + 1))});
    }
    return out;
}

std::string format_support(const std::vector<SupportPoint>& support) {
    std::string out;
    for (const auto& p : support) {
        if (!out.empty()) out += ", ";
        out += format_complex(p.value) + ":" + format_double(p.weight);
    }
    return out;
}

// E[X^2 1{|X| <= delta}] for X ~ N(0, v).
double truncated_gaussian_real_second(double v, double delta) {
    const double c = delta / std::sqrt(v);
    const double pdf = std::exp(-0.5 * c * c) / std::sqrt(2.0 * std::numbers::pi);
    return v * (std::erf(c / std::numbers::sqrt2) - 2.0 * c * pdf);
}

// E[|X|^2 1{|X| <= delta}] for circular complex X with E|X|^2 = v.
double truncated_gaussian_complex_second(double v, double delta) {
    const double t = delta * delta / v;
    return v * (1.0 - std::exp(-t) * (1.0 + t));
}

TruncatedMoments truncate_discrete(const std::vector<SupportPoint>& support, double scale, double delta) {
    TruncatedMoments m{0.0, 0.0, true};
    for (const auto& p : support) {
        const cplx x = p.value * scale;
        if (std::abs(x) <= delta) {
            m.mean += p.weight * x;
            m.second += p.weight * std::norm(x);
        } else {
            m.untouched = false;
        }
    }
    if (m.untouched) m.mean = 0.0;  // the law is centred
    return m;
}

TruncatedMoments truncate_sign(double scale, double delta) {
    if (scale <= delta) return {0.0, scale * scale, true};
    return {0.0, 0.0, false};
}

}  // namespace

EntryLaw EntryLaw::custom_discrete(std::vector<SupportPoint> offdiagonal, std::vector<SupportPoint> diagonal) {
    if (offdiagonal.empty()) throw ParameterError("custom law needs an off-diagonal support");
    auto check = [](const std::vector<SupportPoint>& support, bool must_be_real) {
        double total = 0.0;
        cplx mean = 0.0;
        for (const auto& p : support) {
            if (!(p.weight > 0.0)) throw ParameterError("custom law weights must be positive");
            if (must_be_real && p.value.imag() != 0.0) throw ParameterError("diagonal support must be real");
            total += p.weight;
            mean += p.weight * p.value;
        }
        if (std::abs(total - 1.0) > kMomentTol) throw ParameterError("custom law weights must sum to 1");
        if (std::abs(mean) > kMomentTol) throw ParameterError("custom law must be centred");
    };
    check(offdiagonal, false);
    if (!diagonal.empty()) check(diagonal, true);
    EntryLaw law(LawKind::CustomDiscrete);
    law.offdiag_ = std::move(offdiagonal);
    law.diag_ = std::move(diagonal);
    return law;
}

std::string EntryLaw::name() const {
    switch (kind_) {
        case LawKind::GaussianComplex: return "gaussian_complex";
        case LawKind::GaussianReal: return "gaussian_real";
        case LawKind::RademacherReal: return "rademacher_real";
        case LawKind::RademacherComplexFourPoint: return "rademacher_complex_four_point";
        case LawKind::CustomDiscrete: return "custom_discrete";
    }
    return "unknown";
}

EntryLaw EntryLaw::from_name(const std::string& name) {
    if (name == "gaussian_complex" || name == "gue") return gaussian_complex();
    if (name == "gaussian_real" || name == "goe") return gaussian_real();
    if (name == "rademacher_real") return rademacher_real();
    if (name == "rademacher_complex_four_point") return rademacher_complex_four_point();
    throw ParameterError("unknown entry law '" + name + "'");
}

bool EntryLaw::is_real() const noexcept {
    switch (kind_) {
        case LawKind::GaussianReal:
        case LawKind::RademacherReal: return true;
        case LawKind::CustomDiscrete:
            return std::all_of(offdiag_.begin(), offdiag_.end(), [](const auto& p) { return p.value.imag() == 0.0; });
        default: return false;
    }
}

double EntryLaw::default_s2(double sigma2) const {
    if (kind_ == LawKind::GaussianReal) return 2.0 * sigma2;
    if (kind_ == LawKind::CustomDiscrete && !diag_.empty()) {
        double s2 = 0.0;
        for (const auto& p : diag_) s2 += p.weight * std::norm(p.value);
        return s2;
    }
    return sigma2;
}

LimitMoments EntryLaw::moments(double sigma2, double s2) const {
    const double s4 = sigma2 * sigma2;
    switch (kind_) {
        case LawKind::GaussianComplex: return {sigma2, s2, 0.0, 0.0};
        case LawKind::GaussianReal: return {sigma2, s2, sigma2, 0.0};
        case LawKind::RademacherReal: return {sigma2, s2, sigma2, s4 - 2.0 * s4 - s4};
        case LawKind::RademacherComplexFourPoint: return {sigma2, s2, 0.0, s4 - 2.0 * s4};
        case LawKind::CustomDiscrete: {
            double var = 0.0, fourth = 0.0;
            cplx pseudo = 0.0;
            for (const auto& p : offdiag_) {
                var += p.weight * std::norm(p.value);
                pseudo += p.weight * p.value * p.value;
                fourth += p.weight * std::norm(p.value) * std::norm(p.value);
            }
            if (std::abs(pseudo.imag()) > kMomentTol * var)
                throw ParameterError("custom law has complex E[W^2]; real and imaginary parts must be uncorrelated");
            const double tau = pseudo.real();
            return {var, diag_.empty() ? s2 : default_s2(var), tau, fourth - 2.0 * var * var - tau * tau};
        }
    }
    throw ParameterError("unknown law kind");
}

double EnsembleParams::m_n() const {
    const double s = sigma_n2();
    return kappa_n() + 2.0 * s * s + tau_n() * tau_n();
}

EnsembleParams EnsembleParams::make(std::size_t n, EntryLaw law, double sigma2, std::optional<double> s2,
                                    std::vector<double> deformation) {
    EnsembleParams p;
    p.n = n;
    const double s2_value = s2.value_or(law.default_s2(sigma2));
    const LimitMoments m = law.moments(sigma2, s2_value);
    p.sigma2 = m.sigma2;
    p.s2 = m.s2;
    p.tau = m.tau;
    p.kappa = m.kappa;
    p.law = std::move(law);
    std::sort(deformation.begin(), deformation.end());
    p.deformation = std::move(deformation);
    p.validate();
    return p;
}

void EnsembleParams::validate() const {
    if (n == 0) throw ParameterError("dimension must be positive");
    if (!(sigma2 > 0.0)) throw ParameterError("sigma2 must be positive");
    if (!(s2 > 0.0)) throw ParameterError("s2 must be positive");
    if (!std::isfinite(tau) || !std::isfinite(kappa)) throw ParameterError("tau and kappa must be finite");
    if (deformation.size() != n)
        throw ParameterError("deformation has " + std::to_string(deformation.size()) + " atoms, expected " +
                             std::to_string(n));
    for (double d : deformation)
        if (!std::isfinite(d) || std::abs(d) > atom_bound) throw ParameterError("deformation atom out of bounds");
    if (!std::is_sorted(deformation.begin(), deformation.end()))
        throw ParameterError("deformation atoms must be sorted");
    if (m_n() < 0.0) throw ParameterError("fourth moment m_N = kappa_N + 2 sigma_N^4 + tau_N^2 is negative");

    const LimitMoments m = law.moments(sigma2, s2);
    const double s4 = sigma2 * sigma2;
    if (!close_rel(m.sigma2, sigma2, 0.0) || !close_rel(m.s2, s2, 0.0) || !close_rel(m.tau, tau, sigma2) ||
        !close_rel(m.kappa, kappa, s4))
        throw ParameterError("entry law moments do not match the ensemble parameters");
}

Config EnsembleParams::to_config() const {
    Config cfg;
    cfg.set("n", std::to_string(n));
    cfg.set("sigma2", format_double(sigma2));
    cfg.set("s2", format_double(s2));
    cfg.set("tau", format_double(tau));
    cfg.set("kappa", format_double(kappa));
    cfg.set("entry_law", law.name());
    if (law.kind() == LawKind::CustomDiscrete) {
        cfg.set("law.offdiagonal", format_support(law.offdiagonal_support()));
        if (!law.diagonal_support().empty()) cfg.set("law.diagonal", format_support(law.diagonal_support()));
    }
    std::string atoms;
    for (double d : deformation) {
        if (!atoms.empty()) atoms += ", ";
        atoms += format_double(d);
    }
    cfg.set("deformation.atoms", atoms);
    return cfg;
}

EnsembleParams EnsembleParams::from_config(const Config& cfg) {
    const auto n = static_cast<std::size_t>(cfg.get_int("n"));
    const std::string law_name = cfg.get_string("entry_law", "gaussian_complex");
    EntryLaw law = law_name == "custom_discrete" || law_name == "custom"
                       ? EntryLaw::custom_discrete(parse_support(cfg.get_string("law.offdiagonal")),
                                                   cfg.has("law.diagonal") ? parse_support(cfg.get_string("law.diagonal"))
                                                                           : std::vector<SupportPoint>{})
                       : EntryLaw::from_name(law_name);
    const double sigma2 = cfg.get_double("sigma2", law.moments(1.0, 1.0).sigma2);
    std::optional<double> s2;
    if (cfg.has("s2")) s2 = cfg.get_double("s2");

    std::vector<double> deformation;
    if (cfg.has("deformation.atoms")) {
        deformation = cfg.get_doubles("deformation.atoms");
    } else {
        deformation = deformation_from_spec(cfg.get_string("deformation.quantile_spec", "zero"), n);
    }
    EnsembleParams p = make(n, std::move(law), sigma2, s2, std::move(deformation));
    // Explicit tau / kappa are accepted only when they agree with the law.
    auto check = [&](const char* key, double derived, double scale) {
        if (cfg.has(key) && !close_rel(cfg.get_double(key), derived, scale))
            throw ParameterError(std::string("configured ") + key + " disagrees with the entry law");
    };
    check("tau", p.tau, p.sigma2);
    check("kappa", p.kappa, p.sigma2 * p.sigma2);
    if (cfg.has("atom_bound")) {
        p.atom_bound = cfg.get_double("atom_bound");
        p.validate();
    }
    return p;
}

std::vector<double> deformation_from_spec(const std::string& spec, std::size_t n) {
    const auto colon = spec.find(':');
    const std::string kind = trim(spec.substr(0, colon));
    std::vector<double> args;
    if (colon != std::string::npos)
        for (const auto& a : split(spec.substr(colon + 1), ',')) args.push_back(std::stod(a));
    std::vector<double> out(n, 0.0);
    if (kind == "zero") return out;
    if (kind == "constant" && args.size() == 1) {
        std::fill(out.begin(), out.end(), args[0]);
        return out;
    }
    if (kind == "two_point" && args.size() == 2) {
        for (std::size_t i = 0; i < n; ++i) out[i] = i < n / 2 ? args[0] : args[1];
        return out;
    }
    if (kind == "uniform" && args.size() == 2) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = args[0] + (args[1] - args[0]) * (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        return out;
    }
    throw ConfigError("unknown deformation quantile spec '" + spec + "'");
}

WignerSample sample(const EnsembleParams& params, std::uint64_t master_seed, std::uint64_t index) {
    params.validate();
    const std::size_t n = params.n;
    const double sigma_n = std::sqrt(params.sigma2) / std::sqrt(static_cast<double>(n));
    const double s_n = std::sqrt(params.s2) / std::sqrt(static_cast<double>(n));
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

    Philox4x32 rng(master_seed, index);
    std::normal_distribution<double> normal;
    const LawKind kind = params.law.kind();

    auto draw_discrete = [&](const std::vector<SupportPoint>& support) {
        const double u = rng.uniform();
        double acc = 0.0;
        for (const auto& p : support) {
            acc += p.weight;
            if (u < acc) return p.value;
        }
        return support.back().value;
    };

    auto offdiagonal = [&]() -> cplx {
        switch (kind) {
            case LawKind::GaussianComplex: {
                const double re = normal(rng);
                const double im = normal(rng);
                return cplx(re, im) * (sigma_n / std::numbers::sqrt2);
            }
            case LawKind::GaussianReal: return normal(rng) * sigma_n;
            case LawKind::RademacherReal: return (rng() >> 63) ? sigma_n : -sigma_n;
            case LawKind::RademacherComplexFourPoint: {
                switch (rng() >> 62) {
                    case 0: return {sigma_n, 0.0};
                    case 1: return {-sigma_n, 0.0};
                    case 2: return {0.0, sigma_n};
                    default: return {0.0, -sigma_n};
                }
            }
            case LawKind::CustomDiscrete: return draw_discrete(params.law.offdiagonal_support()) * inv_sqrt_n;
        }
        return 0.0;
    };

    auto diagonal = [&]() -> double {
        switch (kind) {
            case LawKind::GaussianComplex:
            case LawKind::GaussianReal: return normal(rng) * s_n;
            case LawKind::CustomDiscrete:
                if (!params.law.diagonal_support().empty())
                    return draw_discrete(params.law.diagonal_support()).real() * inv_sqrt_n;
                [[fallthrough]];
            default: return (rng() >> 63) ? s_n : -s_n;
        }
    };

    WignerSample out;
    out.matrix.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    out.real = params.law.is_real();
    out.seed_path = {master_seed, index};
    out.params_hash = params.digest();
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < j; ++i) {
            const cplx w = offdiagonal();
            out.matrix(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = w;
            out.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = std::conj(w);
        }
        out.matrix(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = diagonal() + params.deformation[j];
    }
    return out;
}

TruncatedMoments truncated_offdiagonal(const EnsembleParams& params, double delta) {
    const double v = params.sigma_n2();
    const double scale = std::sqrt(params.sigma2) / std::sqrt(static_cast<double>(params.n));
    switch (params.law.kind()) {
        case LawKind::GaussianComplex: return {0.0, truncated_gaussian_complex_second(v, delta), false};
        case LawKind::GaussianReal: return {0.0, truncated_gaussian_real_second(v, delta), false};
        case LawKind::RademacherReal:
        case LawKind::RademacherComplexFourPoint: return truncate_sign(scale, delta);
        case LawKind::CustomDiscrete:
            return truncate_discrete(params.law.offdiagonal_support(), 1.0 / std::sqrt(static_cast<double>(params.n)),
                                     delta);
    }
    return {};
}

TruncatedMoments truncated_diagonal(const EnsembleParams& params, double delta) {
    const double scale = std::sqrt(params.s2) / std::sqrt(static_cast<double>(params.n));
    switch (params.law.kind()) {
        case LawKind::GaussianComplex:
        case LawKind::GaussianReal: return {0.0, truncated_gaussian_real_second(params.s_n2(), delta), false};
        case LawKind::CustomDiscrete:
            if (!params.law.diagonal_support().empty())
                return truncate_discrete(params.law.diagonal_support(), 1.0 / std::sqrt(static_cast<double>(params.n)),
                                         delta);
            [[fallthrough]];
        default: return truncate_sign(scale, delta);
    }
}

WignerSample truncate_center_homogenize(const WignerSample& in, const EnsembleParams& params, double delta) {
    if (!(delta > 0.0)) throw ParameterError("truncation level must be positive");
    if (in.params_hash != params.digest()) throw ParameterError("sample was not drawn from these parameters");
    const TruncatedMoments off = truncated_offdiagonal(params, delta);
    const TruncatedMoments dia = truncated_diagonal(params, delta);
    if (!(off.variance() > 0.0) || !(dia.variance() > 0.0))
        throw DegenerateTruncationError("truncation level removes all the mass of the entry law");
    if (off.untouched && dia.untouched) return in;

    const double off_scale = std::sqrt(params.sigma_n2() / off.variance());
    const double dia_scale = std::sqrt(params.s_n2() / dia.variance());
    WignerSample out = in;
    const auto n = static_cast<Eigen::Index>(params.n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < j; ++i) {
            const cplx w = in.matrix(i, j);
            const cplx kept = std::abs(w) <= delta ? w : cplx(0.0);
            const cplx v = off.untouched ? w : off_scale * (kept - off.mean);
            out.matrix(i, j) = v;
            out.matrix(j, i) = std::conj(v);
        }
        if (!dia.untouched) {
            const double d = params.deformation[static_cast<std::size_t>(j)];
            const double w = in.matrix(j, j).real() - d;
            const double kept = std::abs(w) <= delta ? w : 0.0;
            out.matrix(j, j) = dia_scale * (kept - dia.mean.real()) + d;
        }
    }
    return out;
}

double choose_delta(std::size_t n) {
    if (n < 2) throw DomainError("choose_delta needs N >= 2");
    return 1.0 / std::log(static_cast<double>(n));
}

}  // namespace dwlab
