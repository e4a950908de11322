#include "dwlab/infinitesimal.hpp"

#include "dwlab/config.hpp"
#include "dwlab/ensemble.hpp"
#include "dwlab/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace dwlab {

namespace {

bool is_gaussian_letter(const std::string& tok, int& color) {
    if (tok.size() < 2 || tok[0] != 'w') return false;
    for (std::size_t i = 1; i < tok.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(tok[i]))) return false;
    color = std::stoi(tok.substr(1));
    return color >= 1;
}

void enumerate(std::vector<std::size_t>& partner, const std::vector<int>& colors, std::vector<Pairing>& out) {
    const std::size_t n = partner.size();
    std::size_t first = n;
    for (std::size_t t = 0; t < n; ++t)
        if (partner[t] == n) {
            first = t;
            break;
        }
    if (first == n) {
        out.push_back({partner});
        return;
    }
    for (std::size_t s = first + 1; s < n; ++s) {
        if (partner[s] != n || colors[s] != colors[first]) continue;
        partner[first] = s;
        partner[s] = first;
        enumerate(partner, colors, out);
        partner[first] = n;
        partner[s] = n;
    }
}

std::size_t matrix_dim(const GeneratorMap& generators, std::size_t fallback) {
    return generators.empty() ? fallback : static_cast<std::size_t>(generators.begin()->second.rows());
}

Eigen::MatrixXcd product(const std::vector<std::string>& names, const GeneratorMap& generators, std::size_t n_dim) {
    const auto n = static_cast<Eigen::Index>(n_dim);
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(n, n);
    for (const auto& name : names) {
        const auto it = generators.find(name);
        if (it == generators.end()) throw ParameterError("unknown generator '" + name + "'");
        if (it->second.rows() != n || it->second.cols() != n)
            throw ParameterError("generator '" + name + "' has the wrong dimension");
        acc = acc * it->second;
    }
    return acc;
}

}  // namespace

PairedWord PairedWord::parse(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> leading;
    PairedWord w;
    std::string tok;
    while (in >> tok) {
        int color = 0;
        if (is_gaussian_letter(tok, color)) {
            w.colors.push_back(color);
            w.separators.emplace_back();
        } else if (tok == "1" || tok == "I") {
            continue;
        } else if (w.colors.empty()) {
            leading.push_back(tok);
        } else {
            w.separators.back().push_back(tok);
        }
    }
    if (w.colors.empty()) throw ConfigError("word '" + text + "' has no Gaussian letter");
    // Cyclicity of the trace moves the leading generators behind the last letter.
    for (const auto& g : leading) w.separators.back().push_back(g);
    w.n = w.colors.size();
    return w;
}

std::string PairedWord::to_string() const {
    std::string out;
    for (std::size_t t = 0; t < n; ++t) {
        if (!out.empty()) out += ' ';
        out += "w" + std::to_string(colors[t]);
        for (const auto& g : separators[t]) out += ' ' + g;
    }
    return out;
}

int PairedWord::color_count() const {
    int k = 0;
    for (int c : colors) k = std::max(k, c);
    return k;
}

std::vector<Pairing> enumerate_pairings(std::size_t n, const std::vector<int>& colors) {
    if (colors.size() != n) throw ParameterError("colors must have length n");
    std::vector<Pairing> out;
    if (n == 0 || n % 2 == 1) return out;
    std::vector<std::size_t> partner(n, n);
    enumerate(partner, colors, out);
    return out;
}

std::vector<Pairing> enumerate_pairings(std::size_t n) { return enumerate_pairings(n, std::vector<int>(n, 1)); }

std::vector<std::vector<std::size_t>> cycle_structure(const Pairing& pi) {
    const std::size_t n = pi.partner.size();
    std::vector<bool> seen(n, false);
    std::vector<std::vector<std::size_t>> cycles;
    for (std::size_t start = 0; start < n; ++start) {
        if (seen[start]) continue;
        std::vector<std::size_t> cycle;
        for (std::size_t t = start; !seen[t]; t = pi.partner[(t + 1) % n]) {
            seen[t] = true;
            cycle.push_back(t);
        }
        cycles.push_back(std::move(cycle));
    }
    return cycles;
}

int genus_term(const Pairing& pi) {
    return static_cast<int>(pi.partner.size() / 2 + 1) - static_cast<int>(cycle_structure(pi).size());
}

bool is_noncrossing(const Pairing& pi) { return genus_term(pi) == 0; }

bool is_noncrossing_direct(const Pairing& pi) {
    const std::size_t n = pi.partner.size();
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t s2 = pi.partner[s];
        if (s2 < s) continue;
        for (std::size_t t = s + 1; t < s2; ++t)
            if (pi.partner[t] > s2) return false;
    }
    return true;
}

cplx xi_exact(const PairedWord& word, std::size_t n_dim, double sigma_n2, const GeneratorMap& generators) {
    std::vector<Eigen::MatrixXcd> sep;
    for (const auto& names : word.separators) sep.push_back(product(names, generators, n_dim));
    cplx total = 0.0;
    for (const auto& pi : enumerate_pairings(word.n, word.colors)) {
        cplx term = 1.0;
        for (const auto& cycle : cycle_structure(pi)) {
            Eigen::MatrixXcd acc = sep[cycle.front()];
            for (std::size_t k = 1; k < cycle.size(); ++k) acc = acc * sep[cycle[k]];
            term *= acc.trace();
        }
        total += term;
    }
    const double scale = std::pow(sigma_n2, 0.5 * static_cast<double>(word.n)) / static_cast<double>(n_dim);
    return scale * total;
}

MomentFunctional trace_functional(const GeneratorMap& generators) {
    const std::size_t n_dim = matrix_dim(generators, 1);
    return [generators, n_dim](const std::vector<std::string>& names) -> cplx {
        if (names.empty()) return 1.0;
        return product(names, generators, n_dim).trace() / static_cast<double>(n_dim);
    };
}

cplx free_moment(const PairedWord& word, double v, const MomentFunctional& phi) {
    cplx total = 0.0;
    for (const auto& pi : enumerate_pairings(word.n, word.colors)) {
        if (!is_noncrossing(pi)) continue;
        cplx term = 1.0;
        for (const auto& cycle : cycle_structure(pi)) {
            std::vector<std::string> names;
            for (std::size_t t : cycle) names.insert(names.end(), word.separators[t].begin(), word.separators[t].end());
            term *= phi(names);
        }
        total += term;
    }
    return std::pow(v, 0.5 * static_cast<double>(word.n)) * total;
}

cplx free_moment(const PairedWord& word, double v, const GeneratorMap& generators) {
    return free_moment(word, v, trace_functional(generators));
}

InfinitesimalReport infinitesimal_check(const PairedWord& word, const std::vector<std::size_t>& dims, double v,
                                        const GeneratorFactory& generators) {
    if (dims.size() < 3) throw ParameterError("infinitesimal check needs at least three dimensions");
    InfinitesimalReport rep;
    rep.word = word.to_string();
    bool zero = true;
    for (std::size_t n : dims) {
        const GeneratorMap gens = generators(n);
        const cplx xi = xi_exact(word, n, v / static_cast<double>(n), gens);
        const cplx fr = free_moment(word, v, gens);
        rep.results.push_back({n, xi, fr, xi - fr});
        if (std::abs(xi - fr) > 1e-12 * std::max(1.0, std::abs(xi))) zero = false;
    }
    rep.identically_zero = zero;
    // Least squares on the nonzero corrections.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int k = 0;
    for (const auto& r : rep.results) {
        if (std::abs(r.correction) == 0.0) continue;
        const double x = std::log(static_cast<double>(r.n_dim)), y = std::log(std::abs(r.correction));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++k;
    }
    rep.slope = k >= 2 ? (k * sxy - sx * sy) / (k * sxx - sx * sx) : 0.0;
    rep.pass = zero || (k >= 2 && rep.slope <= -1.9);
    return rep;
}

CrossCheck monte_carlo_cross_check(const PairedWord& word, std::size_t n_dim, double v, std::size_t samples,
                                   const GeneratorMap& generators, std::uint64_t seed) {
    if (samples < 2) throw ParameterError("cross check needs samples");
    const auto n = static_cast<Eigen::Index>(n_dim);
    const EnsembleParams params =
        EnsembleParams::make(n_dim, EntryLaw::gaussian_complex(), v, std::nullopt, std::vector<double>(n_dim, 0.0));
    std::vector<Eigen::MatrixXcd> sep;
    for (const auto& names : word.separators) sep.push_back(product(names, generators, n_dim));
    const auto colors = static_cast<std::uint64_t>(word.color_count());

    std::vector<cplx> values(samples);
    std::vector<Eigen::MatrixXcd> letters(static_cast<std::size_t>(colors));
    for (std::size_t m = 0; m < samples; ++m) {
        for (std::uint64_t c = 0; c < colors; ++c) letters[c] = sample(params, seed, m * colors + c).matrix;
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(n, n);
        for (std::size_t t = 0; t < word.n; ++t) acc = acc * letters[static_cast<std::size_t>(word.colors[t] - 1)] * sep[t];
        values[m] = acc.trace() / static_cast<double>(n_dim);
    }
    cplx mean = 0.0;
    for (cplx x : values) mean += x;
    mean /= static_cast<double>(samples);
    double ss = 0.0;
    for (cplx x : values) ss += std::norm(x - mean);
    const double se = std::sqrt(ss / static_cast<double>(samples - 1) / static_cast<double>(samples));

    CrossCheck cc;
    cc.mc_mean = mean;
    cc.mc_se = se;
    cc.exact = xi_exact(word, n_dim, v / static_cast<double>(n_dim), generators);
    cc.ratio = std::abs(mean - cc.exact) / se;
    cc.pass = cc.ratio <= 4.0;
    return cc;
}

Eigen::MatrixXcd generator_from_spec(const std::string& spec, std::size_t n_dim) {
    const auto n = static_cast<Eigen::Index>(n_dim);
    if (spec == "identity") return Eigen::MatrixXcd::Identity(n, n);
    if (spec == "alternating") {
        Eigen::VectorXcd d(n);
        for (Eigen::Index i = 0; i < n; ++i) d(i) = i % 2 == 0 ? 1.0 : -1.0;
        return d.asDiagonal();
    }
    if (spec.rfind("linspace:", 0) == 0) {
        const auto parts = split(spec.substr(9), ',');
        if (parts.size() != 2) throw ConfigError("linspace generator needs a,b");
        const double a = std::stod(parts[0]), b = std::stod(parts[1]);
        Eigen::VectorXcd d(n);
        for (Eigen::Index i = 0; i < n; ++i) d(i) = n == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
        return d.asDiagonal();
    }
    if (spec.rfind("file:", 0) == 0) {
        std::ifstream in(spec.substr(5));
        if (!in) throw ConfigError("cannot open generator file '" + spec.substr(5) + "'");
        Eigen::MatrixXcd m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                double x;
                if (!(in >> x)) throw ConfigError("generator file has fewer than N x N entries");
                m(i, j) = x;
            }
        if (!m.isApprox(m.adjoint(), 1e-12)) throw ConfigError("generator file matrix is not symmetric");
        return m;
    }
    throw ConfigError("unknown generator spec '" + spec + "'");
}

}  // namespace dwlab
