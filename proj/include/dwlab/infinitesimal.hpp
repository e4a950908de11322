#pragma once

#include "dwlab/measure.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace dwlab {

/// Monomial x^1 a^1 x^2 a^2 ... x^n a^n under the trace.
///
/// colors[t] says which independent GUE matrix x^t is; separators[t] is the
/// product of generator names standing between x^t and x^{t+1} (cyclically).
struct PairedWord {
    std::size_t n = 0;
    std::vector<int> colors;
    std::vector<std::vector<std::string>> separators;

    /// Whitespace separated tokens; `w<k>` is a Gaussian letter of color k,
    /// `1` or `I` the identity, anything else a generator name. Generators in
    /// front of the first Gaussian letter wrap around to the end.
    static PairedWord parse(const std::string& text);
    std::string to_string() const;
    int color_count() const;
};

/// Fixed-point free involution, partner[t] (0-based).
struct Pairing {
    std::vector<std::size_t> partner;
};

std::vector<Pairing> enumerate_pairings(std::size_t n, const std::vector<int>& colors);
std::vector<Pairing> enumerate_pairings(std::size_t n);

/// Cycles of t -> partner(gamma(t)), gamma(t) = t + 1 mod n. Each cycle is
/// listed from its smallest element.
std::vector<std::vector<std::size_t>> cycle_structure(const Pairing& pi);

/// n/2 + 1 - |pi gamma|.
int genus_term(const Pairing& pi);
bool is_noncrossing(const Pairing& pi);
/// Direct test: no s < t < s' < t' with {s, s'} and {t, t'} both blocks.
bool is_noncrossing_direct(const Pairing& pi);

using GeneratorMap = std::map<std::string, Eigen::MatrixXcd>;
/// Normalised-trace functional on generator words (limit mode).
using MomentFunctional = std::function<cplx(const std::vector<std::string>&)>;

/// E[N^-1 Tr(x^1 a^1 ... x^n a^n)] = N^-1 sigma_N^n sum_pi Tr_{pi gamma}(A^1, ..., A^n)
/// for GUE letters with E|x_ij|^2 = sigma_N^2.
cplx xi_exact(const PairedWord& word, std::size_t n_dim, double sigma_n2, const GeneratorMap& generators);

/// sum over non-crossing pairings of v^{n/2} prod_cycles phi(product), v = N sigma_N^2.
cplx free_moment(const PairedWord& word, double v, const MomentFunctional& phi);
/// phi = normalised trace of the supplied matrices.
cplx free_moment(const PairedWord& word, double v, const GeneratorMap& generators);

MomentFunctional trace_functional(const GeneratorMap& generators);

struct MomentResult {
    std::size_t n_dim;
    cplx xi;
    cplx free;
    cplx correction;  // xi - free
};

struct InfinitesimalReport {
    std::string word;
    std::vector<MomentResult> results;
    double slope;            // least-squares slope of log|correction| against log N
    bool identically_zero;   // |correction| below rounding at every N
    bool pass;               // identically zero or slope <= -1.9
};

using GeneratorFactory = std::function<GeneratorMap(std::size_t)>;

/// v = N sigma_N^2 is held fixed across N.
InfinitesimalReport infinitesimal_check(const PairedWord& word, const std::vector<std::size_t>& dims, double v,
                                        const GeneratorFactory& generators);

struct CrossCheck {
    cplx mc_mean;
    double mc_se;  // sqrt(E|X - mean|^2 / M)
    cplx exact;
    double ratio;  // |mc_mean - exact| / mc_se
    bool pass;     // ratio <= 4
};

/// Monte Carlo estimate of E[N^-1 Tr(word)] from independent GUE draws.
CrossCheck monte_carlo_cross_check(const PairedWord& word, std::size_t n_dim, double v, std::size_t samples,
                                   const GeneratorMap& generators, std::uint64_t seed);

/// `alternating` (diag(+1,-1,...)), `linspace:a,b`, `identity`, `file:path`.
Eigen::MatrixXcd generator_from_spec(const std::string& spec, std::size_t n_dim);

}  // namespace dwlab
