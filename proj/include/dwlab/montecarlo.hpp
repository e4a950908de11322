#pragma once

#include "dwlab/ensemble.hpp"
#include "dwlab/theory.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace dwlab {

struct ExperimentPlan {
    EnsembleParams params;
    std::size_t samples = 2;
    std::vector<cplx> z_grid;
    /// Index pairs into z_grid for the covariance table; empty means all i <= j.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::string> test_functions;  // registry specs
    std::uint64_t master_seed = 0;
    bool truncate = false;
    std::optional<double> delta;  // defaults to choose_delta(N)
    double im_floor = 0.1;

    void validate() const;
    /// Keys: samples, z_grid, pairs (`i:j` list), test_functions (`;` separated),
    /// seed, truncate, delta, im_floor; ensemble keys at the top level.
    static ExperimentPlan from_config(const Config& cfg);
    Config to_config() const;
};

struct ZEstimate {
    cplx z;
    cplx mean_trace;     // mean Tr R(z)
    cplx deterministic;  // N G_rho_N(z)
    cplx bias_hat;       // mean_trace - deterministic
    double bias_se;      // sqrt(var_hat / M)
    double var_hat;      // sample E|Tr R - mean|^2
    double var_se;       // jackknife
    cplx omega_tilde;    // z - sigma_N^2 mean Tr R
    cplx beta_theory;    // finite-N beta(z)
    cplx gamma_conj_theory;  // Gamma(z, conj z)
    double bias_bound;
    double variance_bound_crude;    // 4N/|Im z|^2
    double variance_bound_refined;  // 2|Im z|^-4 N (s_N^2 + 2 sigma_N^-2 m_N)
};

struct PairEstimate {
    std::size_t i = 0, j = 0;
    cplx z1, z2;
    cplx cov;        // E[(X1 - m1)(X2 - m2)]
    double cov_se;   // jackknife
    cplx cov_conj;   // E[(X1 - m1) conj(X2 - m2)]
    double cov_conj_se;
    cplx gamma_theory;       // Gamma(z1, z2)
    cplx gamma_conj_theory;  // Gamma(z1, conj z2)
};

struct StatisticSummary {
    std::string id;    // e.g. "TrR(2i).re" or a test function id
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0, skewness_se = 0.0;
    double excess_kurtosis = 0.0, kurtosis_se = 0.0;
    double ks_statistic = 0.0, ks_pvalue = 0.0;
    bool degenerate = false;
    bool distributional = false;  // M large enough for the KS test
};

struct EstimatorReport {
    std::string version;
    std::uint64_t master_seed = 0;
    std::size_t samples = 0;
    std::uint64_t params_hash = 0;
    std::string params_text;
    std::size_t n = 0;
    bool truncated = false;
    std::vector<ZEstimate> z;
    std::vector<PairEstimate> pairs;
    std::vector<std::string> test_functions;
    /// traces[k][m] = Tr R(z_k) of sample m; linear[f][m] = N_N(phi_f).
    std::vector<std::vector<cplx>> traces;
    std::vector<std::vector<double>> linear;
    std::vector<StatisticSummary> statistics;

    std::string to_json() const;
    static EstimatorReport from_json(const std::string& text);
    /// Per-z table: z, mean, bias_hat, beta_theory, SE, var_hat, gamma_theory, bound.
    void write_csv(std::ostream& out, const std::vector<std::string>& metadata = {}) const;
};

/// Processes M samples on `threads` workers (0 = hardware concurrency). The
/// report is bitwise identical for every thread count.
EstimatorReport run(const ExperimentPlan& plan, unsigned threads = 0);

struct CovarianceRow {
    std::size_t i, j;
    cplx z1, z2;
    cplx empirical;
    cplx theory;
    double se;
    double ratio;  // |empirical - theory| / se
    bool flagged;  // ratio > 3
};

/// Non-conjugated covariance against Gamma(z1, z2); `theory` aligned with report.pairs.
std::vector<CovarianceRow> covariance_check(const EstimatorReport& report, const std::vector<cplx>& theory);
/// Conjugated pairing E[(X1-m1) conj(X2-m2)] against Gamma(z1, conj z2).
std::vector<CovarianceRow> covariance_check_conjugated(const EstimatorReport& report);

/// Re and Im of each centered Tr R(z), and each test-function statistic.
std::vector<StatisticSummary> normality_check(const EstimatorReport& report);

struct VarianceBoundRow {
    cplx z;
    double var_hat;
    double var_se;
    double crude;
    double refined;
    bool pass;  // var_hat <= bound (1 + 5 rel SE) for both bounds
};

std::vector<VarianceBoundRow> variance_bound_check(const EstimatorReport& report, const EnsembleParams& params);

/// Refined bound 2|Im z|^-4 N (s_N^2 + 2 sigma_N^-2 m_N).
double variance_bound_refined(const EnsembleParams& params, cplx z);
double variance_bound_crude(const EnsembleParams& params, cplx z);

/// Summary statistics with jackknife standard errors and a KS test against
/// a normal law fitted by mean and variance.
StatisticSummary summarize(const std::string& id, const std::vector<double>& x);

/// Asymptotic Kolmogorov p-value with the finite-n correction.
double kolmogorov_pvalue(double d, std::size_t n);

/// Jackknife standard error of the complex sample covariance of x and y
/// (conjugating y when `conjugate` is set).
std::pair<cplx, double> covariance_with_se(const std::vector<cplx>& x, const std::vector<cplx>& y, bool conjugate);

}  // namespace dwlab
