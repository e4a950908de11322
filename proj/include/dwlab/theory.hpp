#pragma once

#include "dwlab/ensemble.hpp"
#include "dwlab/freeconv.hpp"
#include "dwlab/testfn.hpp"

#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace dwlab {

enum class FluctuationMode { Limit, FiniteN };

/// Limit parameters of the fluctuation formulas.
///
/// In finite-N mode the values are N sigma_N^2, N s_N^2, N tau_N, N^2 kappa_N
/// and nu = nu_N, which with sigma_N^2 = sigma2/N coincide with the
/// ensemble's own fields.
struct FluctuationParams {
    double sigma2 = 1.0;
    double s2 = 1.0;
    double tau = 0.0;
    double kappa = 0.0;
    AtomicMeasure nu = AtomicMeasure::dirac(0.0);
    FluctuationMode mode = FluctuationMode::Limit;
    std::size_t n = 0;  // finite-N mode only

    static FluctuationParams limit(double sigma2, double s2, double tau, double kappa, AtomicMeasure nu);
    static FluctuationParams finite_n(const EnsembleParams& ensemble);
    void validate() const;
};

SubordinationSolution subordination(const FluctuationParams& p, cplx z);

/// Limiting bias of Tr R(z): G''/(2 w'^2) [s2 - sigma2 + tau^2 (w'-1)/(tau + (sigma2-tau) w') - kappa G'/w'].
cplx beta(const FluctuationParams& p, cplx z);
cplx beta_at(const FluctuationParams& p, const SubordinationSolution& sol);
/// Same bracket over 2 w'^3, so beta = w' beta_tilde.
cplx beta_tilde(const FluctuationParams& p, cplx z);

struct KernelValue {
    cplx z1, z2;
    cplx I;  // int nu(dx) / ((w(z1) - x)(w(z2) - x))
    cplx Gamma;
    double branch_margin;  // min(|1 - sigma2 I|, |1 - tau I|)
    bool valid;            // branch_margin > 1e-6
};

constexpr double kBranchMarginFloor = 1e-6;

/// Covariance kernel from the analytic partials of I; never throws on a
/// small branch margin, it flags the value instead.
KernelValue gamma_kernel(const FluctuationParams& p, cplx z1, cplx z2);
KernelValue gamma_kernel_at(const FluctuationParams& p, const SubordinationSolution& s1,
                         const SubordinationSolution& s2);
/// Gamma, throwing SingularityError when the value is flagged.
cplx gamma_value(const FluctuationParams& p, cplx z1, cplx z2);

/// (s2 - sigma2 - tau) I + kappa/2 I^2 - log(1 - sigma2 I) - log(1 - tau I).
cplx gamma_primitive(const FluctuationParams& p, cplx z1, cplx z2);

/// Undeformed closed forms built on the semicircle transform.
cplx bao_xie_b0(double sigma2, double s2, double tau, double kappa, cplx z);
cplx bao_xie_C0(double sigma2, double s2, double tau, double kappa, cplx z1, cplx z2);

/// |sigma2 I(z, conj z)|, below 1 where the kernel is well defined.
double well_defined_margin(const FluctuationParams& p, cplx z);

/// Explicit upper bound on |beta_N(z)| (finite-N mode only). The y-dependent factor is
/// max(1 + 2 sigma2 / y^2, 4 sigma2 / y^2), looser than the textbook constant.
double bias_bound(const FluctuationParams& p, cplx z);

struct ExtrapolatedValue {
    double value;
    double error;
};

/// y_j = 0.064 * 2^-j, j = 0..6.
std::vector<double> default_y_schedule();

/// b(phi) = lim_{y->0} -(1/pi) int phi(x) Im beta(x + iy) dx for real phi,
/// extrapolated in y.
ExtrapolatedValue extend_bias(const FluctuationParams& p, const TestFunction& phi,
                              std::span<const double> y_schedule);

/// sum_{a,b} c_a c_b Gamma(z_a, z_b) for phi = sum_a c_a phi_{z_a}.
cplx variance_on_span(const FluctuationParams& p, std::span<const cplx> poles, std::span<const cplx> coefficients);

struct PoleFitSpec {
    std::size_t poles = 48;
    double eta = 0.0;  // 0 selects 1.5 x pole spacing
    std::size_t samples = 600;
    double margin = 0.25;  // fraction of the window added on each side for poles
    double max_residual = 1e-3;
    double rcond = 1e-12;
};

struct VarianceExtension {
    double value;
    double imag_residual;  // |Im V|, zero up to rounding
    double fit_residual;   // sup |phi - fit| on the check grid
    std::vector<cplx> poles;
    std::vector<cplx> coefficients;
};

/// V[phi] via a least-squares fit of phi on resolvent kernels; throws
/// AccuracyError when the fit residual exceeds the threshold.
VarianceExtension extend_variance(const FluctuationParams& p, const TestFunction& phi, const PoleFitSpec& spec = {});

struct HsNorm {
    double value;
    double error;  // |full grid - decimated grid|
    bool divergent;
};

constexpr double kHsDivergenceThreshold = 1e-2;

/// (int (1+2|t|)^{2s} |f^(t)|^2 dt)^{1/2}, f^(t) = int f(x) e^{-itx} dx, from
/// samples on a uniform grid of spacing h with zero padding.
HsNorm hs_norm(std::span<const double> samples, double h, double s, std::size_t pad = 16);

/// Kernel table rows (Re z1, Im z1, Re z2, Im z2, Re Gamma, Im Gamma, branch_margin).
void write_kernel_csv(std::ostream& out, const std::vector<KernelValue>& rows,
                      const std::vector<std::string>& metadata = {});

}  // namespace dwlab
