#pragma once

#include "dwlab/config.hpp"
#include "dwlab/measure.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dwlab {

enum class LawKind {
    GaussianComplex,
    GaussianReal,
    RademacherReal,
    RademacherComplexFourPoint,
    CustomDiscrete,
};

/// Support point of a discrete law, expressed at the sqrt(N) scale:
/// the matrix entry equals value / sqrt(N).
struct SupportPoint {
    cplx value;
    double weight;
};

/// Limits of the rescaled entry moments: N sigma_N^2, N s_N^2, N tau_N, N^2 kappa_N.
struct LimitMoments {
    double sigma2;
    double s2;
    double tau;
    double kappa;
};

/// Distribution of the Wigner entries.
///
/// Named laws are parameterised by sigma2 (and s2 for the diagonal); the
/// custom law carries its own support, from which every moment follows.
class EntryLaw {
public:
    static EntryLaw gaussian_complex() { return EntryLaw(LawKind::GaussianComplex); }
    static EntryLaw gaussian_real() { return EntryLaw(LawKind::GaussianReal); }
    static EntryLaw rademacher_real() { return EntryLaw(LawKind::RademacherReal); }
    static EntryLaw rademacher_complex_four_point() { return EntryLaw(LawKind::RademacherComplexFourPoint); }
    /// `diagonal` may be empty, in which case the diagonal is +-s_N.
    static EntryLaw custom_discrete(std::vector<SupportPoint> offdiagonal, std::vector<SupportPoint> diagonal = {});

    LawKind kind() const noexcept { return kind_; }
    std::string name() const;
    static EntryLaw from_name(const std::string& name);

    /// True when every entry is real (real symmetric ensemble).
    bool is_real() const noexcept;

    /// Exact moments of the law given the configured variances.
    /// For the custom law the arguments are ignored where the support fixes them.
    LimitMoments moments(double sigma2, double s2) const;

    /// s2 used when the caller does not configure one.
    double default_s2(double sigma2) const;

    const std::vector<SupportPoint>& offdiagonal_support() const noexcept { return offdiag_; }
    const std::vector<SupportPoint>& diagonal_support() const noexcept { return diag_; }

private:
    explicit EntryLaw(LawKind kind) : kind_(kind) {}
    LawKind kind_;
    std::vector<SupportPoint> offdiag_;
    std::vector<SupportPoint> diag_;
};

/// Parameters of a deformed Wigner ensemble X = W + D.
///
/// Per-entry moments scale exactly as sigma_N^2 = sigma2/N, s_N^2 = s2/N,
/// tau_N = tau/N and kappa_N = kappa/N^2.
struct EnsembleParams {
    std::size_t n = 0;
    double sigma2 = 1.0;
    double s2 = 1.0;
    double tau = 0.0;
    double kappa = 0.0;
    EntryLaw law = EntryLaw::gaussian_complex();
    std::vector<double> deformation;  // sorted diagonal of D, size n
    double atom_bound = 1e6;

    /// Derives tau and kappa from the law, sorts the deformation, validates.
    static EnsembleParams make(std::size_t n, EntryLaw law, double sigma2, std::optional<double> s2,
                               std::vector<double> deformation);

    /// Throws ParameterError when an invariant fails.
    void validate() const;

    double sigma_n2() const { return sigma2 / static_cast<double>(n); }
    double s_n2() const { return s2 / static_cast<double>(n); }
    double tau_n() const { return tau / static_cast<double>(n); }
    double kappa_n() const { return kappa / (static_cast<double>(n) * static_cast<double>(n)); }
    /// E|W_ij|^4.
    double m_n() const;

    /// Spectral measure nu_N of the deformation.
    AtomicMeasure nu() const { return AtomicMeasure::empirical(deformation); }

    Config to_config() const;
    static EnsembleParams from_config(const Config& cfg);
    std::uint64_t digest() const { return to_config().digest(); }
};

/// Deformation diagonal from a quantile specification:
/// `zero`, `two_point:a,b`, `uniform:a,b`, `constant:a`.
std::vector<double> deformation_from_spec(const std::string& spec, std::size_t n);

struct SeedPath {
    std::uint64_t master_seed = 0;
    std::uint64_t index = 0;
};

struct WignerSample {
    Eigen::MatrixXcd matrix;
    bool real = false;
    SeedPath seed_path;
    std::uint64_t params_hash = 0;
};

/// W + D drawn from the (master_seed, index) stream; pure in its arguments.
WignerSample sample(const EnsembleParams& params, std::uint64_t master_seed, std::uint64_t index);

/// Truncated entry moments E[W 1{|W|<=delta}] and E[|W|^2 1{|W|<=delta}], per entry.
struct TruncatedMoments {
    cplx mean;
    double second;
    bool untouched;  // no mass removed by the truncation
    double variance() const { return second - std::norm(mean); }
};

TruncatedMoments truncated_offdiagonal(const EnsembleParams& params, double delta);
TruncatedMoments truncated_diagonal(const EnsembleParams& params, double delta);

/// Truncate entries at delta, recenter by the law's truncated mean and
/// rescale back to variance sigma_N^2 (off-diagonal) / s_N^2 (diagonal).
WignerSample truncate_center_homogenize(const WignerSample& sample, const EnsembleParams& params, double delta);

/// Default truncation level 1/log(N).
double choose_delta(std::size_t n);

}  // namespace dwlab
