#pragma once

#include "dwlab/ensemble.hpp"
#include "dwlab/testfn.hpp"

#include <Eigen/Dense>

#include <ostream>
#include <string>
#include <vector>

namespace dwlab {

struct Spectrum {
    std::vector<double> eigenvalues;  // ascending
    std::uint64_t params_hash = 0;
    SeedPath seed_path;

    std::size_t size() const noexcept { return eigenvalues.size(); }
};

/// Eigenvalues of the sample; real symmetric samples use the real solver.
Spectrum eigenvalues(const WignerSample& sample);
Spectrum eigenvalues(const Eigen::MatrixXcd& hermitian);

/// Un-normalised Tr (z - X)^-1 = sum_i (z - lambda_i)^-1.
cplx trace_resolvent(const Spectrum& spec, cplx z);

struct LinearStatistic {
    cplx value;
    std::string testfn_id;
    bool centered = false;
};

LinearStatistic linear_statistic(const Spectrum& spec, const TestFunction& phi);

/// Both sides of the two Schur complement formulas for A = zI - X with the
/// k-th row and column removed for B.
struct SchurReport {
    double diagonal_residual;  // (A^-1)_kk vs 1/(A_kk - r B^-1 c)
    double trace_residual;     // Tr A^-1 - Tr B^-1 vs (1 + r B^-2 c)/(A_kk - r B^-1 c)
    double minor_trace_gap;    // |Tr R - Tr R^(k)|, bounded by 1/|Im z|
    double tolerance;          // 1e-8 N / |Im z|^2
    double im_z;
    bool ok() const;
};

SchurReport verify_schur(const Eigen::MatrixXcd& x, std::size_t k, cplx z);

struct ResolventIdentityReport {
    double residual;   // max entry of R1(z1) - R2(z2) - R1((z2-z1)I + M1 - M2)R2
    double tolerance;  // 1e-9 / (|Im z1| |Im z2|)
    bool ok() const { return residual <= tolerance; }
};

ResolventIdentityReport verify_resolvent_identity(const Eigen::MatrixXcd& m1, const Eigen::MatrixXcd& m2, cplx z1,
                                                  cplx z2);

/// max_i |z - lambda_i|^-1 |Im z|; at most 1 since ||R(z)|| <= 1/|Im z|.
double resolvent_norm_ratio(const Spectrum& spec, cplx z);

/// Relative residual of Im Tr R(z) = -Im z sum_i |z - lambda_i|^-2.
double im_identity_residual(const Spectrum& spec, cplx z);

/// |Tr phi(M1) - Tr phi(M2)| and its Lipschitz bound lip * sum_i |lambda_i(M1) - lambda_i(M2)|.
struct LipschitzReport {
    double difference;
    double bound;
    bool ok() const { return difference <= bound * (1.0 + 1e-12) + 1e-12; }
};

LipschitzReport lipschitz_check(const Spectrum& a, const Spectrum& b, const TestFunction& phi, double lipschitz);

/// One eigenvalue per row, after `#` metadata lines.
void write_spectrum_csv(std::ostream& out, const Spectrum& spec, const std::vector<std::string>& metadata = {});

}  // namespace dwlab
