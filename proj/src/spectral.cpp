#include "dwlab/spectral.hpp"

#include "dwlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace dwlab {

namespace {

void require_finite(const Eigen::MatrixXcd& m) {
    if (!m.allFinite()) throw InputError("matrix has non-finite entries");
}

void require_offaxis(cplx z) {
    if (z.imag() == 0.0) throw DomainError("spectral parameter must satisfy Im z != 0");
}

Eigen::MatrixXcd resolvent(const Eigen::MatrixXcd& m, cplx z) {
    Eigen::MatrixXcd a = -m;
    a.diagonal().array() += z;
    return a.partialPivLu().inverse();
}

}  // namespace

Spectrum eigenvalues(const Eigen::MatrixXcd& hermitian) {
    require_finite(hermitian);
    Eigen::VectorXd values;
    if (hermitian.imag().isZero(0.0)) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(hermitian.real(), Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw SolverError("eigensolver did not converge", 0.0);
        values = solver.eigenvalues();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(hermitian, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw SolverError("eigensolver did not converge", 0.0);
        values = solver.eigenvalues();
    }
    Spectrum spec;
    spec.eigenvalues.assign(values.data(), values.data() + values.size());
    std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end());
    return spec;
}

Spectrum eigenvalues(const WignerSample& sample) {
    require_finite(sample.matrix);
    Eigen::VectorXd values;
    if (sample.real) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sample.matrix.real(), Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw SolverError("eigensolver did not converge", 0.0);
        values = solver.eigenvalues();
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sample.matrix, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) throw SolverError("eigensolver did not converge", 0.0);
        values = solver.eigenvalues();
    }
    Spectrum spec;
    spec.eigenvalues.assign(values.data(), values.data() + values.size());
    std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end());
    spec.params_hash = sample.params_hash;
    spec.seed_path = sample.seed_path;
    return spec;
}

cplx trace_resolvent(const Spectrum& spec, cplx z) {
    require_offaxis(z);
    cplx acc = 0.0;
    for (double l : spec.eigenvalues) acc += 1.0 / (z - l);
    return acc;
}

LinearStatistic linear_statistic(const Spectrum& spec, const TestFunction& phi) {
    cplx acc = 0.0;
    for (double l : spec.eigenvalues) acc += phi(l);
    if (phi.is_real()) acc.imag(0.0);
    return {acc, phi.id(), false};
}

bool SchurReport::ok() const {
    return diagonal_residual <= tolerance && trace_residual <= tolerance && minor_trace_gap <= 1.0 / im_z + tolerance;
}

SchurReport verify_schur(const Eigen::MatrixXcd& x, std::size_t k, cplx z) {
    require_offaxis(z);
    require_finite(x);
    const Eigen::Index n = x.rows();
    const auto kk = static_cast<Eigen::Index>(k);
    if (x.cols() != n || kk >= n || n < 2) throw ParameterError("verify_schur needs a square matrix, N >= 2, k < N");

    Eigen::MatrixXcd a = -x;
    a.diagonal().array() += z;
    // Index map skipping k.
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < n; ++i)
        if (i != kk) keep.push_back(i);
    const Eigen::Index m = n - 1;
    Eigen::MatrixXcd b(m, m);
    Eigen::RowVectorXcd r(m);
    Eigen::VectorXcd c(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        r(i) = a(kk, keep[static_cast<std::size_t>(i)]);
        c(i) = a(keep[static_cast<std::size_t>(i)], kk);
        for (Eigen::Index j = 0; j < m; ++j) b(i, j) = a(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    }
    const Eigen::MatrixXcd a_inv = a.partialPivLu().inverse();
    const auto b_lu = b.partialPivLu();
    const Eigen::VectorXcd b_inv_c = b_lu.solve(c);
    const Eigen::VectorXcd b_inv2_c = b_lu.solve(b_inv_c);
    const Eigen::MatrixXcd b_inv = b_lu.inverse();

    const cplx schur = a(kk, kk) - (r * b_inv_c)(0);
    const cplx trace_gap = a_inv.trace() - b_inv.trace();

    SchurReport rep{};
    rep.diagonal_residual = std::abs(a_inv(kk, kk) - 1.0 / schur);
    rep.trace_residual = std::abs(trace_gap - (1.0 + (r * b_inv2_c)(0)) / schur);
    rep.minor_trace_gap = std::abs(trace_gap);
    rep.im_z = std::abs(z.imag());
    rep.tolerance = 1e-8 * static_cast<double>(n) / (rep.im_z * rep.im_z);
    return rep;
}

ResolventIdentityReport verify_resolvent_identity(const Eigen::MatrixXcd& m1, const Eigen::MatrixXcd& m2, cplx z1,
                                                  cplx z2) {
    require_offaxis(z1);
    require_offaxis(z2);
    if (m1.rows() != m2.rows() || m1.cols() != m2.cols() || m1.rows() != m1.cols())
        throw ParameterError("resolvent identity needs two square matrices of equal size");
    const Eigen::MatrixXcd r1 = resolvent(m1, z1);
    const Eigen::MatrixXcd r2 = resolvent(m2, z2);
    Eigen::MatrixXcd middle = m1 - m2;
    middle.diagonal().array() += z2 - z1;
    const Eigen::MatrixXcd lhs = r1 - r2;
    const Eigen::MatrixXcd rhs = r1 * middle * r2;
    const double residual = (lhs - rhs).cwiseAbs().maxCoeff();
    return {residual, 1e-9 / (std::abs(z1.imag()) * std::abs(z2.imag()))};
}

double resolvent_norm_ratio(const Spectrum& spec, cplx z) {
    require_offaxis(z);
    double worst = 0.0;
    for (double l : spec.eigenvalues) worst = std::max(worst, std::abs(z.imag()) / std::abs(z - l));
    return worst;
}

double im_identity_residual(const Spectrum& spec, cplx z) {
    require_offaxis(z);
    double rhs = 0.0;
    for (double l : spec.eigenvalues) rhs += 1.0 / std::norm(z - l);
    rhs *= -z.imag();
    const double lhs = trace_resolvent(spec, z).imag();
    return std::abs(lhs - rhs) / std::abs(rhs);
}

LipschitzReport lipschitz_check(const Spectrum& a, const Spectrum& b, const TestFunction& phi, double lipschitz) {
    if (a.size() != b.size()) throw ParameterError("spectra differ in size");
    double diff_sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff_sum += std::abs(a.eigenvalues[i] - b.eigenvalues[i]);
    const double difference = std::abs(linear_statistic(a, phi).value - linear_statistic(b, phi).value);
    return {difference, lipschitz * diff_sum};
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spec, const std::vector<std::string>& metadata) {
    for (const auto& line : metadata) out << "# " << line << '\n';
    out << "# params_hash=" << hex_digest(spec.params_hash) << " seed=" << spec.seed_path.master_seed
        << " index=" << spec.seed_path.index << '\n';
    out << "eigenvalue\n" << std::setprecision(17);
    for (double l : spec.eigenvalues) out << l << '\n';
}

}  // namespace dwlab
