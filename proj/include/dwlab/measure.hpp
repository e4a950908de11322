#pragma once

#include <complex>
#include <span>
#include <vector>

namespace dwlab {

using cplx = std::complex<double>;

struct Atom {
    double location;
    double weight;
};

/// Finite real atomic probability measure.
///
/// Atoms are kept sorted by location with coincident locations merged, so
/// the spectral measure of an N x N diagonal with few distinct values costs
/// only as many terms as it has distinct values.
class AtomicMeasure {
public:
    /// Weights must be positive and sum to 1 within 1e-12.
    explicit AtomicMeasure(std::vector<Atom> atoms);

    /// Uniform measure (1/n) sum delta_{x_i}; points may repeat.
    static AtomicMeasure empirical(std::span<const double> points);
    static AtomicMeasure dirac(double location = 0.0);

    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::size_t size() const noexcept { return atoms_.size(); }
    double min_location() const noexcept { return atoms_.front().location; }
    double max_location() const noexcept { return atoms_.back().location; }
    double mean() const noexcept { return mean_; }
    double second_moment() const noexcept { return second_moment_; }

    /// k-th derivative of the Stieltjes transform at w, k in 0..3:
    /// G^(k)(w) = (-1)^k k! sum_i w_i (w - d_i)^(-k-1).
    cplx stieltjes(cplx w, int order = 0) const;

    /// sum_i w_i (a - d_i)^(-p) (b - d_i)^(-q).
    cplx mixed_moment(cplx a, cplx b, int p, int q) const;

private:
    std::vector<Atom> atoms_;
    double mean_ = 0.0;
    double second_moment_ = 0.0;
};

}  // namespace dwlab
