#include "dwlab/measure.hpp"

#include "dwlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace dwlab {

AtomicMeasure::AtomicMeasure(std::vector<Atom> atoms) {
    if (atoms.empty()) throw ParameterError("atomic measure needs at least one atom");
    std::map<double, double> merged;
    double total = 0.0;
    for (const auto& a : atoms) {
        if (!std::isfinite(a.location)) throw ParameterError("atom location must be finite");
        if (!(a.weight > 0.0) || !std::isfinite(a.weight))
            throw ParameterError("atom weight must be positive and finite");
        merged[a.location] += a.weight;
        total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw ParameterError("atom weights sum to " + std::to_string(total) + ", expected 1");
    atoms_.reserve(merged.size());
    for (const auto& [x, w] : merged) {
        atoms_.push_back({x, w});
        mean_ += w * x;
        second_moment_ += w * x * x;
    }
}

AtomicMeasure AtomicMeasure::empirical(std::span<const double> points) {
    if (points.empty()) throw ParameterError("empirical measure of an empty point set");
    std::vector<double> sorted(points.begin(), points.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
        atoms.push_back({sorted[i], static_cast<double>(j - i) / n});
        i = j;
    }
    return AtomicMeasure(std::move(atoms));
}

AtomicMeasure AtomicMeasure::dirac(double location) {
    return AtomicMeasure({{location, 1.0}});
}

cplx AtomicMeasure::stieltjes(cplx w, int order) const {
    if (order < 0 || order > 3) throw DomainError("stieltjes derivative order must be in 0..3");
    static constexpr double kFactorial[] = {1.0, 1.0, 2.0, 6.0};
    cplx sum = 0.0;
    for (const auto& a : atoms_) {
        const cplx d = w - a.location;
        if (d == cplx(0.0)) throw DomainError("stieltjes transform evaluated at an atom");
        const cplx inv = 1.0 / d;
        cplx term = inv;
        for (int k = 0; k < order; ++k) term *= inv;
        sum += a.weight * term;
    }
    return (order % 2 == 0 ? 1.0 : -1.0) * kFactorial[order] * sum;
}

cplx AtomicMeasure::mixed_moment(cplx a, cplx b, int p, int q) const {
    cplx sum = 0.0;
    for (const auto& atom : atoms_) {
        const cplx ia = 1.0 / (a - atom.location);
        const cplx ib = 1.0 / (b - atom.location);
        cplx term = atom.weight;
        for (int k = 0; k < p; ++k) term *= ia;
        for (int k = 0; k < q; ++k) term *= ib;
        sum += term;
    }
    return sum;
}

}  // namespace dwlab
