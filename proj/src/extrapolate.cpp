#include "dwlab/extrapolate.hpp"

#include "dwlab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace dwlab {

Extrapolation extrapolate_to_zero(std::span<const double> h, std::span<const double> f, std::size_t window) {
    if (h.size() != f.size() || h.size() < 2) throw ParameterError("extrapolation needs >= 2 matching points");
    const std::size_t m = std::min(window, h.size());
    const std::size_t off = h.size() - m;
    std::vector<double> p(f.begin() + static_cast<std::ptrdiff_t>(off), f.end());

    double best = f.back();
    double best_err = std::abs(f.back() - f[f.size() - 2]);
    double first = best_err, second = best_err;
    for (std::size_t k = 1; k < m; ++k) {
        // After this sweep p[i] interpolates points i-k..i (relative to off) at 0.
        for (std::size_t i = m - 1; i >= k; --i) {
            const double hi = h[off + i], hik = h[off + i - k];
            p[i] = (hik * p[i] - hi * p[i - 1]) / (hik - hi);
            if (i == k) break;
        }
        const double err = std::abs(p[m - 1] - p[m - 2]);
        if (k == 1) second = err;
        if (err < best_err) {
            best_err = err;
            best = p[m - 1];
        }
    }
    return {best, best_err, second <= first || best_err == 0.0};
}

}  // namespace dwlab
