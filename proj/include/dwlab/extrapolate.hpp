#pragma once

#include <span>

namespace dwlab {

struct Extrapolation {
    double value;
    double error;     // difference between the two best successive orders
    bool converging;  // the first correction shrank the successive differences
};

/// Polynomial (Neville) extrapolation of f(h) to h = 0 using the last
/// `window` points; the order with the smallest successive difference wins.
Extrapolation extrapolate_to_zero(std::span<const double> h, std::span<const double> f, std::size_t window = 6);

}  // namespace dwlab
