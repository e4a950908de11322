#pragma once

#include "dwlab/measure.hpp"

#include <climits>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dwlab {

enum class TestKind {
    Resolvent,          // x -> (z - x)^-1
    RealResolventPair,  // x -> 2 Re (z - x)^-1
    SmoothBump,         // (1 - u^2)^(k+1) on |u| < 1
    PolyCapped,         // x^d times a C^k plateau
    GridSampled,        // piecewise linear through samples, 0 outside
    Arctan,
    Monomial,
    Constant,
    Indicator,
};

/// A test function on the real line with its regularity metadata.
///
/// Immutable after construction; copies share the evaluation closure.
class TestFunction {
public:
    static constexpr int kSmooth = INT_MAX;  // C^infinity
    static constexpr int kDiscontinuous = -1;

    static TestFunction resolvent(cplx z);
    static TestFunction real_resolvent_pair(cplx z);
    /// C^order bump of half-width `width`.
    static TestFunction smooth_bump(double center, double width, int order);
    /// x^degree on [lo, hi], ramping to zero over `ramp` on each side with a
    /// C^order smoothstep.
    static TestFunction poly_capped(int degree, double lo, double hi, double ramp, int order);
    static TestFunction grid_sampled(std::vector<double> x, std::vector<double> y);
    static TestFunction arctan();
    static TestFunction monomial(int degree);
    static TestFunction constant(double value);
    static TestFunction indicator(double lo, double hi);

    /// Registry lookup: `resolvent:re,im`, `pair:re,im`, `bump:c,w,k`,
    /// `polycap:d,lo,hi,ramp,k`, `arctan`, `monomial:d`, `constant:c`,
    /// `indicator:a,b`.
    static TestFunction from_spec(const std::string& spec);

    cplx operator()(double x) const { return eval_(x); }
    double real(double x) const { return eval_(x).real(); }

    const std::string& id() const noexcept { return id_; }
    TestKind kind() const noexcept { return kind_; }
    bool is_real() const noexcept { return kind_ != TestKind::Resolvent; }
    /// Number of continuous derivatives claimed by construction.
    int smoothness() const noexcept { return smoothness_; }
    /// Closed support interval when compactly supported.
    std::optional<std::pair<double, double>> support() const { return support_; }
    /// Pole of the resolvent kinds.
    cplx pole() const noexcept { return pole_; }

private:
    TestFunction(std::string id, TestKind kind, std::function<cplx(double)> eval, int smoothness)
        : id_(std::move(id)), kind_(kind), eval_(std::move(eval)), smoothness_(smoothness) {}

    std::string id_;
    TestKind kind_;
    std::function<cplx(double)> eval_;
    int smoothness_;
    std::optional<std::pair<double, double>> support_;
    cplx pole_ = 0.0;
};

/// Generalised smoothstep S_k on [0, 1]: 0 -> 1 with k vanishing derivatives
/// at both ends.
double smoothstep(int order, double t);

enum class HsClass { InHs, NotInHs, Unknown };

struct Classification {
    HsClass cls;
    double norm;   // +infinity when divergent
    double error;  // refinement estimate
};

/// Numerical H_s membership from the grid Fourier transform, cross-checked
/// against the claimed smoothness.
Classification classify(const TestFunction& phi, double s);

std::string to_string(HsClass cls);

}  // namespace dwlab
