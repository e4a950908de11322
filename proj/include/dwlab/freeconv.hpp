#pragma once

#include "dwlab/measure.hpp"
#include "dwlab/testfn.hpp"

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace dwlab {

/// G_nu^(order)(w) for an atomic nu.
inline cplx stieltjes(const AtomicMeasure& nu, cplx w, int order = 0) { return nu.stieltjes(w, order); }

/// Solution of G = G_nu(z - v G) at one point, with the chain-rule derivatives.
struct SubordinationSolution {
    cplx z;
    double v = 0.0;
    cplx G;       // G_rho(z), rho = semicircle(v) boxplus nu
    cplx omega;   // z - v G
    cplx G1, G2;  // G_rho', G_rho''
    cplx omega1, omega2;
    int iterations = 0;
    double residual = 0.0;  // |G - G_nu(omega)|
};

struct PasturOptions {
    double damping = 0.5;
    double newton_switch = 1e-3;
    int max_iterations = 10000;
    /// Warm start in the upper half plane convention (Im z > 0).
    std::optional<cplx> warm_start;
    /// Fill the derivative fields; they fail near spectral edges.
    bool derivatives = true;
};

SubordinationSolution solve_pastur(const AtomicMeasure& nu, double v, cplx z, const PasturOptions& opts = {});

/// (z - sqrt(z^2 - 4v)) / (2v) on the branch with G ~ 1/z.
cplx semicircle_stieltjes(double v, cplx z);

/// H(w) = w + v G_nu(w) maps Omega onto C+; true when Im H(w) > 0.
bool is_in_omega(const AtomicMeasure& nu, double v, cplx w);

struct DensityValue {
    double value;
    double error;
    bool accuracy_warning;
};

/// eta_j = 1e-2 * 2^-j down to 1e-6.
std::vector<double> default_eta_schedule();

/// -(1/pi) lim Im G_rho(x + i eta) by Richardson extrapolation over the schedule.
DensityValue density(const AtomicMeasure& nu, double v, double x, std::span<const double> eta_schedule);
DensityValue density(const AtomicMeasure& nu, double v, double x);

struct Window {
    double lo;
    double hi;
};

/// Interval that contains the support of rho: atoms widened by 2.1 sqrt(v).
Window support_window(const AtomicMeasure& nu, double v);

struct QuadratureSpec {
    double abs_tolerance = 1e-6;  // scaled by 1 + sup|phi|
    unsigned max_depth = 12;
    std::size_t panels = 16;
};

struct IntegralResult {
    double value;
    double error;
};

IntegralResult integrate_against_rho(const AtomicMeasure& nu, double v, const TestFunction& phi,
                                     const QuadratureSpec& spec = {});

/// x, density, error_estimate rows after `#` metadata.
void write_density_csv(std::ostream& out, const AtomicMeasure& nu, double v, std::span<const double> xs,
                       const std::vector<std::string>& metadata = {});

}  // namespace dwlab
