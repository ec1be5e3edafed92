#pragma once

// Short-maturity ATM implied-vol level and skew limits: a generic quadrature
// evaluator over E[D_r sigma_u], model-specific closed forms, and the linear
// IV approximation pricer built from them.

#include <functional>

#include "vollab/bachelier.hpp"
#include "vollab/vol_models.hpp"

namespace vollab {

enum class SkewRegime { finite_limit, vanishing, blowup_scaled };

/// A skew limit after the T^{max(1/2-H,0)} scaling. For H >= 1/2 the scaled
/// and raw quantities coincide.
struct SkewLimit {
    OptionKind kind = OptionKind::european;
    double value = 0.0;
    double hurst = 0.5;
    SkewRegime regime = SkewRegime::finite_limit;
};

/// The model inputs the limit formulas consume: E[D_r sigma_u] factored as
/// smooth(r, u) * (u - r)^singular_exponent, plus the correlation seen by the
/// price driver (1 for local vol, whose driver is the price's own Brownian).
struct MalliavinKernel {
    std::function<double(double r, double u)> smooth;
    double singular_exponent = 0.0;  // H - 1/2
    double effective_rho = 0.0;
    double sigma0 = 0.0;
    double hurst = 0.5;
};

MalliavinKernel malliavin_kernel(const VolModel& model, Correlation rho);

/// ATM implied-vol level as maturity goes to zero: the spot vol.
double level_limit(const VolModel& model);

/// Evaluates the scaled skew functional at maturity T: outer Gauss-Legendre
/// in r, inner Gauss-Jacobi in u with the (u-r)^{H-1/2} weight integrated
/// exactly. For kernels with constant smooth part the T-dependence cancels
/// and the result equals the closed-form limit at every T.
SkewLimit skew_limit_quadrature(OptionKind kind, const MalliavinKernel& kernel, double expiry);
SkewLimit skew_limit_quadrature(OptionKind kind, const VolModel& model, Correlation rho,
                                double expiry);

/// Closed-form limits for the catalogued models. `doubled_asian_coeff`
/// switches the rough-regime Asian numerator from 144 to 288 for comparison
/// runs; the quadrature evaluator arbitrates between the two.
SkewLimit skew_limit_closed(OptionKind kind, const VolModel& model, Correlation rho,
                            bool doubled_asian_coeff = false);

/// Coefficient c(H) of the skew power law c(H) T^{H-1/2} under fractional
/// Bergomi, valid on all of H in (0,1); reduces to the H = 1/2 constants.
double bergomi_skew_coefficient(OptionKind kind, double hurst, double vol_of_vol,
                                double rho, bool doubled_asian_coeff = false);

/// First-order smile: level + slope(T) (k - k*), anchored at k* = spot.
struct IVApprox {
    OptionKind kind = OptionKind::european;
    double level = 0.0;
    double slope = 0.0;
    double anchor_strike = 0.0;
    double maturity = 0.0;

    double at(double strike) const { return level + slope * (strike - anchor_strike); }
};

IVApprox make_iv_approx(OptionKind kind, const VolModel& model, Correlation rho,
                        double spot, double expiry);

double iv_linear_approx(OptionKind kind, const VolModel& model, Correlation rho,
                        double spot, double strike, double expiry);

/// Bachelier price at the approximated IV. A non-positive approximated vol
/// (deep OTM, steep skew) is floored at 1e-8 and flagged.
struct ApproxPrice {
    double price = 0.0;
    double iv = 0.0;
    bool floored = false;
};

ApproxPrice price_via_approx(const VolModel& model, Correlation rho, const OptionSpec& spec);

}  // namespace vollab
