#pragma once

// Closed-form Bachelier (normal model) pricing for European and arithmetic
// Asian calls, Greeks, the third-derivative kernel, and implied-vol inversion.
//
// Units: volatility is a normal vol in currency per sqrt(year), never a
// percentage of spot. Times are in years, prices in currency. Negative spots
// and strikes are valid inputs; the normal model admits negative prices.

#include <stdexcept>

namespace vollab {

enum class OptionKind { european, asian };

/// Thrown by implied_vol when the target price is at or below intrinsic.
struct no_solution_error : std::domain_error {
    using std::domain_error::domain_error;
};

/// Thrown by implied_vol when the iteration budget is exhausted.
struct solver_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Contract descriptor. For Asian contracts, running_integral is
/// y_t = int_0^t S_u du and must be 0 when t = 0.
struct OptionSpec {
    OptionKind kind = OptionKind::european;
    double spot = 0.0;
    double strike = 0.0;
    double t = 0.0;       // valuation time
    double expiry = 0.0;  // maturity T > t
    double running_integral = 0.0;

    static OptionSpec european(double spot, double strike, double t, double expiry);
    static OptionSpec asian(double spot, double strike, double t, double expiry,
                            double running_integral);

    /// Conditional mean of the terminal average (Asian) or the spot (European).
    double forward_center() const;
    /// The strike k* at which standardized moneyness is exactly zero.
    double atm_strike() const;
    double intrinsic() const;
    /// Throws std::domain_error on non-finite fields, expiry <= t, or an
    /// inconsistent running integral.
    void validate() const;
};

double norm_pdf(double x);
double norm_cdf(double x);  // erfc based, abs error < 1e-15

/// (S - k) N(d) + n(d) sigma sqrt(T - t), d = (S - k)/(sigma sqrt(T - t)).
double price_european(double t, double spot, double strike, double sigma, double expiry);

/// Appendix-style closed form; equals price_european at the averaged state
/// (M_t, sigma (T-t)/(T sqrt 3)).
double price_asian(double t, double spot, double running_integral, double strike,
                   double sigma, double expiry);

double price(const OptionSpec& spec, double sigma);

/// Standardized moneyness d for the contract kind.
double standardized_moneyness(const OptionSpec& spec, double sigma);

/// dPrice/dsigma. At the ATM strike and t=0: sqrt(T/(2 pi)) European,
/// sqrt(T/(6 pi)) Asian.
double vega(const OptionSpec& spec, double sigma);

/// dPrice/dstrike = -N(d); exactly -1/2 at the ATM strike.
double dual_delta(const OptionSpec& spec, double sigma);

/// H(s,x,k,sigma) = 1/2 d^3/dx^3 of the European price
///                = -d n(d) / (2 sigma^2 (T - s)).
double h_kernel(double s, double x, double strike, double sigma, double expiry);

/// Inverts price(spec, .) = target. Newton with analytic vega seeded from the
/// exact ATM inversion, clipped to a doubling bracket with bisection fallback.
/// Residual tolerance 1e-12 * max(1, target).
double implied_vol(const OptionSpec& spec, double target_price);

}  // namespace vollab
