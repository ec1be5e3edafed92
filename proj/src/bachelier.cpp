#include "vollab/bachelier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <string>

namespace vollab {

namespace {

constexpr double inv_sqrt_2pi = 0.3989422804014326779399461;

void require_finite(double x, const char* what) {
    if (!std::isfinite(x)) throw std::domain_error(std::string("non-finite ") + what);
}

void check_pricing_inputs(double t, double sigma, double expiry) {
    require_finite(t, "t");
    require_finite(sigma, "sigma");
    require_finite(expiry, "expiry");
    if (expiry <= t) throw std::domain_error("expiry must exceed valuation time");
    if (sigma <= 0.0) throw std::domain_error("sigma must be positive");
}

// Effective normal vol of the European contract equivalent to an Asian one.
double asian_effective_sigma(double sigma, double t, double expiry) {
    return sigma * (expiry - t) / (expiry * std::sqrt(3.0));
}

}  // namespace

double norm_pdf(double x) { return inv_sqrt_2pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

OptionSpec OptionSpec::european(double spot, double strike, double t, double expiry) {
    OptionSpec s{OptionKind::european, spot, strike, t, expiry, 0.0};
    s.validate();
    return s;
}

OptionSpec OptionSpec::asian(double spot, double strike, double t, double expiry,
                             double running_integral) {
    OptionSpec s{OptionKind::asian, spot, strike, t, expiry, running_integral};
    s.validate();
    return s;
}

double OptionSpec::forward_center() const {
    if (kind == OptionKind::european) return spot;
    return spot * (expiry - t) / expiry + running_integral / expiry;
}

double OptionSpec::atm_strike() const { return forward_center(); }

double OptionSpec::intrinsic() const { return std::max(forward_center() - strike, 0.0); }

void OptionSpec::validate() const {
    require_finite(spot, "spot");
    require_finite(strike, "strike");
    require_finite(t, "t");
    require_finite(expiry, "expiry");
    if (t < 0.0) throw std::domain_error("valuation time must be non-negative");
    if (expiry <= t) throw std::domain_error("expiry must exceed valuation time");
    if (kind == OptionKind::asian) {
        require_finite(running_integral, "running integral");
        if (t == 0.0 && running_integral != 0.0)
            throw std::domain_error("running integral must be 0 at t = 0");
    }
}

double price_european(double t, double spot, double strike, double sigma, double expiry) {
    check_pricing_inputs(t, sigma, expiry);
    require_finite(spot, "spot");
    require_finite(strike, "strike");
    const double stdev = sigma * std::sqrt(expiry - t);
    const double d = (spot - strike) / stdev;
    return (spot - strike) * norm_cdf(d) + stdev * norm_pdf(d);
}

double price_asian(double t, double spot, double running_integral, double strike,
                   double sigma, double expiry) {
    check_pricing_inputs(t, sigma, expiry);
    require_finite(spot, "spot");
    require_finite(strike, "strike");
    require_finite(running_integral, "running integral");
    if (t == 0.0 && running_integral != 0.0)
        throw std::domain_error("running integral must be 0 at t = 0");
    const double center = spot * (expiry - t) / expiry + running_integral / expiry;
    return price_european(t, center, strike, asian_effective_sigma(sigma, t, expiry), expiry);
}

double price(const OptionSpec& spec, double sigma) {
    spec.validate();
    if (spec.kind == OptionKind::european)
        return price_european(spec.t, spec.spot, spec.strike, sigma, spec.expiry);
    return price_asian(spec.t, spec.spot, spec.running_integral, spec.strike, sigma,
                       spec.expiry);
}

double standardized_moneyness(const OptionSpec& spec, double sigma) {
    check_pricing_inputs(spec.t, sigma, spec.expiry);
    const double tau = spec.expiry - spec.t;
    const double stdev = spec.kind == OptionKind::european
                             ? sigma * std::sqrt(tau)
                             : asian_effective_sigma(sigma, spec.t, spec.expiry) * std::sqrt(tau);
    return (spec.forward_center() - spec.strike) / stdev;
}

double vega(const OptionSpec& spec, double sigma) {
    const double d = standardized_moneyness(spec, sigma);
    const double tau = spec.expiry - spec.t;
    if (spec.kind == OptionKind::european) return norm_pdf(d) * std::sqrt(tau);
    return norm_pdf(d) * tau * std::sqrt(tau) / (spec.expiry * std::sqrt(3.0));
}

double dual_delta(const OptionSpec& spec, double sigma) {
    return -norm_cdf(standardized_moneyness(spec, sigma));
}

double h_kernel(double s, double x, double strike, double sigma, double expiry) {
    check_pricing_inputs(s, sigma, expiry);
    require_finite(x, "x");
    require_finite(strike, "strike");
    const double tau = expiry - s;
    const double d = (x - strike) / (sigma * std::sqrt(tau));
    return -d * norm_pdf(d) / (2.0 * sigma * sigma * tau);
}

double implied_vol(const OptionSpec& spec, double target_price) {
    spec.validate();
    require_finite(target_price, "price");
    const double tau = spec.expiry - spec.t;
    const double center = spec.forward_center();
    const double intrinsic = spec.intrinsic();
    if (target_price <= intrinsic)
        throw no_solution_error("implied_vol: price at or below intrinsic value");

    // Work in the European picture; an Asian quote maps to a European one at
    // the averaged state with vol scaled by (T-t)/(T sqrt 3).
    const double asian_rescale =
        spec.kind == OptionKind::asian ? spec.expiry * std::sqrt(3.0) / tau : 1.0;

    const double sqrt_tau = std::sqrt(tau);
    const double atm_slope = std::sqrt(2.0 * std::numbers::pi / tau);

    // Exact ATM inversion.
    if (center == spec.strike) return target_price * atm_slope * asian_rescale;

    auto euro_price = [&](double sig) {
        const double stdev = sig * sqrt_tau;
        const double d = (center - spec.strike) / stdev;
        return (center - spec.strike) * norm_cdf(d) + stdev * norm_pdf(d);
    };
    auto euro_vega = [&](double sig) {
        const double d = (center - spec.strike) / (sig * sqrt_tau);
        return norm_pdf(d) * sqrt_tau;
    };

    // Bracket [lo, hi] with euro_price(hi) >= target; price grows without
    // bound in sigma, so doubling terminates.
    double lo = 1e-8;
    double hi = std::max({target_price * atm_slope, std::abs(center - spec.strike) / sqrt_tau,
                          1e-4});
    for (int i = 0; i < 200 && euro_price(hi) < target_price; ++i) hi *= 2.0;
    if (euro_price(hi) < target_price)
        throw solver_error("implied_vol: failed to bracket the target price");

    // ATM inversion applied to the centered time value as the seed.
    double sigma = (target_price - 0.5 * (center - spec.strike)) * atm_slope;
    sigma = std::clamp(sigma, lo, hi);

    const double tol = 1e-12 * std::max(1.0, target_price);
    double residual = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        const double p = euro_price(sigma);
        residual = p - target_price;
        if (residual > 0.0)
            hi = sigma;
        else
            lo = sigma;

        const double v = euro_vega(sigma);
        double next = v > 0.0 ? sigma - residual / v : 0.0;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback

        const double step = std::abs(next - sigma);
        sigma = next;
        // Converged: residual inside tolerance and the update is at noise level.
        if (std::abs(residual) <= tol && step <= 1e-15 * std::max(sigma, 1e-8))
            return sigma * asian_rescale;
    }
    if (std::abs(residual) <= tol) return sigma * asian_rescale;

    char msg[160];
    std::snprintf(msg, sizeof msg,
                  "implied_vol: no convergence, best bracket [%.17g, %.17g]", lo, hi);
    throw solver_error(msg);
}

}  // namespace vollab
