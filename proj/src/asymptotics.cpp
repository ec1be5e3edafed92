#include "vollab/asymptotics.hpp"

#include <cmath>

#include "vollab/quadrature.hpp"

namespace vollab {

namespace {

constexpr std::size_t quad_nodes = 64;

SkewRegime regime_for(double hurst) {
    if (hurst < 0.5) return SkewRegime::blowup_scaled;
    if (hurst > 0.5) return SkewRegime::vanishing;
    return SkewRegime::finite_limit;
}

}  // namespace

MalliavinKernel malliavin_kernel(const VolModel& model, Correlation rho) {
    validate(model);
    MalliavinKernel kernel;
    kernel.sigma0 = sigma0_of(model);
    kernel.hurst = effective_hurst(model);
    kernel.singular_exponent = 0.0;
    kernel.effective_rho = rho.rho;

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantVol>) {
                kernel.smooth = [](double, double) { return 0.0; };
            } else if constexpr (std::is_same_v<T, SabrVol>) {
                const double c = m.alpha * m.sigma0;
                kernel.smooth = [c](double, double) { return c; };
            } else if constexpr (std::is_same_v<T, FractionalBergomiVol>) {
                const double c = 0.5 * m.sigma0 * m.vol_of_vol * std::sqrt(2.0 * m.hurst);
                const double v2 = m.vol_of_vol * m.vol_of_vol;
                const double two_h = 2.0 * m.hurst;
                kernel.smooth = [c, v2, two_h](double, double u) {
                    return c * std::exp(-v2 * std::pow(u, two_h) / 8.0);
                };
                kernel.singular_exponent = m.hurst - 0.5;
            } else {
                const double c = m.dsigma(m.anchor) * m.sigma(m.anchor);
                kernel.smooth = [c](double, double) { return c; };
                kernel.effective_rho = 1.0;  // the price's Brownian drives the vol
            }
        },
        model);
    return kernel;
}

double level_limit(const VolModel& model) {
    validate(model);
    return sigma0_of(model);
}

SkewLimit skew_limit_quadrature(OptionKind kind, const MalliavinKernel& kernel,
                                double expiry) {
    if (!(expiry > 0.0)) throw std::domain_error("expiry must be positive");
    const double T = expiry;
    const double e = kernel.singular_exponent;

    const auto outer = quad::gauss_legendre(quad_nodes);
    const auto inner = quad::gauss_jacobi(quad_nodes, 0.0, e);

    // inner integral over u in [r, T] with the (u-r)^e weight exact
    auto inner_integral = [&](double r) {
        const double half = 0.5 * (T - r);
        double acc = 0.0;
        for (std::size_t i = 0; i < quad_nodes; ++i) {
            const double u = r + half * (inner.nodes[i] + 1.0);
            double g = kernel.smooth(r, u);
            if (kind == OptionKind::asian) g *= (T - u) * (T - u);
            acc += inner.weights[i] * g;
        }
        return std::pow(half, e + 1.0) * acc;
    };

    double integral = 0.0;
    for (std::size_t i = 0; i < quad_nodes; ++i) {
        const double r = 0.5 * T * (outer.nodes[i] + 1.0);
        double f = inner_integral(r);
        if (kind == OptionKind::asian) f *= (T - r);
        integral += outer.weights[i] * f;
    }
    integral *= 0.5 * T;

    const double prefactor =
        kind == OptionKind::european
            ? kernel.effective_rho / (kernel.sigma0 * T * T)
            : 9.0 * kernel.effective_rho / (kernel.sigma0 * std::pow(T, 5.0));
    const double scaling = std::max(0.5 - kernel.hurst, 0.0);

    SkewLimit out;
    out.kind = kind;
    out.hurst = kernel.hurst;
    out.regime = regime_for(kernel.hurst);
    out.value = std::pow(T, scaling) * prefactor * integral;
    return out;
}

SkewLimit skew_limit_quadrature(OptionKind kind, const VolModel& model, Correlation rho,
                                double expiry) {
    return skew_limit_quadrature(kind, malliavin_kernel(model, rho), expiry);
}

double bergomi_skew_coefficient(OptionKind kind, double hurst, double vol_of_vol,
                                double rho, bool doubled_asian_coeff) {
    if (hurst <= 0.0 || hurst >= 1.0) throw std::domain_error("hurst must lie in (0, 1)");
    const double root = std::sqrt(2.0 * hurst);
    const double h2 = 2.0 * hurst;
    if (kind == OptionKind::european)
        return 2.0 * rho * vol_of_vol * root / ((h2 + 1.0) * (h2 + 3.0));
    const double numerator = doubled_asian_coeff ? 288.0 : 144.0;
    return numerator * rho * vol_of_vol * root /
           ((h2 + 1.0) * (h2 + 3.0) * (h2 + 5.0) * (h2 + 9.0));
}

SkewLimit skew_limit_closed(OptionKind kind, const VolModel& model, Correlation rho,
                            bool doubled_asian_coeff) {
    validate(model);
    SkewLimit out;
    out.kind = kind;
    out.hurst = effective_hurst(model);
    out.regime = regime_for(out.hurst);

    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantVol>) {
                out.value = 0.0;
            } else if constexpr (std::is_same_v<T, SabrVol>) {
                out.value = kind == OptionKind::asian ? 0.6 * rho.rho * m.alpha
                                                      : 0.5 * rho.rho * m.alpha;
            } else if constexpr (std::is_same_v<T, FractionalBergomiVol>) {
                if (m.hurst > 0.5)
                    out.value = 0.0;
                else
                    out.value = bergomi_skew_coefficient(kind, m.hurst, m.vol_of_vol,
                                                         rho.rho, doubled_asian_coeff);
            } else {
                const double slope = m.dsigma(m.anchor);
                out.value = kind == OptionKind::asian ? 0.6 * slope : 0.5 * slope;
            }
        },
        model);
    return out;
}

IVApprox make_iv_approx(OptionKind kind, const VolModel& model, Correlation rho,
                        double spot, double expiry) {
    if (!(expiry > 0.0)) throw std::domain_error("expiry must be positive");
    validate(model);

    IVApprox approx;
    approx.kind = kind;
    approx.level = level_limit(model);
    approx.anchor_strike = spot;  // k* at t = 0 for both kinds
    approx.maturity = expiry;

    if (const auto* fb = std::get_if<FractionalBergomiVol>(&model)) {
        // finite scaled limit divided by the scaling; covers all H and
        // reduces to the flat limit at H = 1/2
        approx.slope = bergomi_skew_coefficient(kind, fb->hurst, fb->vol_of_vol, rho.rho) *
                       std::pow(expiry, fb->hurst - 0.5);
    } else {
        approx.slope = skew_limit_closed(kind, model, rho).value;
    }
    return approx;
}

double iv_linear_approx(OptionKind kind, const VolModel& model, Correlation rho,
                        double spot, double strike, double expiry) {
    return make_iv_approx(kind, model, rho, spot, expiry).at(strike);
}

ApproxPrice price_via_approx(const VolModel& model, Correlation rho,
                             const OptionSpec& spec) {
    spec.validate();
    if (spec.t != 0.0)
        throw std::invalid_argument("the IV approximation is anchored at t = 0");

    ApproxPrice out;
    out.iv = iv_linear_approx(spec.kind, model, rho, spec.spot, spec.strike, spec.expiry);
    if (out.iv <= 0.0) {
        out.iv = 1e-8;
        out.floored = true;
    }
    out.price = price(spec, out.iv);
    return out;
}

}  // namespace vollab
