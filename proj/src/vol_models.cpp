#include "vollab/vol_models.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>

namespace vollab {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

}  // namespace

double LocalVol::sigma(double x) const {
    double value;
    if (function == "tanh") {
        // base + amp * tanh(slope * (x - center))
        value = coeffs.at(0) + coeffs.at(1) * std::tanh(coeffs.at(2) * (x - coeffs.at(3)));
    } else if (function == "poly") {
        value = 0.0;
        double p = 1.0;
        for (double c : coeffs) {
            value += c * p;
            p *= x - anchor;
        }
    } else {
        throw std::domain_error("unknown local-vol function: " + function);
    }
    return std::max(value, floor);
}

double LocalVol::dsigma(double x) const {
    if (function == "tanh") {
        const double c = std::cosh(coeffs.at(2) * (x - coeffs.at(3)));
        return coeffs.at(1) * coeffs.at(2) / (c * c);
    }
    if (function == "poly") {
        double value = 0.0;
        double p = 1.0;
        for (std::size_t i = 1; i < coeffs.size(); ++i) {
            value += static_cast<double>(i) * coeffs[i] * p;
            p *= x - anchor;
        }
        return value;
    }
    throw std::domain_error("unknown local-vol function: " + function);
}

void validate(const VolModel& model) {
    std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantVol>) {
                require(m.sigma0 > 0.0, "sigma0 must be positive");
            } else if constexpr (std::is_same_v<T, SabrVol>) {
                require(m.sigma0 > 0.0, "sigma0 must be positive");
                require(m.alpha > 0.0, "alpha must be positive");
            } else if constexpr (std::is_same_v<T, FractionalBergomiVol>) {
                require(m.sigma0 > 0.0, "sigma0 must be positive");
                require(m.vol_of_vol > 0.0, "vol of vol must be positive");
                require(m.hurst > 0.0 && m.hurst < 1.0, "hurst must lie in (0, 1)");
            } else {
                require(m.floor > 0.0, "local-vol floor must be positive");
                require(m.sigma(m.anchor) > 0.0, "local vol must be positive at the anchor");
            }
        },
        model);
}

double sigma0_of(const VolModel& model) {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, LocalVol>)
                return m.sigma(m.anchor);
            else
                return m.sigma0;
        },
        model);
}

double effective_hurst(const VolModel& model) {
    if (const auto* fb = std::get_if<FractionalBergomiVol>(&model)) return fb->hurst;
    return 0.5;
}

double expected_malliavin_deriv(const VolModel& model, double r, double u) {
    if (r > u) throw std::domain_error("expected_malliavin_deriv requires r <= u");
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantVol>) {
                return 0.0;
            } else if constexpr (std::is_same_v<T, SabrVol>) {
                return m.alpha * m.sigma0;
            } else if constexpr (std::is_same_v<T, FractionalBergomiVol>) {
                const double h = m.hurst;
                const double damp =
                    std::exp(-m.vol_of_vol * m.vol_of_vol * std::pow(u, 2.0 * h) / 8.0);
                return damp * 0.5 * m.sigma0 * m.vol_of_vol * std::sqrt(2.0 * h) *
                       std::pow(u - r, h - 0.5);
            } else {
                return m.dsigma(m.anchor) * m.sigma(m.anchor);
            }
        },
        model);
}

double pathwise_malliavin_deriv_sabr(double sigma_u, double alpha) {
    return alpha * sigma_u;
}

double vol_at(const VolModel& model, const DriverState& state) {
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ConstantVol>) {
                return m.sigma0;
            } else if constexpr (std::is_same_v<T, SabrVol>) {
                return m.sigma0 *
                       std::exp(m.alpha * state.w_prime - 0.5 * m.alpha * m.alpha * state.t);
            } else if constexpr (std::is_same_v<T, FractionalBergomiVol>) {
                const double v = m.vol_of_vol;
                const double t2h = std::pow(state.t, 2.0 * m.hurst);
                // sqrt of the variance law halves both exponents
                return m.sigma0 * std::exp(0.5 * v * std::sqrt(2.0 * m.hurst) * state.z -
                                           0.25 * v * v * t2h);
            } else {
                return m.sigma(state.spot);
            }
        },
        model);
}

KernelCovariance build_kernel_covariance(double hurst, std::span<const double> grid) {
    if (hurst <= 0.0 || hurst >= 1.0) throw std::domain_error("hurst must lie in (0, 1)");
    const std::size_t n = grid.size();
    if (n == 0) throw std::domain_error("empty time grid");
    if (grid[0] <= 0.0) throw std::domain_error("grid must start after 0");
    for (std::size_t i = 1; i < n; ++i)
        if (grid[i] <= grid[i - 1]) throw std::domain_error("grid must be strictly increasing");

    KernelCovariance cov;
    cov.grid.assign(grid.begin(), grid.end());
    cov.cov_zz.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    cov.cov_zw.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

    const double h = hurst;
    const double hp = h + 0.5;

    // Cov(Z_a, Z_b), a <= b: int_0^a (a-s)^{H-1/2} (b-s)^{H-1/2} ds. The
    // substitution s = a - x^{1/(H+1/2)} absorbs the endpoint singularity, so
    // adaptive tanh-sinh reaches 1e-12 on the smooth remainder.
    auto zz = [&](double a, double b) {
        if (a == b) return std::pow(a, 2.0 * h) / (2.0 * h);
        const double gap = b - a;
        const double p = 1.0 / hp;
        boost::math::quadrature::tanh_sinh<double> integrator;
        auto smooth = [&](double w) { return std::pow(gap + std::pow(w, p), h - 0.5); };
        return p * integrator.integrate(smooth, 0.0, std::pow(a, hp), 1e-13);
    };

    // Cov(Z_{t_i}, W'_{t_j} - W'_{t_{j-1}}) over the overlap [a, b] with t_i:
    // ((t_i - a)^{H+1/2} - (t_i - b)^{H+1/2}) / (H + 1/2).
    auto zw = [&](double ti, double lo, double hi) {
        const double a = std::min(lo, ti);
        const double b = std::min(hi, ti);
        if (b <= a) return 0.0;
        return (std::pow(ti - a, hp) - std::pow(ti - b, hp)) / hp;
    };

    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double c = zz(cov.grid[j], cov.grid[i]);
            cov.cov_zz(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
            cov.cov_zz(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = c;
        }
        for (std::size_t j = 0; j < n; ++j) {
            const double lo = j == 0 ? 0.0 : cov.grid[j - 1];
            cov.cov_zw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                zw(cov.grid[i], lo, cov.grid[j]);
        }
    }
    return cov;
}

Eigen::MatrixXd joint_driver_cholesky(const KernelCovariance& cov) {
    const Eigen::Index n = cov.cov_zz.rows();
    Eigen::MatrixXd joint(2 * n, 2 * n);
    joint.topLeftCorner(n, n) = cov.cov_zz;
    joint.topRightCorner(n, n) = cov.cov_zw;
    joint.bottomLeftCorner(n, n) = cov.cov_zw.transpose();
    Eigen::MatrixXd incr = Eigen::MatrixXd::Zero(n, n);
    incr(0, 0) = cov.grid[0];
    for (Eigen::Index j = 1; j < n; ++j)
        incr(j, j) = cov.grid[static_cast<std::size_t>(j)] -
                     cov.grid[static_cast<std::size_t>(j) - 1];
    joint.bottomRightCorner(n, n) = incr;

    Eigen::LLT<Eigen::MatrixXd> llt(joint);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    const double jitter = 1e-12 * joint.trace() / static_cast<double>(2 * n);
    joint.diagonal().array() += jitter;
    llt.compute(joint);
    if (llt.info() == Eigen::Success) return llt.matrixL();
    throw std::runtime_error("kernel covariance is not positive semidefinite");
}

}  // namespace vollab
