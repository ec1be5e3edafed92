#pragma once

// Volatility model catalog: parameter sets, exact per-driver volatility laws,
// expected Malliavin derivatives, and the fractional-kernel covariance
// builder used for exact Gaussian simulation.

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace vollab {

struct ConstantVol {
    double sigma0;
};

/// Lognormal vol-of-vol model: sigma_t = sigma0 exp(alpha W'_t - alpha^2 t / 2).
struct SabrVol {
    double sigma0;
    double alpha;  // vol of vol, 1/sqrt(year)
};

/// sigma_t^2 = sigma0^2 exp(v sqrt(2H) Z_t - v^2 t^{2H} / 2) with the
/// Riemann-Liouville kernel Z_t = int_0^t (t-s)^{H-1/2} dW'_s.
struct FractionalBergomiVol {
    double sigma0;
    double vol_of_vol;
    double hurst;  // in (0, 1)
};

/// sigma(S_t) with two bounded derivatives and a positive floor. The price's
/// own Brownian drives the volatility, so the asymptotic formulas use an
/// effective correlation of 1. `anchor` is the spot the short-maturity
/// constants sigma(S0), sigma'(S0) are evaluated at.
struct LocalVol {
    std::string function;         // "tanh" or "poly"
    std::vector<double> coeffs;   // tanh: {base, amp, slope, center}; poly: c0, c1, ...
    double anchor = 0.0;
    double floor = 1e-8;

    double sigma(double x) const;
    double dsigma(double x) const;
};

using VolModel = std::variant<ConstantVol, SabrVol, FractionalBergomiVol, LocalVol>;

struct Correlation {
    double rho = 0.0;
    Correlation() = default;
    explicit Correlation(double r) : rho(r) {
        if (!(r > -1.0 && r < 1.0))
            throw std::domain_error("correlation must lie strictly inside (-1, 1)");
    }
};

/// Throws std::domain_error on invalid parameters.
void validate(const VolModel& model);

/// Spot volatility at time zero (LocalVol: sigma at the anchor).
double sigma0_of(const VolModel& model);

/// Regularity index of E[D_r sigma_u]: the model's H for fractional Bergomi,
/// 1/2 otherwise.
double effective_hurst(const VolModel& model);

/// E[D_r^{W'} sigma_u] for 0 <= r <= u. Fractional Bergomi returns the
/// analytic expression with its integrable (u-r)^{H-1/2} singularity; the
/// caller integrates. LocalVol returns the leading constant
/// sigma'(S0) sigma(S0).
double expected_malliavin_deriv(const VolModel& model, double r, double u);

/// alpha * sigma_u, independent of the perturbation time r <= u.
double pathwise_malliavin_deriv_sabr(double sigma_u, double alpha);

/// Driver value for vol_at: (t, W'_t) for SABR, (t, Z_t) for Bergomi,
/// the spot for LocalVol.
struct DriverState {
    double t = 0.0;
    double w_prime = 0.0;
    double z = 0.0;
    double spot = 0.0;
};

/// Evaluates sigma_t exactly from the driver value, no discretization.
double vol_at(const VolModel& model, const DriverState& state);

/// Joint second moments of the fractional kernel on a time grid:
/// cov_zz[i][j]  = Cov(Z_{t_i}, Z_{t_j}),
/// cov_zw[i][j]  = Cov(Z_{t_i}, W'_{t_j} - W'_{t_{j-1}}) (t_0 = 0).
struct KernelCovariance {
    std::vector<double> grid;
    Eigen::MatrixXd cov_zz;
    Eigen::MatrixXd cov_zw;
};

/// Grid must be strictly increasing with grid[0] > 0. Diagonal entries are
/// t^{2H}/(2H) in closed form; off-diagonals are integrated to 1e-12.
KernelCovariance build_kernel_covariance(double hurst, std::span<const double> grid);

/// Cholesky factor of the joint (Z_{t_1..t_n}, increments of W') covariance;
/// retries once with diagonal jitter 1e-12 trace/n, then throws
/// std::runtime_error.
Eigen::MatrixXd joint_driver_cholesky(const KernelCovariance& cov);

}  // namespace vollab
