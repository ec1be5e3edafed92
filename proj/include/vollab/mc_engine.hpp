#pragma once

// Correlated path simulation under the catalogued volatility models,
// antithetic price estimation, ATM implied-vol and digital skew estimators,
// and the price-decomposition self-consistency check for SABR.
//
// Determinism contract: every path owns the Philox substream keyed by its
// global pair index, and per-block partial results are merged in block order,
// so runs are bit-identical for a fixed SimConfig regardless of thread count.

#include <Eigen/Dense>
#include <cstdint>

#include "vollab/bachelier.hpp"
#include "vollab/stats.hpp"
#include "vollab/vol_models.hpp"

namespace vollab {

struct capacity_error : std::length_error {
    using std::length_error::length_error;
};

struct SimConfig {
    std::size_t n_paths = 200000;
    std::size_t n_steps = 50;
    std::uint64_t seed = 1;  // seed 0 is reserved for tests
    bool antithetic = true;
    std::size_t batch_size = 16384;
    unsigned n_threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

/// One batch of simulated paths. Column p of `spot` / `sigma` holds path p at
/// the n_steps+1 grid nodes. With antithetic on, path 2q+1 is the
/// noise-negated mirror of path 2q.
struct PathBatch {
    std::vector<double> grid;
    Eigen::MatrixXd spot;
    Eigen::MatrixXd sigma;
    Eigen::VectorXd time_average;  // trapezoidal A_T per path
    Eigen::VectorXd terminal;
    bool antithetic = false;
    double expiry = 0.0;
};

enum class SkewMethod { digital_mc, finite_difference, quadrature, closed_form };

/// ATM implied-vol level and skew with the T^{max(1/2-H,0)} scaling applied.
struct SkewReport {
    double level = 0.0;
    double level_std_err = 0.0;
    double skew_raw = 0.0;
    double skew_std_err = 0.0;
    double scaling_exponent = 0.0;  // max(1/2 - H, 0)
    double skew_scaled = 0.0;       // skew_raw * T^scaling_exponent
    double skew_scaled_std_err = 0.0;
    SkewMethod method = SkewMethod::digital_mc;
    double expiry = 0.0;
};

/// Euler scheme for the spot; the volatility path is exact in its driver
/// (SABR: lognormal in W', Bergomi: Gaussian kernel via Cholesky of the joint
/// covariance, LocalVol: sigma of the running spot). Requires spec.t = 0.
PathBatch simulate(const VolModel& model, Correlation rho, const OptionSpec& spec,
                   const SimConfig& cfg);

/// Antithetic (pairwise) payoff estimate from a simulated batch.
MCEstimate price_mc(const PathBatch& batch, const OptionSpec& spec, const SimConfig& cfg);

/// Streaming price estimate; identical statistics to simulate + price_mc but
/// bounded memory (processes cfg.batch_size paths at a time).
MCEstimate price_mc_streaming(const VolModel& model, Correlation rho,
                              const OptionSpec& spec, const SimConfig& cfg);

/// One simulation pass, payoff statistics at every strike (common random
/// numbers across strikes).
std::vector<MCEstimate> price_mc_multi_strike(const VolModel& model, Correlation rho,
                                              const OptionSpec& spec, const SimConfig& cfg,
                                              std::span<const double> strikes);

struct AtmIvEstimate {
    MCEstimate iv;
    MCEstimate option_price;
    bool below_intrinsic = false;  // flagged: MC price did not exceed intrinsic
};

/// Implied vol of the MC price at the ATM strike; the standard error is
/// propagated through the exact ATM inversion slope.
AtmIvEstimate atm_iv_mc(const VolModel& model, Correlation rho, const OptionSpec& spec,
                        const SimConfig& cfg);

/// Strike-bump-free skew estimate from the exercise probability:
/// (1/2 - P[X_T >= k*]) / atm vega.
SkewReport skew_digital(const VolModel& model, Correlation rho, const OptionSpec& spec,
                        const SimConfig& cfg);

/// Central-difference skew at k* +- bump with common random numbers; the
/// cross-check oracle for skew_digital.
SkewReport skew_finite_difference(const VolModel& model, Correlation rho,
                                  const OptionSpec& spec, const SimConfig& cfg,
                                  double bump);

/// Both sides of the European price decomposition under SABR, on common
/// paths: lhs the direct payoff estimate, rhs the conditional-Bachelier term
/// plus the Malliavin correction integral (trapezoid on the simulation grid).
struct DecompositionCheck {
    MCEstimate lhs;
    MCEstimate rhs;
    MCEstimate difference;  // per-pair lhs - rhs; std_err is the joint error
};

DecompositionCheck decomposition_check_sabr(double sigma0, double alpha, Correlation rho,
                                            const OptionSpec& spec, const SimConfig& cfg);

}  // namespace vollab
