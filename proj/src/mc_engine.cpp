#include "vollab/mc_engine.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "vollab/parallel.hpp"
#include "vollab/rng.hpp"

namespace vollab {

namespace {

constexpr std::size_t max_batch_elements = std::size_t{1} << 27;  // doubles per matrix

std::size_t paths_per_group(const SimConfig& cfg) { return cfg.antithetic ? 2 : 1; }

// Draw layout per substream, in blocks of n_steps normals:
//   constant/SABR: [xi for W' increments][zeta for B increments]
//   Bergomi:       [xi joint (Z grid, W' increments), length 2n][zeta for B]
//   LocalVol:      [xi for W increments] (the spot's Brownian drives the vol)
class PathSampler {
public:
    PathSampler(const VolModel& model, Correlation rho, const OptionSpec& spec,
                const SimConfig& cfg)
        : model_(model), rho_(rho.rho), cfg_(cfg), spot0_(spec.spot), expiry_(spec.expiry) {
        validate(model);
        cfg.validate();
        if (spec.t != 0.0) throw std::invalid_argument("simulation starts at t = 0");
        n_ = cfg.n_steps;
        dt_ = expiry_ / static_cast<double>(n_);
        grid_.resize(n_ + 1);
        for (std::size_t i = 0; i <= n_; ++i) grid_[i] = dt_ * static_cast<double>(i);
        if (const auto* fb = std::get_if<FractionalBergomiVol>(&model_)) {
            const auto cov = build_kernel_covariance(
                fb->hurst, std::span<const double>(grid_).subspan(1));
            chol_ = joint_driver_cholesky(cov);
            normals_per_stream_ = 3 * n_;
        } else if (std::holds_alternative<LocalVol>(model_)) {
            normals_per_stream_ = n_;
        } else {
            normals_per_stream_ = 2 * n_;
        }
    }

    const std::vector<double>& grid() const { return grid_; }
    double dt() const { return dt_; }

    PathBatch allocate(std::size_t n_paths) const {
        PathBatch batch;
        batch.grid = grid_;
        batch.spot.resize(static_cast<Eigen::Index>(n_ + 1), static_cast<Eigen::Index>(n_paths));
        batch.sigma.resize(static_cast<Eigen::Index>(n_ + 1), static_cast<Eigen::Index>(n_paths));
        batch.time_average.resize(static_cast<Eigen::Index>(n_paths));
        batch.terminal.resize(static_cast<Eigen::Index>(n_paths));
        batch.antithetic = cfg_.antithetic;
        batch.expiry = expiry_;
        return batch;
    }

    /// Fills columns [col0, col0 + count) with the paths whose global indices
    /// start at first_path. first_path and count must be pair aligned when
    /// antithetic is on.
    void fill(std::size_t first_path, std::size_t count, std::size_t col0,
              PathBatch& out) const {
        const std::size_t group = paths_per_group(cfg_);
        const std::size_t n_streams = count / group;
        const std::size_t first_stream = first_path / group;

        Eigen::MatrixXd raw(static_cast<Eigen::Index>(normals_per_stream_),
                            static_cast<Eigen::Index>(n_streams));
        for (std::size_t s = 0; s < n_streams; ++s) {
            rng::NormalStream stream(cfg_.seed, first_stream + s);
            for (std::size_t i = 0; i < normals_per_stream_; ++i)
                raw(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = stream.next();
        }

        Eigen::MatrixXd driver;  // Bergomi only: rows 0..n-1 = Z, n..2n-1 = dW'
        if (std::holds_alternative<FractionalBergomiVol>(model_))
            driver = chol_.triangularView<Eigen::Lower>() *
                     raw.topRows(static_cast<Eigen::Index>(2 * n_));

        for (std::size_t s = 0; s < n_streams; ++s) {
            for (std::size_t member = 0; member < group; ++member) {
                const double sign = member == 0 ? 1.0 : -1.0;
                const std::size_t col = col0 + s * group + member;
                build_path(raw, driver, s, sign, col, out);
            }
        }
    }

private:
    void build_path(const Eigen::MatrixXd& raw, const Eigen::MatrixXd& driver,
                    std::size_t s, double sign, std::size_t col, PathBatch& out) const {
        const auto c = static_cast<Eigen::Index>(col);
        const auto sc = static_cast<Eigen::Index>(s);
        auto spot = out.spot.col(c);
        auto sigma = out.sigma.col(c);
        const double sqrt_dt = std::sqrt(dt_);
        const double rho_comp = std::sqrt(1.0 - rho_ * rho_);

        spot(0) = spot0_;
        std::visit(
            [&](const auto& m) {
                using T = std::decay_t<decltype(m)>;
                if constexpr (std::is_same_v<T, ConstantVol>) {
                    sigma.setConstant(m.sigma0);
                    for (std::size_t j = 1; j <= n_; ++j) {
                        const auto ji = static_cast<Eigen::Index>(j);
                        const double dwp = sign * sqrt_dt * raw(ji - 1, sc);
                        const double db =
                            sign * sqrt_dt * raw(static_cast<Eigen::Index>(n_ + j - 1), sc);
                        spot(ji) = spot(ji - 1) + m.sigma0 * (rho_ * dwp + rho_comp * db);
                    }
                } else if constexpr (std::is_same_v<T, SabrVol>) {
                    sigma(0) = m.sigma0;
                    double w = 0.0;
                    for (std::size_t j = 1; j <= n_; ++j) {
                        const auto ji = static_cast<Eigen::Index>(j);
                        const double dwp = sign * sqrt_dt * raw(ji - 1, sc);
                        const double db =
                            sign * sqrt_dt * raw(static_cast<Eigen::Index>(n_ + j - 1), sc);
                        w += dwp;
                        sigma(ji) = m.sigma0 *
                                    std::exp(m.alpha * w - 0.5 * m.alpha * m.alpha * grid_[j]);
                        spot(ji) = spot(ji - 1) + sigma(ji - 1) * (rho_ * dwp + rho_comp * db);
                    }
                } else if constexpr (std::is_same_v<T, FractionalBergomiVol>) {
                    sigma(0) = m.sigma0;
                    const double v = m.vol_of_vol;
                    const double vh = 0.5 * v * std::sqrt(2.0 * m.hurst);
                    for (std::size_t j = 1; j <= n_; ++j) {
                        const auto ji = static_cast<Eigen::Index>(j);
                        const double z = sign * driver(ji - 1, sc);
                        const double dwp =
                            sign * driver(static_cast<Eigen::Index>(n_ + j - 1), sc);
                        const double db =
                            sign * sqrt_dt * raw(static_cast<Eigen::Index>(2 * n_ + j - 1), sc);
                        sigma(ji) = m.sigma0 * std::exp(vh * z - 0.25 * v * v *
                                                                     std::pow(grid_[j],
                                                                              2.0 * m.hurst));
                        spot(ji) = spot(ji - 1) + sigma(ji - 1) * (rho_ * dwp + rho_comp * db);
                    }
                } else {
                    // The vol driver is the price's own Brownian; rho plays no role.
                    sigma(0) = m.sigma(spot(0));
                    for (std::size_t j = 1; j <= n_; ++j) {
                        const auto ji = static_cast<Eigen::Index>(j);
                        const double dw = sign * sqrt_dt * raw(ji - 1, sc);
                        spot(ji) = spot(ji - 1) + sigma(ji - 1) * dw;
                        sigma(ji) = m.sigma(spot(ji));
                    }
                }
            },
            model_);

        // trapezoidal running average
        double acc = 0.5 * (spot(0) + spot(static_cast<Eigen::Index>(n_)));
        for (std::size_t j = 1; j < n_; ++j) acc += spot(static_cast<Eigen::Index>(j));
        out.time_average(c) = acc * dt_ / expiry_;
        out.terminal(c) = spot(static_cast<Eigen::Index>(n_));
    }

    const VolModel& model_;
    double rho_;
    SimConfig cfg_;
    double spot0_;
    double expiry_;
    std::size_t n_ = 0;
    double dt_ = 0.0;
    std::vector<double> grid_;
    Eigen::MatrixXd chol_;
    std::size_t normals_per_stream_ = 0;
};

// Splits [0, n_paths) into pair-aligned blocks, runs fn(block, batch) in
// parallel, merges block accumulators in index order.
template <typename Acc, typename PerBatch>
Acc stream_paths(const VolModel& model, Correlation rho, const OptionSpec& spec,
                 const SimConfig& cfg, PerBatch per_batch) {
    const PathSampler sampler(model, rho, spec, cfg);
    const std::size_t group = paths_per_group(cfg);
    std::size_t block = cfg.batch_size - cfg.batch_size % group;
    if (block == 0) block = group;
    const std::size_t n_blocks = (cfg.n_paths + block - 1) / block;

    std::vector<Acc> partial(n_blocks);
    const unsigned threads = cfg.n_threads == 0 ? default_thread_count() : cfg.n_threads;
    parallel_for_blocks(n_blocks, threads, [&](std::size_t b) {
        const std::size_t first = b * block;
        const std::size_t count = std::min(block, cfg.n_paths - first);
        PathBatch batch = sampler.allocate(count);
        sampler.fill(first, count, 0, batch);
        per_batch(batch, partial[b]);
    });

    Acc total;
    for (const auto& p : partial) total.merge(p);
    return total;
}

double pair_payoff(const PathBatch& batch, const OptionSpec& spec, std::size_t first,
                   std::size_t group, double strike) {
    double acc = 0.0;
    for (std::size_t m = 0; m < group; ++m) {
        const auto c = static_cast<Eigen::Index>(first + m);
        const double x = spec.kind == OptionKind::european ? batch.terminal(c)
                                                           : batch.time_average(c);
        acc += std::max(x - strike, 0.0);
    }
    return acc / static_cast<double>(group);
}

struct PriceAcc {
    RunningMoments payoff;
    void merge(const PriceAcc& o) { payoff.merge(o.payoff); }
};

struct DigitalAcc {
    RunningMoments payoff;
    RunningMoments indicator;
    void merge(const DigitalAcc& o) {
        payoff.merge(o.payoff);
        indicator.merge(o.indicator);
    }
};

struct FdAcc {
    RunningMoments pay_lo;
    RunningMoments pay_hi;
    RunningMoments diff;
    void merge(const FdAcc& o) {
        pay_lo.merge(o.pay_lo);
        pay_hi.merge(o.pay_hi);
        diff.merge(o.diff);
    }
};

struct DecompAcc {
    RunningMoments lhs;
    RunningMoments rhs;
    RunningMoments diff;
    void merge(const DecompAcc& o) {
        lhs.merge(o.lhs);
        rhs.merge(o.rhs);
        diff.merge(o.diff);
    }
};

double atm_inversion_slope(const OptionSpec& spec) {
    const double T = spec.expiry;
    return spec.kind == OptionKind::european
               ? std::sqrt(2.0 * std::numbers::pi / T)
               : std::sqrt(6.0 * std::numbers::pi / T);
}

void require_atm(const OptionSpec& spec) {
    const double kstar = spec.atm_strike();
    if (std::abs(spec.strike - kstar) > 1e-9 * std::max(1.0, std::abs(kstar)))
        throw std::invalid_argument("strike must be the ATM strike k*");
}

}  // namespace

void SimConfig::validate() const {
    if (n_paths < 2) throw std::domain_error("need at least 2 paths");
    if (antithetic && n_paths % 2 != 0)
        throw std::domain_error("antithetic estimation needs an even path count");
    if (n_steps < 1) throw std::domain_error("need at least 1 time step");
    if (batch_size < 2) throw std::domain_error("batch_size must be at least 2");
}

PathBatch simulate(const VolModel& model, Correlation rho, const OptionSpec& spec,
                   const SimConfig& cfg) {
    spec.validate();
    const PathSampler sampler(model, rho, spec, cfg);
    if (cfg.n_paths * (cfg.n_steps + 1) > max_batch_elements)
        throw capacity_error("paths x steps exceeds the in-memory batch capacity");

    PathBatch batch = sampler.allocate(cfg.n_paths);
    const std::size_t group = paths_per_group(cfg);
    std::size_t block = cfg.batch_size - cfg.batch_size % group;
    if (block == 0) block = group;
    const std::size_t n_blocks = (cfg.n_paths + block - 1) / block;
    const unsigned threads = cfg.n_threads == 0 ? default_thread_count() : cfg.n_threads;
    parallel_for_blocks(n_blocks, threads, [&](std::size_t b) {
        const std::size_t first = b * block;
        const std::size_t count = std::min(block, cfg.n_paths - first);
        sampler.fill(first, count, first, batch);
    });
    return batch;
}

MCEstimate price_mc(const PathBatch& batch, const OptionSpec& spec, const SimConfig& cfg) {
    spec.validate();
    if (spec.t != 0.0) throw std::invalid_argument("price_mc prices from t = 0");
    if (batch.expiry != spec.expiry || batch.antithetic != cfg.antithetic ||
        batch.terminal.size() != static_cast<Eigen::Index>(cfg.n_paths))
        throw std::invalid_argument("batch does not match the spec/config it is priced under");

    const std::size_t group = paths_per_group(cfg);
    RunningMoments payoff;
    for (std::size_t p = 0; p < cfg.n_paths; p += group)
        payoff.add(pair_payoff(batch, spec, p, group, spec.strike));
    return payoff.estimate();
}

MCEstimate price_mc_streaming(const VolModel& model, Correlation rho,
                              const OptionSpec& spec, const SimConfig& cfg) {
    spec.validate();
    const std::size_t group = paths_per_group(cfg);
    auto acc = stream_paths<PriceAcc>(
        model, rho, spec, cfg, [&](const PathBatch& batch, PriceAcc& a) {
            const auto count = static_cast<std::size_t>(batch.terminal.size());
            for (std::size_t p = 0; p < count; p += group)
                a.payoff.add(pair_payoff(batch, spec, p, group, spec.strike));
        });
    return acc.payoff.estimate();
}

AtmIvEstimate atm_iv_mc(const VolModel& model, Correlation rho, const OptionSpec& spec,
                        const SimConfig& cfg) {
    require_atm(spec);
    AtmIvEstimate out;
    out.option_price = price_mc_streaming(model, rho, spec, cfg);

    const double slope = atm_inversion_slope(spec);
    try {
        const double iv = implied_vol(spec, out.option_price.mean);
        out.iv.mean = iv;
    } catch (const no_solution_error&) {
        out.below_intrinsic = true;
        out.iv.mean = 0.0;
    }
    out.iv.std_err = slope * out.option_price.std_err;
    out.iv.n = out.option_price.n;
    out.iv.ci_lo = out.iv.mean - 1.96 * out.iv.std_err;
    out.iv.ci_hi = out.iv.mean + 1.96 * out.iv.std_err;
    return out;
}

SkewReport skew_digital(const VolModel& model, Correlation rho, const OptionSpec& spec,
                        const SimConfig& cfg) {
    require_atm(spec);
    const std::size_t group = paths_per_group(cfg);

    auto acc = stream_paths<DigitalAcc>(
        model, rho, spec, cfg, [&](const PathBatch& batch, DigitalAcc& a) {
            const auto count = static_cast<std::size_t>(batch.terminal.size());
            for (std::size_t p = 0; p < count; p += group) {
                a.payoff.add(pair_payoff(batch, spec, p, group, spec.strike));
                double ind = 0.0;
                for (std::size_t m = 0; m < group; ++m) {
                    const auto c = static_cast<Eigen::Index>(p + m);
                    const double x = spec.kind == OptionKind::european
                                         ? batch.terminal(c)
                                         : batch.time_average(c);
                    if (x >= spec.strike) ind += 1.0;  // ties count as exercise
                }
                a.indicator.add(ind / static_cast<double>(group));
            }
        });

    const double denom = spec.kind == OptionKind::european
                             ? std::sqrt(spec.expiry / (2.0 * std::numbers::pi))
                             : std::sqrt(spec.expiry / (6.0 * std::numbers::pi));
    const double slope = atm_inversion_slope(spec);

    SkewReport report;
    report.method = SkewMethod::digital_mc;
    report.expiry = spec.expiry;
    report.level = slope * acc.payoff.mean();
    report.level_std_err = slope * acc.payoff.std_err();
    report.skew_raw = (0.5 - acc.indicator.mean()) / denom;
    report.skew_std_err = acc.indicator.std_err() / denom;
    report.scaling_exponent = std::max(0.5 - effective_hurst(model), 0.0);
    const double scale = std::pow(spec.expiry, report.scaling_exponent);
    report.skew_scaled = report.skew_raw * scale;
    report.skew_scaled_std_err = report.skew_std_err * scale;
    return report;
}

SkewReport skew_finite_difference(const VolModel& model, Correlation rho,
                                  const OptionSpec& spec, const SimConfig& cfg,
                                  double bump) {
    require_atm(spec);
    if (!(bump > 0.0) || !std::isfinite(bump))
        throw std::domain_error("strike bump must be positive");
    const std::size_t group = paths_per_group(cfg);
    const double k_lo = spec.strike - bump;
    const double k_hi = spec.strike + bump;

    auto acc = stream_paths<FdAcc>(
        model, rho, spec, cfg, [&](const PathBatch& batch, FdAcc& a) {
            const auto count = static_cast<std::size_t>(batch.terminal.size());
            for (std::size_t p = 0; p < count; p += group) {
                const double lo = pair_payoff(batch, spec, p, group, k_lo);
                const double hi = pair_payoff(batch, spec, p, group, k_hi);
                a.pay_lo.add(lo);
                a.pay_hi.add(hi);
                a.diff.add(hi - lo);
            }
        });

    OptionSpec spec_lo = spec;
    spec_lo.strike = k_lo;
    OptionSpec spec_hi = spec;
    spec_hi.strike = k_hi;
    const double iv_lo = implied_vol(spec_lo, acc.pay_lo.mean());
    const double iv_hi = implied_vol(spec_hi, acc.pay_hi.mean());

    SkewReport report;
    report.method = SkewMethod::finite_difference;
    report.expiry = spec.expiry;
    const double iv_mid = 0.5 * (iv_lo + iv_hi);
    report.level = iv_mid;
    report.level_std_err =
        atm_inversion_slope(spec) * 0.5 * (acc.pay_lo.std_err() + acc.pay_hi.std_err());
    report.skew_raw = (iv_hi - iv_lo) / (2.0 * bump);
    // Delta method: common random numbers make the payoff difference tight;
    // both strikes sit near the ATM vega.
    const double v = vega(spec, iv_mid);
    report.skew_std_err = acc.diff.std_err() / (2.0 * bump * v);
    report.scaling_exponent = std::max(0.5 - effective_hurst(model), 0.0);
    const double scale = std::pow(spec.expiry, report.scaling_exponent);
    report.skew_scaled = report.skew_raw * scale;
    report.skew_scaled_std_err = report.skew_std_err * scale;
    return report;
}

DecompositionCheck decomposition_check_sabr(double sigma0, double alpha, Correlation rho,
                                            const OptionSpec& spec, const SimConfig& cfg) {
    if (spec.kind != OptionKind::european)
        throw std::invalid_argument("the decomposition check covers European calls");
    if (spec.t != 0.0) throw std::invalid_argument("decomposition check starts at t = 0");
    const VolModel model = SabrVol{sigma0, alpha};
    validate(model);

    const std::size_t group = paths_per_group(cfg);
    const std::size_t n = cfg.n_steps;
    const double T = spec.expiry;
    const double dt = T / static_cast<double>(n);
    const double k = spec.strike;

    auto acc = stream_paths<DecompAcc>(
        model, rho, spec, cfg, [&](const PathBatch& batch, DecompAcc& a) {
            const auto count = static_cast<std::size_t>(batch.terminal.size());
            std::vector<double> tail(n + 1);  // int_{t_i}^T sigma^2, trapezoid
            for (std::size_t p = 0; p < count; p += group) {
                double lhs = 0.0, rhs = 0.0;
                for (std::size_t m = 0; m < group; ++m) {
                    const auto c = static_cast<Eigen::Index>(p + m);
                    lhs += std::max(batch.terminal(c) - k, 0.0);

                    tail[n] = 0.0;
                    for (std::size_t i = n; i-- > 0;) {
                        const auto ii = static_cast<Eigen::Index>(i);
                        const double s0 = batch.sigma(ii, c);
                        const double s1 = batch.sigma(ii + 1, c);
                        tail[i] = tail[i + 1] + 0.5 * (s0 * s0 + s1 * s1) * dt;
                    }
                    const double v0 = std::sqrt(tail[0] / T);
                    double path_rhs = price_european(0.0, spec.spot, k, v0, T);

                    // correction integrand; the s = T node vanishes with the
                    // inner integral
                    double prev_f = 0.0;
                    double integral = 0.0;
                    for (std::size_t i = 0; i < n; ++i) {
                        const auto ii = static_cast<Eigen::Index>(i);
                        const double ti = batch.grid[i];
                        const double vi = std::sqrt(tail[i] / (T - ti));
                        const double inner = 2.0 * rho.rho * alpha * tail[i];
                        const double f =
                            h_kernel(ti, batch.spot(ii, c), k, vi, T) *
                            batch.sigma(ii, c) * inner;
                        if (i > 0) integral += 0.5 * (prev_f + f) * dt;
                        prev_f = f;
                    }
                    integral += 0.5 * prev_f * dt;  // last panel, f(T) = 0
                    path_rhs += integral;
                    rhs += path_rhs;
                }
                lhs /= static_cast<double>(group);
                rhs /= static_cast<double>(group);
                a.lhs.add(lhs);
                a.rhs.add(rhs);
                a.diff.add(lhs - rhs);
            }
        });

    DecompositionCheck out;
    out.lhs = acc.lhs.estimate();
    out.rhs = acc.rhs.estimate();
    out.difference = acc.diff.estimate();
    return out;
}

}  // namespace vollab
