#pragma once

#include <cmath>
#include <cstddef>

namespace vollab {

/// Monte Carlo statistic with its 95% confidence interval.
struct MCEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t n = 0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

/// Streaming mean/variance (Welford) with deterministic merge. Merging block
/// accumulators in fixed index order makes parallel runs bit-identical to
/// sequential ones.
class RunningMoments {
public:
    void add(double x) {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    void merge(const RunningMoments& other) {
        if (other.n_ == 0) return;
        if (n_ == 0) {
            *this = other;
            return;
        }
        const double na = static_cast<double>(n_);
        const double nb = static_cast<double>(other.n_);
        const double delta = other.mean_ - mean_;
        const double total = na + nb;
        mean_ += delta * nb / total;
        m2_ += other.m2_ + delta * delta * na * nb / total;
        n_ += other.n_;
    }

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const {
        return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
    }
    double std_err() const {
        return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
    }

    MCEstimate estimate() const {
        MCEstimate e;
        e.mean = mean();
        e.std_err = std_err();
        e.n = n_;
        e.ci_lo = e.mean - 1.96 * e.std_err;
        e.ci_hi = e.mean + 1.96 * e.std_err;
        return e;
    }

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace vollab
