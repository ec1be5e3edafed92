#pragma once

#include <cstddef>
#include <vector>

namespace vollab::quad {

/// Nodes and weights of an N-point Gaussian rule on its natural interval.
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    /// Integrate f over [a, b] after an affine map from [-1, 1].
    /// Only meaningful for rules built on [-1, 1].
    template <typename F>
    double integrate(F&& f, double a, double b) const {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        double acc = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i)
            acc += weights[i] * f(mid + half * nodes[i]);
        return half * acc;
    }
};

/// Gauss-Legendre rule on [-1, 1].
GaussRule gauss_legendre(std::size_t n);

/// Gauss-Jacobi rule on [-1, 1] for the weight (1-x)^alpha (1+x)^beta,
/// alpha, beta > -1. The weight is absorbed into the quadrature weights.
GaussRule gauss_jacobi(std::size_t n, double alpha, double beta);

/// Gauss-Hermite rule on (-inf, inf) for the weight exp(-x^2).
GaussRule gauss_hermite(std::size_t n);

}  // namespace vollab::quad
