#include "vollab/quadrature.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace vollab::quad {

namespace {

// Golub-Welsch: eigenvalues of the symmetric tridiagonal recurrence matrix
// are the nodes, weights are mu0 times the squared first eigenvector entry.
GaussRule golub_welsch(const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag, double mu0) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("quadrature: tridiagonal eigensolve failed");

    const auto n = diag.size();
    GaussRule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        rule.nodes[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
        const double v0 = es.eigenvectors()(0, i);
        rule.weights[static_cast<std::size_t>(i)] = mu0 * v0 * v0;
    }
    return rule;
}

}  // namespace

GaussRule gauss_legendre(std::size_t n) { return gauss_jacobi(n, 0.0, 0.0); }

GaussRule gauss_jacobi(std::size_t n, double alpha, double beta) {
    if (n == 0) throw std::invalid_argument("gauss_jacobi: n must be positive");
    if (alpha <= -1.0 || beta <= -1.0)
        throw std::invalid_argument("gauss_jacobi: alpha, beta must exceed -1");

    const double ab = alpha + beta;
    Eigen::VectorXd diag(static_cast<Eigen::Index>(n));
    Eigen::VectorXd subdiag(static_cast<Eigen::Index>(n) - 1);

    diag(0) = (beta - alpha) / (ab + 2.0);
    for (std::size_t k = 1; k < n; ++k) {
        const double two_k = 2.0 * static_cast<double>(k);
        diag(static_cast<Eigen::Index>(k)) =
            (beta * beta - alpha * alpha) / ((two_k + ab) * (two_k + ab + 2.0));
        const double kk = static_cast<double>(k);
        const double b2 = 4.0 * kk * (kk + alpha) * (kk + beta) * (kk + ab) /
                          ((two_k + ab) * (two_k + ab) * (two_k + ab + 1.0) * (two_k + ab - 1.0));
        subdiag(static_cast<Eigen::Index>(k) - 1) = std::sqrt(b2);
    }

    // mu0 = 2^{a+b+1} B(a+1, b+1)
    const double log_mu0 = (ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                           std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0);
    return golub_welsch(diag, subdiag, std::exp(log_mu0));
}

GaussRule gauss_hermite(std::size_t n) {
    if (n == 0) throw std::invalid_argument("gauss_hermite: n must be positive");
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd subdiag(static_cast<Eigen::Index>(n) - 1);
    for (std::size_t k = 1; k < n; ++k)
        subdiag(static_cast<Eigen::Index>(k) - 1) = std::sqrt(0.5 * static_cast<double>(k));
    return golub_welsch(diag, subdiag, std::sqrt(M_PI));
}

}  // namespace vollab::quad
