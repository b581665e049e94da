#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "cptmag/errors.hpp"

namespace cptmag {

// Gauss-Hermite rule (weight e^{-t^2} on the real line), nodes ascending.
struct GaussHermiteRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch: eigen-decompose the symmetric tridiagonal Jacobi matrix of the
// (physicists') Hermite recurrence. Nodes are the eigenvalues; weight i is
// mu0 * (first eigenvector component)^2 with mu0 = sqrt(pi).
inline GaussHermiteRule gauss_hermite(std::size_t n) {
    if (n < 1) throw UsageError("gauss_hermite: need at least one node");

    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                                   static_cast<Eigen::Index>(n));
    for (std::size_t k = 1; k < n; ++k) {
        const double b = std::sqrt(static_cast<double>(k) / 2.0);
        jacobi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = b;
        jacobi(static_cast<Eigen::Index>(k - 1), static_cast<Eigen::Index>(k)) = b;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
    if (solver.info() != Eigen::Success)
        throw ConvergenceError("gauss_hermite: eigen decomposition failed");

    const double mu0 = std::sqrt(std::acos(-1.0));
    GaussHermiteRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rule.nodes[i] = solver.eigenvalues()(static_cast<Eigen::Index>(i));
        const double v0 = solver.eigenvectors()(0, static_cast<Eigen::Index>(i));
        rule.weights[i] = mu0 * v0 * v0;
    }
    return rule;
}

// E[f(X)] for X ~ N(mean, sd^2), via the substitution x = mean + sqrt(2) sd t.
template <typename F>
double expect_gaussian(F&& f, double mean, double sd, const GaussHermiteRule& rule) {
    const double inv_sqrt_pi = 1.0 / std::sqrt(std::acos(-1.0));
    const double scale = std::sqrt(2.0) * sd;
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        acc += rule.weights[i] * f(mean + scale * rule.nodes[i]);
    return acc * inv_sqrt_pi;
}

}  // namespace cptmag
