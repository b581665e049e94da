#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

#include "cptmag/cpt_model.hpp"
#include "cptmag/csv.hpp"
#include "cptmag/errors.hpp"
#include "cptmag/gauss_hermite.hpp"
#include "cptmag/ou_process.hpp"

namespace cptmag {

// Poisson Fisher information of one update interval about the field shift x:
// I(x) = (d ybar/dx)^2 / ybar. Zero wherever the count rate is stationary in
// x (dip bottom relative to the bias, far wings, flat lineshape).
inline double fisher_information(double x, double tau, const RateCalibration& cal,
                                 const CptLineshape& shape) {
    const double ybar = expected_count(x, tau, cal, shape);
    const double dydx = expected_count_derivative(x, tau, cal, shape);
    if (!(ybar > 0.0)) return 0.0;  // dydx vanishes faster than ybar at the zero
    return dydx * dydx / ybar;
}

// Fisher information sampled on a grid of x values.
struct FisherProfile {
    std::vector<double> x;            // rad/s
    std::vector<double> information;  // 1/(rad/s)^2
};

inline FisherProfile fisher_profile(const std::vector<double>& x_values, double tau,
                                    const RateCalibration& cal, const CptLineshape& shape) {
    FisherProfile prof;
    prof.x = x_values;
    prof.information.reserve(x_values.size());
    for (double x : x_values) prof.information.push_back(fisher_information(x, tau, cal, shape));
    return prof;
}

struct CrlbResult {
    double steady_state_info = 0.0;   // J_inf, 1/(rad/s)^2
    double bound_variance = 0.0;      // 1/J_inf, (rad/s)^2
    double bound_over_sigma2 = 0.0;   // dimensionless
    std::int64_t iterations = 0;
    double mean_information = 0.0;    // Ibar, 1/(rad/s)^2
};

// Recursive Bayesian (posterior) CRLB for the OU-driven Poisson filtering
// problem: J_{n+1} = [a^2/J_n + q]^{-1} + Ibar with a = e^{-tau/tau_c},
// q = sigma^2 (1 - a^2), J_0 = 1/sigma^2, and Ibar the stationary-field
// average of the per-interval Fisher information (Gauss-Hermite). The
// sequence is monotone increasing from J_0 and converges geometrically; the
// static-parameter limit (a -> 1, q -> 0) accumulates information without
// bound, which is detected and reported as bound -> 0.
inline CrlbResult bayesian_crlb(const OuParams& ou, double tau, const RateCalibration& cal,
                                const CptLineshape& shape, std::size_t quad_nodes = 96) {
    ou.validate();
    if (!(tau > 0.0)) throw UsageError("crlb: tau must be > 0");
    if (quad_nodes < 16) quad_nodes = 16;

    const auto rule = gauss_hermite(quad_nodes);
    const double ibar = expect_gaussian(
        [&](double x) { return fisher_information(x, tau, cal, shape); }, ou.mean, ou.sigma, rule);

    const double a = std::exp(-tau / ou.tau_c);
    const double a2 = a * a;
    const double q = ou.sigma * ou.sigma * (-std::expm1(-2.0 * tau / ou.tau_c));
    const double sigma2 = ou.sigma * ou.sigma;

    CrlbResult res;
    res.mean_information = ibar;

    if (!(q > 0.0)) {
        // Static-parameter limit: information accumulates forever.
        res.steady_state_info = std::numeric_limits<double>::infinity();
        res.bound_variance = 0.0;
        res.bound_over_sigma2 = 0.0;
        res.iterations = 0;
        return res;
    }

    double j = 1.0 / sigma2;
    const std::int64_t max_iter = 1000000;
    for (std::int64_t it = 1; it <= max_iter; ++it) {
        const double j_next = 1.0 / (a2 / j + q) + ibar;
        const double rel = std::abs(j_next - j) / j;
        j = j_next;
        if (rel < 1e-10) {
            res.steady_state_info = j;
            res.bound_variance = 1.0 / j;
            res.bound_over_sigma2 = res.bound_variance / sigma2;
            res.iterations = it;
            return res;
        }
    }
    throw ConvergenceError("crlb: recursion did not converge within 1e6 iterations");
}

inline void write_crlb_csv(std::ostream& os,
                           const std::vector<std::pair<double, double>>& tauc_bound) {
    os << "tau_c_s,bound_over_sigma2\n";
    for (const auto& [tc, b] : tauc_bound)
        os << format_double(tc) << ',' << format_double(b) << '\n';
}

}  // namespace cptmag
