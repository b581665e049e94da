#pragma once

#include <cmath>
#include <ostream>

#include "cptmag/csv.hpp"
#include "cptmag/errors.hpp"
#include "cptmag/gauss_hermite.hpp"
#include "cptmag/ou_process.hpp"
#include "cptmag/units.hpp"

namespace cptmag {

// Fast phenomenological CPT lineshape: a Lorentzian dip of full width at half
// maximum W and fractional contrast C on a flat background population.
struct CptLineshape {
    double fwhm = 0.0;            // W, rad/s
    double contrast = 0.0;        // C in [0, 1]; 0 gives a flat line
    double background_pop = 0.0;  // rho_bg in (0, 1]

    void validate() const {
        if (!(fwhm > 0.0)) throw UsageError("lineshape: fwhm must be > 0");
        if (contrast < 0.0 || contrast > 1.0)
            throw UsageError("lineshape: contrast must lie in [0, 1]");
        if (!(background_pop > 0.0) || background_pop > 1.0)
            throw UsageError("lineshape: background_pop must lie in (0, 1]");
    }
};

// rho_ee(Delta) = rho_bg [1 - C W^2 / (W^2 + 4 Delta^2)]; even, minimum
// rho_bg(1-C) at Delta = 0, approaching rho_bg far from resonance.
inline double rho_ee_lorentzian(double delta, const CptLineshape& shape) {
    const double w2 = shape.fwhm * shape.fwhm;
    return shape.background_pop * (1.0 - shape.contrast * w2 / (w2 + 4.0 * delta * delta));
}

// d rho_ee / d Delta, used by the information bound.
inline double drho_ee_ddelta(double delta, const CptLineshape& shape) {
    const double w2 = shape.fwhm * shape.fwhm;
    const double den = w2 + 4.0 * delta * delta;
    return shape.background_pop * shape.contrast * w2 * 8.0 * delta / (den * den);
}

// Count-rate scale: detected rate R(x) = k rho_ee(bias - x).
struct RateCalibration {
    double counts_per_pop_per_second = 0.0;  // k
    double bias = 0.0;                       // rad/s
    double mean_rate_target = 0.0;           // s^-1
};

// Choose k so that the stationary-field average of R(x) equals the target
// rate: k = target / E_{x ~ N(0, sigma^2)}[rho_ee(bias - x)], the expectation
// taken by Gauss-Hermite quadrature.
inline RateCalibration calibrate_rate(const CptLineshape& shape, double bias, const OuParams& ou,
                                      double mean_rate_target, std::size_t quad_nodes = 96) {
    shape.validate();
    if (!(mean_rate_target > 0.0)) throw UsageError("calibration: mean rate target must be > 0");
    if (ou.sigma < 0.0) throw UsageError("calibration: sigma must be >= 0");
    if (quad_nodes < 64) quad_nodes = 64;

    const auto rule = gauss_hermite(quad_nodes);
    const double mean_pop = expect_gaussian(
        [&](double x) { return rho_ee_lorentzian(bias - x, shape); }, 0.0, ou.sigma, rule);
    RateCalibration cal;
    cal.counts_per_pop_per_second = mean_rate_target / mean_pop;
    cal.bias = bias;
    cal.mean_rate_target = mean_rate_target;
    return cal;
}

// Mean photon count in an interval of length tau when the field shift is x.
inline double expected_count(double x, double tau, const RateCalibration& cal,
                             const CptLineshape& shape) {
    return cal.counts_per_pop_per_second * tau * rho_ee_lorentzian(cal.bias - x, shape);
}

// d ybar / dx = -k tau rho_ee'(bias - x).
inline double expected_count_derivative(double x, double tau, const RateCalibration& cal,
                                        const CptLineshape& shape) {
    return -cal.counts_per_pop_per_second * tau * drho_ee_ddelta(cal.bias - x, shape);
}

// Plot-ready dip scan: uniform detuning grid, `delta_hz,rho_ee` rows.
inline void write_lineshape_csv(std::ostream& os, const CptLineshape& shape, double delta_min,
                                double delta_max, int n_points) {
    shape.validate();
    if (n_points < 2) throw UsageError("lineshape scan: need at least 2 points");
    if (!(delta_max > delta_min)) throw UsageError("lineshape scan: empty detuning range");
    os << "delta_hz,rho_ee\n";
    const double step = (delta_max - delta_min) / (n_points - 1);
    for (int i = 0; i < n_points; ++i) {
        const double delta = delta_min + step * i;
        os << format_double(rad_to_hz(delta)) << ','
           << format_double(rho_ee_lorentzian(delta, shape)) << '\n';
    }
}

}  // namespace cptmag
