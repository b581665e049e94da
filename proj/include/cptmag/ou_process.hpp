#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "cptmag/errors.hpp"
#include "cptmag/rng.hpp"

namespace cptmag {

// Hidden-field model: Ornstein-Uhlenbeck process for the frequency shift x(t)
// with stationary sd sigma (rad/s), correlation time tau_c (s) and
// autocorrelation R(t) = sigma^2 exp(-|t|/tau_c).
struct OuParams {
    double sigma = 0.0;   // rad/s
    double tau_c = 0.0;   // s
    double mean = 0.0;    // rad/s; 0 for every experiment reproduced here

    void validate() const {
        if (!(sigma > 0.0)) throw UsageError("ou: sigma must be > 0");
        if (!(tau_c > 0.0)) throw UsageError("ou: tau_c must be > 0");
    }
};

struct OuTransition {
    double mean;      // rad/s
    double variance;  // (rad/s)^2
};

// Exact one-step transition (no Euler discretization): conditional law of
// x(t+dt) given x(t) is N(mean, variance) below. Holds for any dt >= 0.
inline OuTransition ou_transition(double x_prev, double dt, const OuParams& p) {
    const double decay = std::exp(-dt / p.tau_c);
    // 1 - exp(-2dt/tau_c) via expm1 to keep precision at small dt.
    const double var = p.sigma * p.sigma * (-std::expm1(-2.0 * dt / p.tau_c));
    return {p.mean + (x_prev - p.mean) * decay, var};
}

struct OuTrajectory {
    double dt = 0.0;              // s
    std::vector<double> samples;  // rad/s
    std::uint64_t seed = 0;
};

// x_1 ~ stationary N(mean, sigma^2); each subsequent point from the exact
// transition. Deterministic for a given seed.
inline OuTrajectory generate_trajectory(const OuParams& p, double dt, std::size_t n_steps,
                                        std::uint64_t seed) {
    p.validate();
    if (!(dt > 0.0)) throw UsageError("ou: dt must be > 0");
    if (n_steps < 1) throw UsageError("ou: n_steps must be >= 1");

    OuTrajectory traj;
    traj.dt = dt;
    traj.seed = seed;
    traj.samples.resize(n_steps);

    auto eng = make_engine(seed);
    std::normal_distribution<double> unit(0.0, 1.0);

    const double a = std::exp(-dt / p.tau_c);
    const double s = p.sigma * std::sqrt(-std::expm1(-2.0 * dt / p.tau_c));

    double x = p.mean + p.sigma * unit(eng);
    traj.samples[0] = x;
    for (std::size_t n = 1; n < n_steps; ++n) {
        x = p.mean + (x - p.mean) * a + s * unit(eng);
        traj.samples[n] = x;
    }
    return traj;
}

struct AutocorrFit {
    double sigma_hat = 0.0;   // rad/s
    double tau_c_hat = 0.0;   // s
    double residual = 0.0;    // RMS residual of the log-domain fit
    bool poorly_resolved = false;  // tau_c at or below one sample step
};

// Recover (sigma, tau_c) from a trajectory via the empirical autocorrelation.
// Lags are accumulated until R(k) falls below e^-2 R(0) (or turns non-positive,
// or k reaches N/10). tau_c is first located by the 1/e crossing, then both
// parameters come from a least-squares line through log R(k) over lags up to
// 2*tau_c_hat. Errors out when the autocorrelation cannot support a fit.
inline AutocorrFit fit_autocorrelation(const OuTrajectory& traj) {
    const auto& x = traj.samples;
    const std::size_t n = x.size();
    if (n < 10) throw DataError("autocorrelation fit: trajectory too short (< 10 samples)");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    double r0 = 0.0;
    for (double v : x) r0 += (v - mean) * (v - mean);
    r0 /= static_cast<double>(n);
    if (!(r0 > 0.0)) throw DataError("autocorrelation fit: degenerate trajectory (zero variance)");

    const double stop_level = std::exp(-2.0) * r0;
    const double e_level = std::exp(-1.0) * r0;
    const std::size_t k_max = std::max<std::size_t>(2, n / 10);

    auto lag_corr = [&](std::size_t k) {
        double acc = 0.0;
        for (std::size_t i = k; i < n; ++i) acc += (x[i] - mean) * (x[i - k] - mean);
        return acc / static_cast<double>(n);
    };

    // Correlation already collapsed at one step: the process is unresolved at
    // this sample rate (white-noise-like). Report tau_c_hat <= dt and flag it
    // rather than erroring -- the trajectory is not "too short", the field is
    // just faster than the sampling.
    const double r1 = lag_corr(1);
    if (!(r1 > stop_level)) {
        AutocorrFit fit;
        fit.sigma_hat = std::sqrt(r0);
        fit.tau_c_hat = (r1 > 0.0) ? std::min(traj.dt, -traj.dt / std::log(r1 / r0)) : 0.0;
        fit.residual = 1.0;
        fit.poorly_resolved = true;
        return fit;
    }

    std::vector<double> r;  // r[k-1] = R(k)
    r.reserve(256);
    r.push_back(r1);
    std::size_t e_cross = (r1 < e_level) ? 1 : 0;  // first lag with R(k) < e^-1 R(0)
    for (std::size_t k = 2; e_cross == 0 || r.back() >= stop_level; ++k) {
        if (k > k_max) {
            if (e_cross == 0)
                throw DataError("autocorrelation fit: no 1/e crossing within N/10 lags");
            break;
        }
        const double acc = lag_corr(k);
        if (acc <= 0.0) {
            if (e_cross == 0)
                throw DataError(
                    "autocorrelation fit: autocorrelation non-positive before the 1/e "
                    "crossing (trajectory too short for tau_c)");
            break;
        }
        r.push_back(acc);
        if (e_cross == 0 && acc < e_level) e_cross = k;
    }

    const double tau0 = static_cast<double>(e_cross) * traj.dt;

    // Weighted least squares on log R(k) for k*dt <= 2*tau0, including k=0.
    // Weights R(k)^2 are the inverse-variance weights for log of a noisy
    // positive quantity whose absolute noise level is roughly lag-independent;
    // they stop the noisy tail lags from tilting the slope.
    const std::size_t k_fit =
        std::min(r.size(), static_cast<std::size_t>(std::ceil(2.0 * tau0 / traj.dt)));
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t m = 0;
    auto add = [&](double t, double rk) {
        const double w = rk * rk, logr = std::log(rk);
        sw += w; sx += w * t; sy += w * logr; sxx += w * t * t; sxy += w * t * logr;
        ++m;
    };
    add(0.0, r0);
    for (std::size_t k = 1; k <= k_fit; ++k) add(static_cast<double>(k) * traj.dt, r[k - 1]);

    const double denom = sw * sxx - sx * sx;
    AutocorrFit fit;
    if (m < 4 || !(denom > 0.0)) {
        // Not enough lags to resolve tau_c: report the crossing scale and flag.
        fit.tau_c_hat = std::min(tau0, traj.dt);
        fit.sigma_hat = std::sqrt(r0);
        fit.residual = 1.0;
        fit.poorly_resolved = true;
        return fit;
    }
    const double slope = (sw * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / sw;
    if (!(slope < 0.0))
        throw DataError("autocorrelation fit: non-decaying autocorrelation");

    fit.tau_c_hat = -1.0 / slope;
    fit.sigma_hat = std::exp(0.5 * intercept);
    double ss = 0.0;
    std::size_t cnt = 0;
    auto res = [&](double t, double rk) {
        const double d = std::log(rk) - (intercept + slope * t);
        ss += d * d;
        ++cnt;
    };
    res(0.0, r0);
    for (std::size_t k = 1; k <= k_fit; ++k) res(static_cast<double>(k) * traj.dt, r[k - 1]);
    fit.residual = std::sqrt(ss / static_cast<double>(cnt));
    fit.poorly_resolved = (fit.tau_c_hat < traj.dt) || (m < 4);
    return fit;
}

}  // namespace cptmag
