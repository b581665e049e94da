#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "cptmag/cpt_model.hpp"
#include "cptmag/errors.hpp"
#include "cptmag/photon_stream.hpp"
#include "cptmag/posterior_grid.hpp"

namespace cptmag {

struct EstimateRecord {
    std::int64_t n = 0;         // interval index
    double t = 0.0;             // s
    double x_hat = 0.0;         // rad/s
    double posterior_sd = 0.0;  // rad/s (0 for estimators without a posterior)
    std::int64_t photons_seen = 0;
};

// Everything the estimators need about the generative model.
struct EstimatorParams {
    OuParams ou;
    CycleTiming timing;
    RateCalibration cal;
    CptLineshape shape;
    GridGeometry geom;

    double tau() const { return timing.update_interval; }
};

// Grid filter shared by the OU-Bayesian and simple-Bayesian estimators: the
// former convolves with the OU transition kernel before each Bayes update,
// the latter skips prediction entirely. The per-interval work is three linear
// passes over the grid (banded matvec fused with the likelihood, total, then
// normalize fused with the two moments), all on 64-byte-aligned arrays.
class BayesianGridFilter {
  public:
    BayesianGridFilter(const EstimatorParams& params, bool use_ou_kernel)
        : params_(params), use_kernel_(use_ou_kernel) {
        params.geom.validate();
        params.ou.validate();
        n_ = params.geom.n_bins;
        x0_ = params.geom.center(0);
        dx_ = params.geom.dx();
        if (use_kernel_) kernel_.build(params.geom, params.ou, params.tau());

        w_.reset(static_cast<std::size_t>(n_));
        scratch_.reset(static_cast<std::size_t>(n_));
        ybar_.reset(static_cast<std::size_t>(n_));
        expneg_.reset(static_cast<std::size_t>(n_));
        likbuf_.reset(static_cast<std::size_t>(n_));
        logybar_.reset(static_cast<std::size_t>(n_));
        stat_ = stationary_weights(params.geom, params.ou);

        for (int i = 0; i < n_; ++i) {
            const double yb = expected_count(params.geom.center(i), params.tau(), params.cal,
                                             params.shape);
            ybar_[static_cast<std::size_t>(i)] = yb;
            expneg_[static_cast<std::size_t>(i)] = std::exp(-yb);
            logybar_[static_cast<std::size_t>(i)] =
                yb > 0.0 ? std::log(yb) : -std::numeric_limits<double>::infinity();
        }
        reset();
    }

    // Restore the stationary prior (also the recovery state after underflow).
    void reset() {
        for (int i = 0; i < n_; ++i) w_[static_cast<std::size_t>(i)] = stat_[static_cast<std::size_t>(i)];
        finalize_moments_only();
        photons_ = 0;
    }

    // Consume one interval. Initialization intervals carry no likelihood --
    // the posterior is only propagated through them.
    void step(const CountRecord& rec) {
        if (!rec.in_init) photons_ += rec.y;

        const bool predict = use_kernel_ && !kernel_.is_identity();
        const double* lik = nullptr;
        if (!rec.in_init) lik = likelihood_for(rec.y);

        double* out = scratch_.data();
        if (predict) {
            kernel_.apply(w_.data(), out);
            if (lik != nullptr) {
                const double* l = lik;
#pragma omp simd
                for (int i = 0; i < n_; ++i) out[i] *= l[i];
            }
        } else {
            const double* src = w_.data();
            if (lik != nullptr) {
                const double* l = lik;
#pragma omp simd
                for (int i = 0; i < n_; ++i) out[i] = src[i] * l[i];
            } else {
                if (!moments_valid_) finalize_moments_only();
                return;  // simple filter, init interval: nothing changes
            }
        }

        double total = 0.0;
        const double* o = out;
#pragma omp simd reduction(+ : total) aligned(o : 64)
        for (int i = 0; i < n_; ++i) total += o[i];

        if (!(total > 0.0)) {
            // Every bin annihilated by the likelihood: recoverable — restart
            // from the stationary prior and count the event.
            ++underflow_resets_;
            const std::int64_t seen = photons_;
            reset();
            photons_ = seen;
            return;
        }

        const double inv = 1.0 / total;
        const double x0 = x0_, dx = dx_;
        double m1 = 0.0, m2 = 0.0;
        double* w = w_.data();
#pragma omp simd reduction(+ : m1, m2) aligned(w : 64)
        for (int i = 0; i < n_; ++i) {
            const double wi = o[i] * inv;
            w[i] = wi;
            const double x = x0 + dx * static_cast<double>(i);
            m1 += wi * x;
            m2 += wi * x * x;
        }
        mean_ = m1;
        sd_ = std::sqrt(std::max(0.0, m2 - m1 * m1));
        moments_valid_ = true;
    }

    double mean() const { return mean_; }
    double sd() const { return sd_; }
    std::int64_t photons_seen() const { return photons_; }
    int underflow_resets() const { return underflow_resets_; }

    PosteriorGrid posterior() const {
        PosteriorGrid g;
        g.geom = params_.geom;
        g.weights.assign(w_.data(), w_.data() + n_);
        return g;
    }

  private:
    const double* likelihood_for(std::int64_t y) {
        if (y < 0) throw DataError("filter: negative photon count");
        if (y == 0) return expneg_.data();
        double* l = likbuf_.data();
        const double* yb = ybar_.data();
        const double* en = expneg_.data();
        if (y <= 8) {
            for (int i = 0; i < n_; ++i) {
                double p = en[i];
                for (std::int64_t k = 0; k < y; ++k) p *= yb[i];
                l[i] = p;
            }
            return l;
        }
        const double* lyb = logybar_.data();
        double max_log = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < n_; ++i) {
            const double lg = static_cast<double>(y) * lyb[i] - yb[i];
            l[i] = lg;
            max_log = std::max(max_log, lg);
        }
        if (!std::isfinite(max_log)) {
            std::fill(l, l + n_, 0.0);
            return l;
        }
        for (int i = 0; i < n_; ++i) l[i] = std::isfinite(l[i]) ? std::exp(l[i] - max_log) : 0.0;
        return l;
    }

    void finalize_moments_only() {
        double m1 = 0.0, m2 = 0.0;
        for (int i = 0; i < n_; ++i) {
            const double x = x0_ + dx_ * static_cast<double>(i);
            m1 += w_[static_cast<std::size_t>(i)] * x;
            m2 += w_[static_cast<std::size_t>(i)] * x * x;
        }
        mean_ = m1;
        sd_ = std::sqrt(std::max(0.0, m2 - m1 * m1));
        moments_valid_ = true;
    }

    EstimatorParams params_;
    bool use_kernel_ = true;
    int n_ = 0;
    double x0_ = 0.0, dx_ = 0.0;
    TransitionKernel kernel_;
    detail::AlignedBuffer w_, scratch_, ybar_, expneg_, likbuf_, logybar_;
    std::vector<double> stat_;
    double mean_ = 0.0, sd_ = 0.0;
    bool moments_valid_ = false;
    std::int64_t photons_ = 0;
    int underflow_resets_ = 0;
};

// Sliding-window average-count inversion (Eq.-5-style estimator): accumulate
// counts over the trailing tau_a of live CPT time, convert to an average
// population, and invert the lineshape on the inner branch between the bias
// point and the dip bottom.
struct AvgCountConfig {
    double tau_a = 0.0;        // s; 0 = auto (1.4 tau_c)
    double branch_span = 2.0;  // inner branch reaches bias - span*W/2

    void validate() const {
        if (tau_a < 0.0) throw UsageError("avg-count: tau_a must be >= 0");
        if (!(branch_span > 0.0)) throw UsageError("avg-count: branch_span must be > 0");
    }
};

class AvgCountEstimator {
  public:
    AvgCountEstimator(const EstimatorParams& params, const AvgCountConfig& cfg)
        : params_(params) {
        cfg.validate();
        double tau_a = cfg.tau_a > 0.0 ? cfg.tau_a : 1.4 * params.ou.tau_c;
        tau_a = std::max(tau_a, params.tau());
        window_size_ = std::max<std::int64_t>(1, std::llround(tau_a / params.tau()));
        delta_max_ = 0.5 * cfg.branch_span * params.shape.fwhm;
        rho_min_ = rho_ee_lorentzian(0.0, params.shape);
        rho_far_ = rho_ee_lorentzian(delta_max_, params.shape);
    }

    void step(const CountRecord& rec) {
        if (rec.in_init) return;  // no live CPT time: window and estimate hold
        photons_ += rec.y;
        window_.push_back(rec.y);
        window_sum_ += rec.y;
        if (static_cast<std::int64_t>(window_.size()) > window_size_) {
            window_sum_ -= window_.front();
            window_.pop_front();
        }
        if (static_cast<std::int64_t>(window_.size()) == window_size_) x_hat_ = invert();
    }

    double estimate() const { return x_hat_; }
    std::int64_t photons_seen() const { return photons_; }
    std::int64_t window_size() const { return window_size_; }

  private:
    double invert() const {
        const double live_time = static_cast<double>(window_size_) * params_.tau();
        const double rho = static_cast<double>(window_sum_) /
                           (params_.cal.counts_per_pop_per_second * live_time);
        double delta;
        if (rho <= rho_min_) {
            delta = 0.0;  // at or below the dip bottom: clamp to x = bias
        } else if (rho >= rho_far_) {
            delta = delta_max_;  // beyond the far end of the branch
        } else {
            const double ratio = 1.0 - rho / params_.shape.background_pop;
            delta = 0.5 * params_.shape.fwhm * std::sqrt(params_.shape.contrast / ratio - 1.0);
            delta = std::min(delta, delta_max_);
        }
        return params_.cal.bias - delta;
    }

    EstimatorParams params_;
    std::int64_t window_size_ = 1;
    double delta_max_ = 0.0, rho_min_ = 0.0, rho_far_ = 0.0;
    std::deque<std::int64_t> window_;
    std::int64_t window_sum_ = 0;
    double x_hat_ = 0.0;
    std::int64_t photons_ = 0;
};

namespace detail {

template <typename Stepper, typename Mean, typename Sd, typename Photons>
std::vector<EstimateRecord> run_stream(const std::vector<CountRecord>& stream, Stepper&& step,
                                       Mean&& mean, Sd&& sd, Photons&& photons) {
    std::vector<EstimateRecord> out;
    out.reserve(stream.size());
    for (const auto& rec : stream) {
        step(rec);
        EstimateRecord est;
        est.n = rec.n;
        est.t = rec.t;
        est.x_hat = mean();
        est.posterior_sd = sd();
        est.photons_seen = photons();
        out.push_back(est);
    }
    return out;
}

}  // namespace detail

inline std::vector<EstimateRecord> run_ou_bayesian(const std::vector<CountRecord>& stream,
                                                   const EstimatorParams& params) {
    BayesianGridFilter f(params, /*use_ou_kernel=*/true);
    return detail::run_stream(
        stream, [&](const CountRecord& r) { f.step(r); }, [&] { return f.mean(); },
        [&] { return f.sd(); }, [&] { return f.photons_seen(); });
}

inline std::vector<EstimateRecord> run_simple_bayesian(const std::vector<CountRecord>& stream,
                                                       const EstimatorParams& params) {
    BayesianGridFilter f(params, /*use_ou_kernel=*/false);
    return detail::run_stream(
        stream, [&](const CountRecord& r) { f.step(r); }, [&] { return f.mean(); },
        [&] { return f.sd(); }, [&] { return f.photons_seen(); });
}

inline std::vector<EstimateRecord> run_avg_count(const std::vector<CountRecord>& stream,
                                                 const EstimatorParams& params,
                                                 const AvgCountConfig& cfg) {
    AvgCountEstimator est(params, cfg);
    return detail::run_stream(
        stream, [&](const CountRecord& r) { est.step(r); }, [&] { return est.estimate(); },
        [] { return 0.0; }, [&] { return est.photons_seen(); });
}

inline const std::vector<std::string>& estimate_csv_header() {
    static const std::vector<std::string> header = {"n", "t_seconds", "xhat_hz",
                                                    "posterior_sd_hz", "photons_seen"};
    return header;
}

inline void write_estimate_row(std::ostream& os, const EstimateRecord& rec) {
    os << rec.n << ',' << format_double(rec.t) << ',' << format_double(rad_to_hz(rec.x_hat))
       << ',' << format_double(rad_to_hz(rec.posterior_sd)) << ',' << rec.photons_seen << '\n';
}

inline void write_estimates(std::ostream& os, const std::vector<EstimateRecord>& records) {
    os << "n,t_seconds,xhat_hz,posterior_sd_hz,photons_seen\n";
    for (const auto& rec : records) write_estimate_row(os, rec);
}

inline std::vector<EstimateRecord> replay_estimates(std::istream& is, const std::string& name) {
    CsvReader reader(is, name, estimate_csv_header());
    if (!reader.had_header()) throw DataError(name + ": missing header");
    std::vector<EstimateRecord> out;
    std::vector<std::string_view> fields;
    while (reader.next_row(fields)) {
        EstimateRecord rec;
        const std::string where = reader.location();
        rec.n = parse_int(fields[0], where + ", column n");
        rec.t = parse_double(fields[1], where + ", column t_seconds");
        rec.x_hat = hz_to_rad(parse_double(fields[2], where + ", column xhat_hz"));
        rec.posterior_sd = hz_to_rad(parse_double(fields[3], where + ", column posterior_sd_hz"));
        rec.photons_seen = parse_int(fields[4], where + ", column photons_seen");
        out.push_back(rec);
    }
    return out;
}

}  // namespace cptmag
