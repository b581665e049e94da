#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <memory>
#include <vector>

#include "cptmag/cpt_model.hpp"
#include "cptmag/errors.hpp"
#include "cptmag/ou_process.hpp"

namespace cptmag {

namespace detail {

// 64-byte-aligned buffer of doubles (cache-line / AVX-512 friendly).
class AlignedBuffer {
  public:
    AlignedBuffer() = default;
    explicit AlignedBuffer(std::size_t count) { reset(count); }

    void reset(std::size_t count) {
        std::size_t bytes = count * sizeof(double);
        bytes = (bytes + 63) / 64 * 64;
        void* raw = std::aligned_alloc(64, bytes == 0 ? 64 : bytes);
        if (raw == nullptr) throw std::bad_alloc();
        std::memset(raw, 0, bytes == 0 ? 64 : bytes);
        ptr_.reset(static_cast<double*>(raw));
        size_ = count;
    }

    double* data() { return ptr_.get(); }
    const double* data() const { return ptr_.get(); }
    double& operator[](std::size_t i) { return ptr_.get()[i]; }
    double operator[](std::size_t i) const { return ptr_.get()[i]; }
    std::size_t size() const { return size_; }

  private:
    struct Free {
        void operator()(double* p) const { std::free(p); }
    };
    std::unique_ptr<double, Free> ptr_;
    std::size_t size_ = 0;
};

inline double normal_cdf(double z) { return 0.5 * (1.0 + std::erf(z / std::sqrt(2.0))); }

}  // namespace detail

// Uniform grid over [x_min, x_max]; bin i covers [edge(i), edge(i+1)] with
// center(i) at the midpoint.
struct GridGeometry {
    double x_min = 0.0;  // rad/s
    double x_max = 0.0;  // rad/s
    int n_bins = 0;

    void validate() const {
        if (n_bins < 2) throw UsageError("grid: need at least 2 bins");
        if (!(x_max > x_min)) throw UsageError("grid: x_max must exceed x_min");
    }

    double dx() const { return (x_max - x_min) / n_bins; }
    double edge(int i) const { return x_min + i * dx(); }
    double center(int i) const { return x_min + (i + 0.5) * dx(); }
};

inline GridGeometry make_grid_geometry(const OuParams& ou, int n_bins, double half_width_sigmas) {
    GridGeometry geom;
    geom.x_min = ou.mean - half_width_sigmas * ou.sigma;
    geom.x_max = ou.mean + half_width_sigmas * ou.sigma;
    geom.n_bins = n_bins;
    geom.validate();
    return geom;
}

// Posterior over the field shift: probability mass per bin.
struct PosteriorGrid {
    GridGeometry geom;
    std::vector<double> weights;

    double total() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }

    void normalize() {
        const double s = total();
        if (!(s > 0.0)) throw DataError("posterior: cannot normalize zero mass");
        const double inv = 1.0 / s;
        for (double& w : weights) w *= inv;
    }

    double mean() const {
        double m = 0.0;
        for (int i = 0; i < geom.n_bins; ++i) m += geom.center(i) * weights[static_cast<std::size_t>(i)];
        return m;
    }

    double variance() const {
        const double m = mean();
        double v = 0.0;
        for (int i = 0; i < geom.n_bins; ++i) {
            const double d = geom.center(i) - m;
            v += d * d * weights[static_cast<std::size_t>(i)];
        }
        return v;
    }

    double sd() const { return std::sqrt(std::max(0.0, variance())); }
};

inline PosteriorGrid make_uniform_grid(const GridGeometry& geom) {
    geom.validate();
    PosteriorGrid g;
    g.geom = geom;
    g.weights.assign(static_cast<std::size_t>(geom.n_bins), 1.0 / geom.n_bins);
    return g;
}

// Bin masses of N(mean, sigma^2) (exact bin integrals, renormalized so the
// truncation to the grid support carries no missing mass).
inline std::vector<double> stationary_weights(const GridGeometry& geom, const OuParams& ou) {
    std::vector<double> w(static_cast<std::size_t>(geom.n_bins));
    for (int i = 0; i < geom.n_bins; ++i) {
        const double lo = (geom.edge(i) - ou.mean) / ou.sigma;
        const double hi = (geom.edge(i + 1) - ou.mean) / ou.sigma;
        w[static_cast<std::size_t>(i)] = detail::normal_cdf(hi) - detail::normal_cdf(lo);
    }
    double s = 0.0;
    for (double v : w) s += v;
    for (double& v : w) v /= s;
    return w;
}

inline PosteriorGrid make_stationary_grid(const GridGeometry& geom, const OuParams& ou) {
    geom.validate();
    PosteriorGrid g;
    g.geom = geom;
    g.weights = stationary_weights(geom, ou);
    return g;
}

// Banded, column-normalized discretization of the OU transition over one
// fixed time step. Column j holds the destination-bin masses of
// N(mean + (x_j - mean) a, sigma^2 (1 - a^2)); storage is row-major so the
// per-update matvec walks each row's contiguous segment:
//   out[i] = sum_b K[i][b] * w[first_col[i] + b].
// Every column sums to exactly 1 (mass conservation; probability leaving the
// grid is folded back into the column's surviving bins, i.e. clamped at the
// edges).
class TransitionKernel {
  public:
    TransitionKernel() = default;

    TransitionKernel(const GridGeometry& geom, const OuParams& ou, double dt) {
        build(geom, ou, dt);
    }

    void build(const GridGeometry& geom, const OuParams& ou, double dt) {
        geom.validate();
        ou.validate();
        if (dt < 0.0) throw UsageError("transition kernel: dt must be >= 0");
        geom_ = geom;
        n_ = geom.n_bins;
        decay_ = std::exp(-dt / ou.tau_c);
        step_sd_ = ou.sigma * std::sqrt(std::max(0.0, -std::expm1(-2.0 * dt / ou.tau_c)));
        identity_ = (dt == 0.0);
        if (identity_) {
            band_ = 0;
            stride_ = 0;
            return;
        }

        const double dx = geom.dx();
        const double cut = 6.0;  // kernel support: +-6 kernel sd
        int band;
        if (step_sd_ < 1e-8 * dx) {
            band = 8;  // (nearly) deterministic drift: linear two-bin split
        } else {
            const double reach = 2.0 * cut * step_sd_ / (dx * std::max(decay_, 1e-300)) + 2.0;
            band = reach >= static_cast<double>(n_) ? n_ : static_cast<int>(std::ceil(reach));
        }
        band = std::min(band, n_);
        band_ = (band + 7) / 8 * 8;
        if (band_ > n_) band_ = n_;
        stride_ = (band_ + 7) / 8 * 8;

        first_col_.assign(static_cast<std::size_t>(n_), 0);
        data_.reset(static_cast<std::size_t>(n_) * static_cast<std::size_t>(stride_));

        // Row windows: row i receives from sources centered near x_i / a.
        for (int i = 0; i < n_; ++i) {
            const double src = ou.mean + (geom.center(i) - ou.mean) / std::max(decay_, 1e-300);
            int jc = static_cast<int>(std::floor((src - geom.x_min) / dx));
            int jl = jc - band_ / 2;
            jl = std::max(0, std::min(jl, n_ - band_));
            first_col_[static_cast<std::size_t>(i)] = jl;
        }

        // Fill entries K[i][j] = P(dest bin i | source bin j), then normalize
        // per column.
        std::vector<double> colsum(static_cast<std::size_t>(n_), 0.0);
        const bool degenerate = step_sd_ < 1e-8 * dx;
        for (int i = 0; i < n_; ++i) {
            double* row = data_.data() + static_cast<std::size_t>(i) * stride_;
            const int jl = first_col_[static_cast<std::size_t>(i)];
            for (int b = 0; b < band_; ++b) {
                const int j = jl + b;
                const double mu = ou.mean + (geom.center(j) - ou.mean) * decay_;
                double mass;
                if (degenerate) {
                    // Split the point mass at mu linearly between the two bins
                    // whose centers bracket it (exactly preserves the mean),
                    // clamping at the grid edges.
                    const double pos = (mu - geom.x_min) / dx - 0.5;
                    const int i0 = static_cast<int>(std::floor(pos));
                    const double frac = pos - std::floor(pos);
                    if (i0 < 0)
                        mass = (i == 0) ? 1.0 : 0.0;
                    else if (i0 >= n_ - 1)
                        mass = (i == n_ - 1) ? 1.0 : 0.0;
                    else
                        mass = (i == i0) ? 1.0 - frac : (i == i0 + 1) ? frac : 0.0;
                } else {
                    const double lo = (geom.edge(i) - mu) / step_sd_;
                    const double hi = (geom.edge(i + 1) - mu) / step_sd_;
                    mass = detail::normal_cdf(hi) - detail::normal_cdf(lo);
                }
                row[b] = mass;
                colsum[static_cast<std::size_t>(j)] += mass;
            }
        }
        for (int i = 0; i < n_; ++i) {
            double* row = data_.data() + static_cast<std::size_t>(i) * stride_;
            const int jl = first_col_[static_cast<std::size_t>(i)];
            for (int b = 0; b < band_; ++b) {
                const double cs = colsum[static_cast<std::size_t>(jl + b)];
                if (cs > 0.0) row[b] /= cs;
            }
        }
    }

    bool is_identity() const { return identity_; }
    int n_bins() const { return n_; }
    int band() const { return band_; }
    double decay() const { return decay_; }
    double step_sd() const { return step_sd_; }

    // out[i] = sum_j K[i][j] in[j]; in and out must hold n_bins() doubles and
    // must not alias. 64-byte-aligned rows let the compiler keep the inner dot
    // product fully vectorized.
    void apply(const double* in, double* out) const {
        if (identity_) {
            std::memcpy(out, in, static_cast<std::size_t>(n_) * sizeof(double));
            return;
        }
        const int band = band_;
        for (int i = 0; i < n_; ++i) {
            const double* kr = data_.data() + static_cast<std::size_t>(i) * stride_;
            const double* src = in + first_col_[static_cast<std::size_t>(i)];
            double acc = 0.0;
#pragma omp simd reduction(+ : acc) aligned(kr : 64)
            for (int b = 0; b < band; ++b) acc += kr[b] * src[b];
            out[i] = acc;
        }
    }

  private:
    GridGeometry geom_{};
    int n_ = 0;
    int band_ = 0;
    int stride_ = 0;
    double decay_ = 1.0;
    double step_sd_ = 0.0;
    bool identity_ = true;
    std::vector<int> first_col_;
    detail::AlignedBuffer data_;
};

// Reference (allocating) form of the OU prediction step.
inline PosteriorGrid ou_predict(const PosteriorGrid& grid, double dt, const OuParams& ou) {
    TransitionKernel kernel(grid.geom, ou, dt);
    PosteriorGrid out;
    out.geom = grid.geom;
    out.weights.assign(grid.weights.size(), 0.0);
    kernel.apply(grid.weights.data(), out.weights.data());
    out.normalize();
    return out;
}

// Poisson-likelihood weight per bin for observed count y: ybar^y e^{-ybar}
// up to the bin-independent 1/y! factor. Small counts use direct powers; large
// counts switch to log space so the update never underflows to all-zero just
// from dynamic range.
inline void poisson_likelihood(const std::vector<double>& ybar, std::int64_t y,
                               std::vector<double>& lik) {
    const std::size_t n = ybar.size();
    lik.resize(n);
    if (y < 0) throw DataError("poisson likelihood: negative count");
    if (y <= 8) {
        for (std::size_t i = 0; i < n; ++i) {
            double p = std::exp(-ybar[i]);
            for (std::int64_t k = 0; k < y; ++k) p *= ybar[i];
            lik[i] = p;
        }
        return;
    }
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> lg(n);
    for (std::size_t i = 0; i < n; ++i) {
        lg[i] = ybar[i] > 0.0 ? static_cast<double>(y) * std::log(ybar[i]) - ybar[i]
                              : -std::numeric_limits<double>::infinity();
        max_log = std::max(max_log, lg[i]);
    }
    if (!std::isfinite(max_log)) {
        std::fill(lik.begin(), lik.end(), 0.0);
        return;
    }
    for (std::size_t i = 0; i < n; ++i)
        lik[i] = std::isfinite(lg[i]) ? std::exp(lg[i] - max_log) : 0.0;
}

// Reference Bayes update. Returns false (grid untouched) when every bin's
// posterior mass underflows to zero — the caller decides how to recover.
inline bool bayes_update(PosteriorGrid& grid, std::int64_t y, double tau,
                         const RateCalibration& cal, const CptLineshape& shape) {
    const std::size_t n = grid.weights.size();
    std::vector<double> ybar(n);
    for (int i = 0; i < grid.geom.n_bins; ++i)
        ybar[static_cast<std::size_t>(i)] = expected_count(grid.geom.center(i), tau, cal, shape);
    std::vector<double> lik;
    poisson_likelihood(ybar, y, lik);
    std::vector<double> updated(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        updated[i] = grid.weights[i] * lik[i];
        total += updated[i];
    }
    if (!(total > 0.0)) return false;
    const double inv = 1.0 / total;
    for (std::size_t i = 0; i < n; ++i) grid.weights[i] = updated[i] * inv;
    return true;
}

}  // namespace cptmag
