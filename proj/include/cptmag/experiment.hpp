#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "cptmag/bounds.hpp"
#include "cptmag/config.hpp"
#include "cptmag/cpt_model.hpp"
#include "cptmag/csv.hpp"
#include "cptmag/errors.hpp"
#include "cptmag/estimators.hpp"
#include "cptmag/lindblad.hpp"
#include "cptmag/ou_process.hpp"
#include "cptmag/photon_stream.hpp"
#include "cptmag/rng.hpp"
#include "cptmag/units.hpp"

namespace cptmag {

enum class EstimatorKind { OuBayesian, SimpleBayesian, AvgCount };

inline const char* estimator_name(EstimatorKind k) {
    switch (k) {
        case EstimatorKind::OuBayesian: return "ou-bayesian";
        case EstimatorKind::SimpleBayesian: return "simple-bayesian";
        case EstimatorKind::AvgCount: return "avg-count";
    }
    return "?";
}

inline EstimatorKind estimator_from_name(const std::string& s) {
    if (s == "ou-bayesian" || s == "ou") return EstimatorKind::OuBayesian;
    if (s == "simple-bayesian" || s == "simple") return EstimatorKind::SimpleBayesian;
    if (s == "avg-count" || s == "avg") return EstimatorKind::AvgCount;
    throw UsageError("unknown estimator '" + s +
                     "' (expected ou-bayesian, simple-bayesian, or avg-count)");
}

// One experiment: field model, lineshape, timing, charge model, grid, and
// run-scale choices. Internal units rad/s; the config file speaks Hz.
struct ExperimentConfig {
    OuParams ou{hz_to_rad(2.2e6), 5e-3, 0.0};
    CycleTiming timing{10e-6, 100e-6, 10e-6};
    CptLineshape shape{hz_to_rad(11.6e6), 0.9, 0.5};
    double bias = hz_to_rad(4e6);    // rad/s
    double mean_rate = 5400.0;       // s^-1
    ChargeModel charge{0.75, 0.0};
    LambdaSystemParams lambda{hz_to_rad(5e6), hz_to_rad(5e6), 1.0 / 12e-9,
                              hz_to_rad(0.6e6), 0.0, 0.0, 0.5};
    int n_bins = 1024;
    double half_width_sigmas = 6.0;
    AvgCountConfig avg{0.0, 2.0};
    int n_trajectories = 40;
    double duration = 5.0;   // s per trajectory
    double burn_in = -1.0;   // s; < 0: auto (3 tau_c)
    std::uint64_t seed = 12345;
    int threads = 0;         // 0: hardware concurrency

    double resolved_burn_in() const { return burn_in < 0.0 ? 3.0 * ou.tau_c : burn_in; }

    std::int64_t n_intervals() const {
        return static_cast<std::int64_t>(std::llround(duration / timing.update_interval));
    }

    void validate() const {
        ou.validate();
        timing.validate();
        shape.validate();
        charge.validate();
        avg.validate();
        if (!(mean_rate > 0.0)) throw UsageError("config: cpt.mean_rate_hz must be > 0");
        if (n_bins < 64) throw UsageError("config: grid.n_bins must be >= 64");
        if (half_width_sigmas < 5.0)
            throw UsageError("config: grid.half_width_sigmas must be >= 5");
        if (n_trajectories < 1) throw UsageError("config: run.n_trajectories must be >= 1");
        if (!(duration > 0.0)) throw UsageError("config: run.duration_s must be > 0");
        if (threads < 0) throw UsageError("config: run.threads must be >= 0");
    }

    std::vector<std::string> warnings() const {
        std::vector<std::string> w;
        if (duration < 10.0 * ou.tau_c)
            w.push_back("run.duration_s < 10 tau_c: variance estimates will be noisy");
        return w;
    }
};

inline const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys = {
        "ou.sigma_hz",        "ou.tau_c_s",          "ou.mean_hz",
        "cpt.fwhm_hz",        "cpt.contrast",        "cpt.background_pop",
        "cpt.bias_hz",        "cpt.mean_rate_hz",    "lambda.rabi1_hz",
        "lambda.rabi2_hz",    "lambda.gamma_hz",     "lambda.gammas_hz",
        "lambda.detuning1_hz", "lambda.branch1",     "timing.init_s",
        "timing.cpt_s",       "timing.tau_s",        "charge.fidelity",
        "charge.neutral_rate_hz", "grid.n_bins",     "grid.half_width_sigmas",
        "avg.tau_a_s",        "avg.branch_span",     "run.n_trajectories",
        "run.duration_s",     "run.burn_in_s",       "run.seed",
        "run.threads"};
    return keys;
}

inline ExperimentConfig config_from(const Config& c) {
    c.validate_keys(known_config_keys());
    ExperimentConfig e;
    e.ou.sigma = hz_to_rad(c.get_double("ou.sigma_hz", rad_to_hz(e.ou.sigma)));
    e.ou.tau_c = c.get_double("ou.tau_c_s", e.ou.tau_c);
    e.ou.mean = hz_to_rad(c.get_double("ou.mean_hz", rad_to_hz(e.ou.mean)));
    e.shape.fwhm = hz_to_rad(c.get_double("cpt.fwhm_hz", rad_to_hz(e.shape.fwhm)));
    e.shape.contrast = c.get_double("cpt.contrast", e.shape.contrast);
    e.shape.background_pop = c.get_double("cpt.background_pop", e.shape.background_pop);
    e.bias = hz_to_rad(c.get_double("cpt.bias_hz", rad_to_hz(e.bias)));
    e.mean_rate = c.get_double("cpt.mean_rate_hz", e.mean_rate);
    e.lambda.rabi_1 = hz_to_rad(c.get_double("lambda.rabi1_hz", rad_to_hz(e.lambda.rabi_1)));
    e.lambda.rabi_2 = hz_to_rad(c.get_double("lambda.rabi2_hz", rad_to_hz(e.lambda.rabi_2)));
    e.lambda.gamma = hz_to_rad(c.get_double("lambda.gamma_hz", rad_to_hz(e.lambda.gamma)));
    e.lambda.gamma_s = hz_to_rad(c.get_double("lambda.gammas_hz", rad_to_hz(e.lambda.gamma_s)));
    e.lambda.one_photon_detuning =
        hz_to_rad(c.get_double("lambda.detuning1_hz", rad_to_hz(e.lambda.one_photon_detuning)));
    e.lambda.branch_1 = c.get_double("lambda.branch1", e.lambda.branch_1);
    e.timing.init_duration = c.get_double("timing.init_s", e.timing.init_duration);
    e.timing.cpt_duration = c.get_double("timing.cpt_s", e.timing.cpt_duration);
    e.timing.update_interval = c.get_double("timing.tau_s", e.timing.update_interval);
    e.charge.init_fidelity = c.get_double("charge.fidelity", e.charge.init_fidelity);
    e.charge.neutral_rate = c.get_double("charge.neutral_rate_hz", e.charge.neutral_rate);
    e.n_bins = static_cast<int>(c.get_int("grid.n_bins", e.n_bins));
    e.half_width_sigmas = c.get_double("grid.half_width_sigmas", e.half_width_sigmas);
    e.avg.tau_a = c.get_double("avg.tau_a_s", e.avg.tau_a);
    e.avg.branch_span = c.get_double("avg.branch_span", e.avg.branch_span);
    e.n_trajectories = static_cast<int>(c.get_int("run.n_trajectories", e.n_trajectories));
    e.duration = c.get_double("run.duration_s", e.duration);
    e.burn_in = c.get_double("run.burn_in_s", e.burn_in);
    e.seed = c.get_u64("run.seed", e.seed);
    e.threads = static_cast<int>(c.get_int("run.threads", e.threads));
    e.validate();
    return e;
}

// Resolved-config echo (Hz at the boundary, sorted keys; deterministic).
inline Config config_to(const ExperimentConfig& e) {
    Config c;
    c.set("ou.sigma_hz", format_double(rad_to_hz(e.ou.sigma)));
    c.set("ou.tau_c_s", format_double(e.ou.tau_c));
    c.set("ou.mean_hz", format_double(rad_to_hz(e.ou.mean)));
    c.set("cpt.fwhm_hz", format_double(rad_to_hz(e.shape.fwhm)));
    c.set("cpt.contrast", format_double(e.shape.contrast));
    c.set("cpt.background_pop", format_double(e.shape.background_pop));
    c.set("cpt.bias_hz", format_double(rad_to_hz(e.bias)));
    c.set("cpt.mean_rate_hz", format_double(e.mean_rate));
    c.set("lambda.rabi1_hz", format_double(rad_to_hz(e.lambda.rabi_1)));
    c.set("lambda.rabi2_hz", format_double(rad_to_hz(e.lambda.rabi_2)));
    c.set("lambda.gamma_hz", format_double(rad_to_hz(e.lambda.gamma)));
    c.set("lambda.gammas_hz", format_double(rad_to_hz(e.lambda.gamma_s)));
    c.set("lambda.detuning1_hz", format_double(rad_to_hz(e.lambda.one_photon_detuning)));
    c.set("lambda.branch1", format_double(e.lambda.branch_1));
    c.set("timing.init_s", format_double(e.timing.init_duration));
    c.set("timing.cpt_s", format_double(e.timing.cpt_duration));
    c.set("timing.tau_s", format_double(e.timing.update_interval));
    c.set("charge.fidelity", format_double(e.charge.init_fidelity));
    c.set("charge.neutral_rate_hz", format_double(e.charge.neutral_rate));
    c.set("grid.n_bins", std::to_string(e.n_bins));
    c.set("grid.half_width_sigmas", format_double(e.half_width_sigmas));
    c.set("avg.tau_a_s", format_double(e.avg.tau_a));
    c.set("avg.branch_span", format_double(e.avg.branch_span));
    c.set("run.n_trajectories", std::to_string(e.n_trajectories));
    c.set("run.duration_s", format_double(e.duration));
    c.set("run.burn_in_s", format_double(e.burn_in));
    c.set("run.seed", std::to_string(e.seed));
    c.set("run.threads", std::to_string(e.threads));
    return c;
}

inline std::string config_fingerprint(const ExperimentConfig& e) {
    const std::string echo = config_to(e).echo();
    const std::uint64_t h = splitmix64(fnv1a64(echo) ^ e.seed);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

inline RateCalibration make_calibration(const ExperimentConfig& e) {
    return calibrate_rate(e.shape, e.bias, e.ou, e.mean_rate);
}

inline EstimatorParams make_estimator_params(const ExperimentConfig& e,
                                             const RateCalibration& cal) {
    EstimatorParams p;
    p.ou = e.ou;
    p.timing = e.timing;
    p.cal = cal;
    p.shape = e.shape;
    p.geom = make_grid_geometry(e.ou, e.n_bins, e.half_width_sigmas);
    return p;
}

struct VarianceReport {
    double var_over_sigma2 = 0.0;
    double std_error = 0.0;  // Monte-Carlo standard error (block bootstrap)
    std::int64_t n_samples = 0;
    std::string estimator;
    std::string config_fingerprint;
};

namespace detail {

// Pools normalized squared errors: exact grand mean over all samples, and a
// block bootstrap (blocks of one correlation time) for the standard error.
class BlockPool {
  public:
    explicit BlockPool(std::int64_t block_len) : block_len_(std::max<std::int64_t>(1, block_len)) {}

    void add_series(const std::vector<double>& sq_err) {
        std::int64_t i = 0;
        const std::int64_t n = static_cast<std::int64_t>(sq_err.size());
        while (i < n) {
            const std::int64_t len = std::min(block_len_, n - i);
            double s = 0.0;
            for (std::int64_t k = i; k < i + len; ++k) s += sq_err[static_cast<std::size_t>(k)];
            sum_ += s;
            count_ += len;
            if (len == block_len_) block_means_.push_back(s / static_cast<double>(len));
            i += len;
        }
    }

    void merge(const BlockPool& other) {
        sum_ += other.sum_;
        count_ += other.count_;
        block_means_.insert(block_means_.end(), other.block_means_.begin(),
                            other.block_means_.end());
    }

    VarianceReport finalize(std::uint64_t seed, const std::string& estimator,
                            const std::string& fingerprint) const {
        VarianceReport rep;
        rep.estimator = estimator;
        rep.config_fingerprint = fingerprint;
        rep.n_samples = count_;
        if (count_ == 0) throw DataError("variance scoring: no samples after burn-in");
        rep.var_over_sigma2 = sum_ / static_cast<double>(count_);

        const std::size_t m = block_means_.size();
        if (m >= 2) {
            auto eng = make_engine(derive_seed(seed, "block-bootstrap", 0));
            std::uniform_int_distribution<std::size_t> pick(0, m - 1);
            const int resamples = 200;
            double bs_sum = 0.0, bs_sum2 = 0.0;
            for (int b = 0; b < resamples; ++b) {
                double s = 0.0;
                for (std::size_t k = 0; k < m; ++k) s += block_means_[pick(eng)];
                const double mean = s / static_cast<double>(m);
                bs_sum += mean;
                bs_sum2 += mean * mean;
            }
            const double mu = bs_sum / resamples;
            rep.std_error = std::sqrt(std::max(0.0, bs_sum2 / resamples - mu * mu));
        } else {
            rep.std_error = 0.0;
        }
        return rep;
    }

    std::int64_t block_len() const { return block_len_; }

  private:
    std::int64_t block_len_;
    double sum_ = 0.0;
    std::int64_t count_ = 0;
    std::vector<double> block_means_;
};

inline void parallel_for_index(int n, int threads, const std::function<void(int)>& fn) {
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads < 1) threads = 1;
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        while (true) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

// Var/sigma^2 of one estimate sequence against its ground-truth trajectory.
// burn_in < 0 selects the default of three correlation times.
inline VarianceReport score_variance(const std::vector<EstimateRecord>& estimates,
                                     const OuTrajectory& truth, const OuParams& ou,
                                     double burn_in = -1.0, const std::string& estimator = "",
                                     std::uint64_t seed = 0,
                                     const std::string& fingerprint = "") {
    ou.validate();
    if (estimates.size() != truth.samples.size())
        throw DataError("variance scoring: estimate and truth sequences are misaligned");
    for (std::size_t k = 0; k < estimates.size(); ++k)
        if (estimates[k].n != static_cast<std::int64_t>(k))
            throw DataError("variance scoring: estimate index mismatch at row " +
                            std::to_string(k));
    if (burn_in < 0.0) burn_in = 3.0 * ou.tau_c;

    const double inv_s2 = 1.0 / (ou.sigma * ou.sigma);
    const std::size_t k0 =
        std::min(estimates.size(),
                 static_cast<std::size_t>(std::ceil(burn_in / truth.dt - 1e-9)));
    std::vector<double> sq;
    sq.reserve(estimates.size() - k0);
    for (std::size_t k = k0; k < estimates.size(); ++k) {
        const double d = estimates[k].x_hat - truth.samples[k];
        sq.push_back(d * d * inv_s2);
    }
    detail::BlockPool pool(static_cast<std::int64_t>(std::llround(ou.tau_c / truth.dt)));
    pool.add_series(sq);
    return pool.finalize(seed, estimator, fingerprint);
}

// Monte-Carlo variance experiment: n_trajectories independent field + count
// simulations, each scored for every requested estimator, pooled.
inline std::map<EstimatorKind, VarianceReport> run_variance_experiment(
    const ExperimentConfig& cfg, const std::vector<EstimatorKind>& kinds) {
    cfg.validate();
    const RateCalibration cal = make_calibration(cfg);
    const EstimatorParams params = make_estimator_params(cfg, cal);
    const std::string fingerprint = config_fingerprint(cfg);
    const double burn_in = cfg.resolved_burn_in();
    const double tau = cfg.timing.update_interval;
    const std::int64_t block_len =
        static_cast<std::int64_t>(std::llround(cfg.ou.tau_c / tau));
    const std::int64_t n_steps = cfg.n_intervals();
    const std::size_t k0 = std::min(static_cast<std::size_t>(n_steps),
                                    static_cast<std::size_t>(std::ceil(burn_in / tau - 1e-9)));

    struct TrajResult {
        std::map<EstimatorKind, detail::BlockPool> pools;
    };
    std::vector<TrajResult> results(static_cast<std::size_t>(cfg.n_trajectories));

    detail::parallel_for_index(cfg.n_trajectories, cfg.threads, [&](int i) {
        const auto traj = generate_trajectory(cfg.ou, tau, static_cast<std::size_t>(n_steps),
                                              derive_seed(cfg.seed, "ou-trajectory",
                                                          static_cast<std::uint64_t>(i)));
        const auto counts =
            simulate_counts(traj, cfg.timing, cal, cfg.shape, cfg.charge,
                            derive_seed(cfg.seed, "counts", static_cast<std::uint64_t>(i)));
        const double inv_s2 = 1.0 / (cfg.ou.sigma * cfg.ou.sigma);
        for (EstimatorKind kind : kinds) {
            std::vector<EstimateRecord> est;
            switch (kind) {
                case EstimatorKind::OuBayesian: est = run_ou_bayesian(counts, params); break;
                case EstimatorKind::SimpleBayesian:
                    est = run_simple_bayesian(counts, params);
                    break;
                case EstimatorKind::AvgCount: est = run_avg_count(counts, params, cfg.avg); break;
            }
            std::vector<double> sq;
            sq.reserve(est.size() - k0);
            for (std::size_t k = k0; k < est.size(); ++k) {
                const double d = est[k].x_hat - traj.samples[k];
                sq.push_back(d * d * inv_s2);
            }
            detail::BlockPool pool(block_len);
            pool.add_series(sq);
            results[static_cast<std::size_t>(i)].pools.emplace(kind, std::move(pool));
        }
    });

    std::map<EstimatorKind, VarianceReport> out;
    for (EstimatorKind kind : kinds) {
        detail::BlockPool merged(block_len);
        for (const auto& r : results) merged.merge(r.pools.at(kind));
        out[kind] = merged.finalize(derive_seed(cfg.seed, "bootstrap-final", 0),
                                    estimator_name(kind), fingerprint);
    }
    return out;
}

struct SweepRow {
    double value = 0.0;  // internal units (rad/s for frequencies, s for times)
    EstimatorKind kind = EstimatorKind::OuBayesian;
    VarianceReport report;
    double bound_over_sigma2 = 0.0;
};

// tau_c sweep: every estimator at every point, with the CRLB
// per point. Per-point seeds derive from the master seed, so two sweeps with
// the same master (e.g. differing only in charge fidelity) are paired.
inline std::vector<SweepRow> sweep_tau_c(const ExperimentConfig& base,
                                         const std::vector<double>& tau_c_values,
                                         const std::vector<EstimatorKind>& kinds) {
    std::vector<SweepRow> rows;
    for (std::size_t p = 0; p < tau_c_values.size(); ++p) {
        ExperimentConfig cfg = base;
        cfg.ou.tau_c = tau_c_values[p];
        cfg.seed = derive_seed(base.seed, "sweep-point", static_cast<std::uint64_t>(p));
        const auto reports = run_variance_experiment(cfg, kinds);
        const auto crlb = bayesian_crlb(cfg.ou, cfg.timing.update_interval,
                                        make_calibration(cfg), cfg.shape);
        for (EstimatorKind kind : kinds) {
            SweepRow row;
            row.value = cfg.ou.tau_c;
            row.kind = kind;
            row.report = reports.at(kind);
            row.bound_over_sigma2 = crlb.bound_over_sigma2;
            rows.push_back(row);
        }
    }
    return rows;
}

// Bias sweep, single estimator.
inline std::vector<SweepRow> sweep_bias(const ExperimentConfig& base,
                                        const std::vector<double>& bias_values,
                                        EstimatorKind kind) {
    std::vector<SweepRow> rows;
    for (std::size_t p = 0; p < bias_values.size(); ++p) {
        ExperimentConfig cfg = base;
        cfg.bias = bias_values[p];
        cfg.seed = derive_seed(base.seed, "sweep-point", static_cast<std::uint64_t>(p));
        const auto reports = run_variance_experiment(cfg, {kind});
        SweepRow row;
        row.value = cfg.bias;
        row.kind = kind;
        row.report = reports.at(kind);
        rows.push_back(row);
    }
    return rows;
}

// sigma sweep, single estimator.
inline std::vector<SweepRow> sweep_sigma(const ExperimentConfig& base,
                                         const std::vector<double>& sigma_values,
                                         EstimatorKind kind) {
    std::vector<SweepRow> rows;
    for (std::size_t p = 0; p < sigma_values.size(); ++p) {
        ExperimentConfig cfg = base;
        cfg.ou.sigma = sigma_values[p];
        cfg.seed = derive_seed(base.seed, "sweep-point", static_cast<std::uint64_t>(p));
        const auto reports = run_variance_experiment(cfg, {kind});
        SweepRow row;
        row.value = cfg.ou.sigma;
        row.kind = kind;
        row.report = reports.at(kind);
        rows.push_back(row);
    }
    return rows;
}

inline void write_sweep_tauc_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "tau_c_s,estimator,var_over_sigma2,stderr,bound_over_sigma2\n";
    for (const auto& r : rows)
        os << format_double(r.value) << ',' << estimator_name(r.kind) << ','
           << format_double(r.report.var_over_sigma2) << ',' << format_double(r.report.std_error)
           << ',' << format_double(r.bound_over_sigma2) << '\n';
}

// For bias (value_name "bias_hz") and sigma ("sigma_hz") sweeps: frequencies
// leave in Hz.
inline void write_sweep_scalar_csv(std::ostream& os, const std::string& value_name,
                                   const std::vector<SweepRow>& rows) {
    os << value_name << ",var_over_sigma2,stderr\n";
    for (const auto& r : rows)
        os << format_double(rad_to_hz(r.value)) << ',' << format_double(r.report.var_over_sigma2)
           << ',' << format_double(r.report.std_error) << '\n';
}

struct LatencyReport {
    double p50_ns = 0.0;
    double p99_ns = 0.0;
    double max_ns = 0.0;
    std::int64_t n_updates = 0;
};

// Wall-clock cost of one filter update (predict + Bayes + moments) on a
// realistic count stream, after kernel precompute and warmup.
inline LatencyReport bench_update_latency(const ExperimentConfig& cfg,
                                          std::int64_t n_updates = 1000000) {
    cfg.validate();
    if (n_updates < 1000) n_updates = 1000;
    const RateCalibration cal = make_calibration(cfg);
    const EstimatorParams params = make_estimator_params(cfg, cal);

    const std::int64_t warmup = 1000;
    const std::int64_t total = n_updates + warmup;
    const auto traj = generate_trajectory(cfg.ou, cfg.timing.update_interval,
                                          static_cast<std::size_t>(total),
                                          derive_seed(cfg.seed, "bench-trajectory", 0));
    const auto counts = simulate_counts(traj, cfg.timing, cal, cfg.shape, cfg.charge,
                                        derive_seed(cfg.seed, "bench-counts", 0));

    BayesianGridFilter filter(params, /*use_ou_kernel=*/true);
    for (std::int64_t i = 0; i < warmup; ++i) filter.step(counts[static_cast<std::size_t>(i)]);

    std::vector<double> ns(static_cast<std::size_t>(n_updates));
    using clock = std::chrono::steady_clock;
    for (std::int64_t i = 0; i < n_updates; ++i) {
        const auto& rec = counts[static_cast<std::size_t>(warmup + i)];
        const auto t0 = clock::now();
        filter.step(rec);
        const auto t1 = clock::now();
        ns[static_cast<std::size_t>(i)] =
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
    }
    std::sort(ns.begin(), ns.end());
    LatencyReport rep;
    rep.n_updates = n_updates;
    rep.p50_ns = ns[static_cast<std::size_t>(n_updates / 2)];
    rep.p99_ns = ns[static_cast<std::size_t>((n_updates * 99) / 100)];
    rep.max_ns = ns.back();
    return rep;
}

inline void write_bench_csv(std::ostream& os, const LatencyReport& rep) {
    os << "p50_ns,p99_ns,max_ns\n";
    os << format_double(rep.p50_ns) << ',' << format_double(rep.p99_ns) << ','
       << format_double(rep.max_ns) << '\n';
}

// Provenance record written next to every output.
inline void write_manifest(std::ostream& os, const ExperimentConfig& cfg,
                           const std::string& build_version, double wall_seconds) {
    os << "# run manifest\n";
    os << "build = " << build_version << "\n";
    os << "seed = " << cfg.seed << "\n";
    os << "fingerprint = " << config_fingerprint(cfg) << "\n";
    os << "wall_seconds = " << format_double(wall_seconds) << "\n";
    os << "\n# resolved config\n";
    os << config_to(cfg).echo();
}

}  // namespace cptmag
