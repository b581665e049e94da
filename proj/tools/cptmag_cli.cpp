// cptmag command-line front end.
//
// Subcommands: simulate, estimate, sweep-tauc, sweep-bias, sweep-sigma,
// crlb, bench, stream. Exit codes: 0 success, 1 usage error, 2 data error,
// 3 non-convergence.

#include <chrono>
#include <cstdint>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cptmag/cptmag.hpp"

namespace {

using namespace cptmag;

#ifndef CPTMAG_GIT_DESCRIBE
#define CPTMAG_GIT_DESCRIBE "unknown"
#endif

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string seed;
};

void add_common(CLI::App* sub, CommonOpts& opts) {
    sub->add_option("--config", opts.config_path, "Key-value config file (dotted keys)");
    sub->add_option("--set", opts.sets, "Override one config key, as key=value (repeatable)");
    sub->add_option("--seed", opts.seed, "Master RNG seed (overrides run.seed)");
}

ExperimentConfig resolve_config(const CommonOpts& opts) {
    Config c = opts.config_path.empty() ? Config() : Config::from_file(opts.config_path);
    for (const auto& kv : opts.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw UsageError("--set expects key=value, got '" + kv + "'");
        c.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!opts.seed.empty()) c.set("run.seed", opts.seed);
    ExperimentConfig cfg = config_from(c);
    for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << "\n";
    return cfg;
}

class WallClock {
  public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

  private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

void emit_manifest(const std::string& out_path, const ExperimentConfig& cfg,
                   const WallClock& clock) {
    auto os = open_output_file(out_path + ".manifest");
    write_manifest(os, cfg, CPTMAG_GIT_DESCRIBE, clock.seconds());
}

std::vector<EstimatorKind> parse_estimators(const std::vector<std::string>& names,
                                            bool allow_multiple) {
    std::vector<EstimatorKind> kinds;
    for (const auto& name : names) {
        const EstimatorKind k = estimator_from_name(name);
        bool seen = false;
        for (EstimatorKind have : kinds) seen = seen || have == k;
        if (!seen) kinds.push_back(k);
    }
    if (kinds.empty())
        kinds = {EstimatorKind::OuBayesian, EstimatorKind::SimpleBayesian,
                 EstimatorKind::AvgCount};
    if (!allow_multiple && kinds.size() > 1)
        throw UsageError("this sweep reports a single estimator; pass --estimator once");
    return kinds;
}

int cmd_simulate(const CommonOpts& common, const std::string& out,
                 const std::string& debug_truth, std::uint64_t traj_index) {
    WallClock clock;
    const ExperimentConfig cfg = resolve_config(common);
    const RateCalibration cal = make_calibration(cfg);
    const auto traj = generate_trajectory(cfg.ou, cfg.timing.update_interval,
                                          static_cast<std::size_t>(cfg.n_intervals()),
                                          derive_seed(cfg.seed, "ou-trajectory", traj_index));
    const auto counts =
        simulate_counts(traj, cfg.timing, cal, cfg.shape, cfg.charge,
                        derive_seed(cfg.seed, "counts", traj_index));
    {
        auto os = open_output_file(out);
        write_counts(os, counts);
    }
    if (!debug_truth.empty()) {
        auto os = open_output_file(debug_truth);
        write_truth(os, traj, counts);
    }
    emit_manifest(out, cfg, clock);
    std::cerr << "wrote " << counts.size() << " count records to " << out << "\n";
    return 0;
}

int cmd_estimate(const CommonOpts& common, const std::string& in, const std::string& out,
                 const std::vector<std::string>& estimator_names) {
    WallClock clock;
    const ExperimentConfig cfg = resolve_config(common);
    const EstimatorKind kind = parse_estimators(
        estimator_names.empty() ? std::vector<std::string>{"ou-bayesian"} : estimator_names,
        /*allow_multiple=*/false)[0];
    const auto counts = replay_counts_file(in);
    const EstimatorParams params = make_estimator_params(cfg, make_calibration(cfg));
    std::vector<EstimateRecord> est;
    switch (kind) {
        case EstimatorKind::OuBayesian: est = run_ou_bayesian(counts, params); break;
        case EstimatorKind::SimpleBayesian: est = run_simple_bayesian(counts, params); break;
        case EstimatorKind::AvgCount: est = run_avg_count(counts, params, cfg.avg); break;
    }
    {
        auto os = open_output_file(out);
        write_estimates(os, est);
    }
    emit_manifest(out, cfg, clock);
    std::cerr << "wrote " << est.size() << " estimates (" << estimator_name(kind) << ") to "
              << out << "\n";
    return 0;
}

int cmd_sweep_tauc(const CommonOpts& common, const std::string& out,
                   std::vector<double> values, const std::vector<std::string>& estimator_names) {
    WallClock clock;
    const ExperimentConfig cfg = resolve_config(common);
    const auto kinds = parse_estimators(estimator_names, /*allow_multiple=*/true);
    if (values.empty()) values = {1e-3, 2e-3, 5e-3, 10e-3};
    const auto rows = sweep_tau_c(cfg, values, kinds);
    {
        auto os = open_output_file(out);
        write_sweep_tauc_csv(os, rows);
    }
    emit_manifest(out, cfg, clock);
    std::cerr << "wrote " << rows.size() << " sweep rows to " << out << "\n";
    return 0;
}

int cmd_sweep_scalar(const CommonOpts& common, const std::string& out,
                     std::vector<double> values_hz,
                     const std::vector<std::string>& estimator_names, bool is_bias) {
    WallClock clock;
    const ExperimentConfig cfg = resolve_config(common);
    const EstimatorKind kind = parse_estimators(
        estimator_names.empty() ? std::vector<std::string>{"ou-bayesian"} : estimator_names,
        /*allow_multiple=*/false)[0];
    if (values_hz.empty())
        values_hz = is_bias ? std::vector<double>{0.0, 2e6, 4e6, 8e6, 12e6}
                            : std::vector<double>{0.25e6, 0.5e6, 1.1e6, 2.2e6, 4.4e6};
    std::vector<double> values;
    values.reserve(values_hz.size());
    for (double v : values_hz) values.push_back(hz_to_rad(v));
    const auto rows = is_bias ? sweep_bias(cfg, values, kind) : sweep_sigma(cfg, values, kind);
    {
        auto os = open_output_file(out);
        write_sweep_scalar_csv(os, is_bias ? "bias_hz" : "sigma_hz", rows);
    }
    emit_manifest(out, cfg, clock);
    std::cerr << "wrote " << rows.size() << " sweep rows to " << out << "\n";
    return 0;
}

int cmd_crlb(const CommonOpts& common, const std::string& out, std::vector<double> values) {
    WallClock clock;
    const ExperimentConfig cfg = resolve_config(common);
    if (values.empty()) values = {1e-3, 2e-3, 5e-3, 10e-3};
    std::vector<std::pair<double, double>> rows;
    for (double tc : values) {
        ExperimentConfig point = cfg;
        point.ou.tau_c = tc;
        const auto res = bayesian_crlb(point.ou, point.timing.update_interval,
                                       make_calibration(point), point.shape);
        rows.emplace_back(tc, res.bound_over_sigma2);
    }
    {
        auto os = open_output_file(out);
        write_crlb_csv(os, rows);
    }
    emit_manifest(out, cfg, clock);
    std::cerr << "wrote " << rows.size() << " bound rows to " << out << "\n";
    return 0;
}

int cmd_bench(const CommonOpts& common, const std::string& out, std::int64_t n_updates) {
    WallClock clock;
    const ExperimentConfig cfg = resolve_config(common);
    const LatencyReport rep = bench_update_latency(cfg, n_updates);
    if (out.empty()) {
        write_bench_csv(std::cout, rep);
    } else {
        auto os = open_output_file(out);
        write_bench_csv(os, rep);
        emit_manifest(out, cfg, clock);
    }
    std::cerr << "p50 " << rep.p50_ns << " ns, p99 " << rep.p99_ns << " ns, max " << rep.max_ns
              << " ns over " << rep.n_updates << " updates\n";
    return 0;
}

// Streaming real-time path: count records on stdin, estimate records on
// stdout, one line per interval, flushed per line. Strictly sequential.
int cmd_stream(const CommonOpts& common, const std::vector<std::string>& estimator_names,
               bool strict) {
    const ExperimentConfig cfg = resolve_config(common);
    const EstimatorKind kind = parse_estimators(
        estimator_names.empty() ? std::vector<std::string>{"ou-bayesian"} : estimator_names,
        /*allow_multiple=*/false)[0];
    const EstimatorParams params = make_estimator_params(cfg, make_calibration(cfg));

    std::string line;
    if (!std::getline(std::cin, line)) return 0;  // empty input: empty output
    if (!line.empty() && line.back() == '\r') line.pop_back();
    {
        const auto cols = split_csv_line(line);
        const auto& expect = count_csv_header();
        bool ok = cols.size() == expect.size();
        for (std::size_t i = 0; ok && i < cols.size(); ++i) ok = cols[i] == expect[i];
        if (!ok) throw DataError("stdin:1: expected count header 'n,t_seconds,y,in_init'");
    }

    std::unique_ptr<BayesianGridFilter> bayes;
    std::unique_ptr<AvgCountEstimator> avg;
    if (kind == EstimatorKind::AvgCount)
        avg = std::make_unique<AvgCountEstimator>(params, cfg.avg);
    else
        bayes = std::make_unique<BayesianGridFilter>(params,
                                                     kind == EstimatorKind::OuBayesian);

    std::cout << "n,t_seconds,xhat_hz,posterior_sd_hz,photons_seen\n";
    std::cout.flush();

    std::size_t line_no = 1;
    while (std::getline(std::cin, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        CountRecord rec;
        try {
            rec = parse_count_fields(split_csv_line(line), "stdin:" + std::to_string(line_no));
        } catch (const DataError& e) {
            if (strict) throw;
            std::cerr << "skipping malformed record (" << e.what() << ")\n";
            continue;
        }
        EstimateRecord est;
        est.n = rec.n;
        est.t = rec.t;
        if (avg) {
            avg->step(rec);
            est.x_hat = avg->estimate();
            est.posterior_sd = 0.0;
            est.photons_seen = avg->photons_seen();
        } else {
            bayes->step(rec);
            est.x_hat = bayes->mean();
            est.posterior_sd = bayes->sd();
            est.photons_seen = bayes->photons_seen();
        }
        write_estimate_row(std::cout, est);
        std::cout.flush();
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CPT magnetometry simulation and real-time estimation toolkit"};
    app.require_subcommand(1);

    CommonOpts common;
    std::string out, in, debug_truth;
    std::vector<std::string> estimators;
    std::vector<double> values;
    std::uint64_t traj_index = 0;
    std::int64_t n_updates = 1000000;
    bool strict = false;

    auto* sim = app.add_subcommand("simulate", "Generate one field trajectory + count stream");
    add_common(sim, common);
    sim->add_option("--out", out, "Count CSV path")->required();
    sim->add_option("--debug-truth", debug_truth, "Also write ground truth (n,t_seconds,x_hz,charge_ok)");
    sim->add_option("--traj", traj_index, "Trajectory index under the master seed (default 0)");

    auto* est = app.add_subcommand("estimate", "Replay a count stream through one estimator");
    add_common(est, common);
    est->add_option("--in", in, "Count CSV path")->required();
    est->add_option("--out", out, "Estimate CSV path")->required();
    est->add_option("--estimator", estimators,
                    "ou-bayesian | simple-bayesian | avg-count (default ou-bayesian)");

    auto* st = app.add_subcommand("sweep-tauc", "Variance vs correlation time, all estimators");
    add_common(st, common);
    st->add_option("--out", out, "Sweep CSV path")->required();
    st->add_option("--values", values, "tau_c grid in seconds (default 1,2,5,10 ms)")
        ->delimiter(',');
    st->add_option("--estimator", estimators, "Restrict to one or more estimators (repeatable)");

    auto* sb = app.add_subcommand("sweep-bias", "Variance vs bias detuning, one estimator");
    add_common(sb, common);
    sb->add_option("--out", out, "Sweep CSV path")->required();
    sb->add_option("--values", values, "bias grid in Hz (default 0,2e6,4e6,8e6,12e6)")
        ->delimiter(',');
    sb->add_option("--estimator", estimators, "Estimator (default ou-bayesian)");

    auto* ss = app.add_subcommand("sweep-sigma", "Variance vs field amplitude, one estimator");
    add_common(ss, common);
    ss->add_option("--out", out, "Sweep CSV path")->required();
    ss->add_option("--values", values,
                   "sigma grid in Hz (default 0.25e6,0.5e6,1.1e6,2.2e6,4.4e6)")
        ->delimiter(',');
    ss->add_option("--estimator", estimators, "Estimator (default ou-bayesian)");

    auto* cr = app.add_subcommand("crlb", "Bayesian Cramér-Rao bound vs correlation time");
    add_common(cr, common);
    cr->add_option("--out", out, "Bound CSV path")->required();
    cr->add_option("--values", values, "tau_c grid in seconds (default 1,2,5,10 ms)")
        ->delimiter(',');

    auto* be = app.add_subcommand("bench", "Per-update latency of the OU-Bayesian filter");
    add_common(be, common);
    be->add_option("--out", out, "Latency CSV path (default: stdout)");
    be->add_option("--updates", n_updates, "Number of timed updates (default 1e6)");

    auto* sr = app.add_subcommand("stream", "Real-time estimation: counts on stdin, estimates on stdout");
    add_common(sr, common);
    sr->add_option("--estimator", estimators,
                   "ou-bayesian | simple-bayesian | avg-count (default ou-bayesian)");
    sr->add_flag("--strict", strict, "Abort on the first malformed input line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (sim->parsed()) return cmd_simulate(common, out, debug_truth, traj_index);
        if (est->parsed()) return cmd_estimate(common, in, out, estimators);
        if (st->parsed()) return cmd_sweep_tauc(common, out, values, estimators);
        if (sb->parsed()) return cmd_sweep_scalar(common, out, values, estimators, true);
        if (ss->parsed()) return cmd_sweep_scalar(common, out, values, estimators, false);
        if (cr->parsed()) return cmd_crlb(common, out, values);
        if (be->parsed()) return cmd_bench(common, out, n_updates);
        if (sr->parsed()) return cmd_stream(common, estimators, strict);
        throw UsageError("no subcommand given");
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
