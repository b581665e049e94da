#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "cptmag/cpt_model.hpp"
#include "cptmag/csv.hpp"
#include "cptmag/errors.hpp"
#include "cptmag/ou_process.hpp"
#include "cptmag/rng.hpp"
#include "cptmag/units.hpp"

namespace cptmag {

// Experiment cycle: one green initialization pulse followed by a CPT
// detection window, tiled indefinitely; everything quantized to the update
// interval tau.
struct CycleTiming {
    double init_duration = 10e-6;    // s
    double cpt_duration = 100e-6;    // s
    double update_interval = 10e-6;  // s (tau)

    void validate() const {
        if (!(update_interval > 0.0)) throw UsageError("timing: update_interval must be > 0");
        if (init_duration < 0.0) throw UsageError("timing: init_duration must be >= 0");
        if (!(cpt_duration > 0.0)) throw UsageError("timing: cpt_duration must be > 0");
        const double init_err =
            std::abs(static_cast<double>(init_intervals()) * update_interval - init_duration);
        if (init_err > 1e-9 * update_interval)
            throw UsageError("timing: init_duration must be an integer multiple of the update interval");
        const double cpt_err =
            std::abs(static_cast<double>(cpt_intervals()) * update_interval - cpt_duration);
        if (cpt_err > 1e-9 * update_interval)
            throw UsageError("timing: cpt_duration must be an integer multiple of the update interval");
    }

    std::int64_t init_intervals() const {
        return static_cast<std::int64_t>(std::llround(init_duration / update_interval));
    }
    std::int64_t cpt_intervals() const {
        return static_cast<std::int64_t>(std::llround(cpt_duration / update_interval));
    }
    std::int64_t cycle_intervals() const { return init_intervals() + cpt_intervals(); }
};

// Charge-state initialization: each green pulse succeeds with probability
// init_fidelity; a failed cycle produces only field-independent background
// counts at neutral_rate (default 0: the neutral center is dark here).
struct ChargeModel {
    double init_fidelity = 1.0;  // p_c
    double neutral_rate = 0.0;   // s^-1

    void validate() const {
        if (init_fidelity < 0.0 || init_fidelity > 1.0)
            throw UsageError("charge: init_fidelity must lie in [0, 1]");
        if (neutral_rate < 0.0) throw UsageError("charge: neutral_rate must be >= 0");
    }
};

struct CountRecord {
    std::int64_t n = 0;      // interval index
    double t = 0.0;          // interval start time, s
    std::int64_t y = 0;      // photons in the interval
    bool in_init = false;    // interval lies in a green pulse
    bool charge_ok = true;   // diagnostic only; never serialized with counts
};

// Produce the photon-count time series for a field trajectory. One Poisson
// signal draw is consumed per CPT interval even when the cycle's charge draw
// failed (the value is discarded), so runs differing only in charge fidelity
// share an identical signal-photon noise stream under one seed.
inline std::vector<CountRecord> simulate_counts(const OuTrajectory& traj, const CycleTiming& timing,
                                                const RateCalibration& cal,
                                                const CptLineshape& shape, const ChargeModel& charge,
                                                std::uint64_t seed) {
    timing.validate();
    charge.validate();
    shape.validate();
    if (std::abs(traj.dt - timing.update_interval) > 1e-12 * timing.update_interval)
        throw UsageError("simulate_counts: trajectory dt must equal the update interval");

    auto eng_signal = make_engine(derive_seed(seed, "poisson", 0));
    auto eng_charge = make_engine(derive_seed(seed, "charge", 0));
    auto eng_neutral = make_engine(derive_seed(seed, "neutral", 0));
    std::bernoulli_distribution charge_draw(charge.init_fidelity);
    const double tau = timing.update_interval;
    const double neutral_mean = charge.neutral_rate * tau;

    const std::int64_t n_init = timing.init_intervals();
    const std::int64_t n_cycle = timing.cycle_intervals();

    std::vector<CountRecord> out;
    out.reserve(traj.samples.size());
    bool charge_ok = true;
    for (std::size_t n = 0; n < traj.samples.size(); ++n) {
        const std::int64_t pos = static_cast<std::int64_t>(n) % n_cycle;
        if (pos == 0) charge_ok = charge_draw(eng_charge);

        CountRecord rec;
        rec.n = static_cast<std::int64_t>(n);
        rec.t = static_cast<double>(n) * tau;
        rec.in_init = pos < n_init;
        rec.charge_ok = charge_ok;
        if (!rec.in_init) {
            const double ybar = expected_count(traj.samples[n], tau, cal, shape);
            std::poisson_distribution<std::int64_t> signal(ybar);
            const std::int64_t y_signal = signal(eng_signal);
            if (charge_ok) {
                rec.y = y_signal;
            } else if (neutral_mean > 0.0) {
                std::poisson_distribution<std::int64_t> neutral(neutral_mean);
                rec.y = neutral(eng_neutral);
            }
        }
        out.push_back(rec);
    }
    return out;
}

inline const std::vector<std::string>& count_csv_header() {
    static const std::vector<std::string> header = {"n", "t_seconds", "y", "in_init"};
    return header;
}

inline void write_counts(std::ostream& os, const std::vector<CountRecord>& records) {
    os << "n,t_seconds,y,in_init\n";
    for (const auto& rec : records)
        os << rec.n << ',' << format_double(rec.t) << ',' << rec.y << ',' << (rec.in_init ? 1 : 0)
           << '\n';
}

// Parse one already-split count row; `where` names the source for errors.
inline CountRecord parse_count_fields(const std::vector<std::string_view>& fields,
                                      const std::string& where) {
    CountRecord rec;
    rec.n = parse_int(fields[0], where + ", column n");
    rec.t = parse_double(fields[1], where + ", column t_seconds");
    rec.y = parse_int(fields[2], where + ", column y");
    const std::int64_t flag = parse_int(fields[3], where + ", column in_init");
    if (flag != 0 && flag != 1)
        throw DataError(where + ": in_init must be 0 or 1");
    rec.in_init = flag == 1;
    if (rec.y < 0) throw DataError(where + ": negative photon count");
    if (rec.in_init && rec.y != 0)
        throw DataError(where + ": nonzero count inside an initialization interval");
    return rec;
}

inline std::vector<CountRecord> replay_counts(std::istream& is, const std::string& name) {
    CsvReader reader(is, name, count_csv_header());
    if (!reader.had_header()) throw DataError(name + ": missing header");
    std::vector<CountRecord> out;
    std::vector<std::string_view> fields;
    while (reader.next_row(fields)) out.push_back(parse_count_fields(fields, reader.location()));
    return out;
}

inline std::vector<CountRecord> replay_counts_file(const std::string& path) {
    auto is = open_input_file(path);
    return replay_counts(is, path);
}

// Ground-truth sidecar (never shown to estimators): field and charge flag.
inline void write_truth(std::ostream& os, const OuTrajectory& traj,
                        const std::vector<CountRecord>& records) {
    if (traj.samples.size() != records.size())
        throw UsageError("write_truth: trajectory and count records are misaligned");
    os << "n,t_seconds,x_hz,charge_ok\n";
    for (std::size_t i = 0; i < records.size(); ++i)
        os << records[i].n << ',' << format_double(records[i].t) << ','
           << format_double(rad_to_hz(traj.samples[i])) << ',' << (records[i].charge_ok ? 1 : 0)
           << '\n';
}

}  // namespace cptmag
