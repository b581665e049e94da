#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "cptmag/cpt_model.hpp"
#include "cptmag/photon_stream.hpp"
#include "cptmag/rng.hpp"
#include "cptmag/units.hpp"

using namespace cptmag;

namespace {
const OuParams kOu{hz_to_rad(2.2e6), 5e-3, 0.0};
const CptLineshape kShape{hz_to_rad(11.6e6), 0.9, 0.5};
const CycleTiming kTiming{10e-6, 100e-6, 10e-6};

RateCalibration canonical_cal() { return calibrate_rate(kShape, hz_to_rad(4e6), kOu, 5400.0); }

std::vector<CountRecord> canonical_counts(double seconds, double fidelity, std::uint64_t seed) {
    const auto traj = generate_trajectory(kOu, kTiming.update_interval,
                                          static_cast<std::size_t>(std::llround(seconds / 1e-5)),
                                          derive_seed(seed, "ou-trajectory", 0));
    ChargeModel charge{fidelity, 0.0};
    return simulate_counts(traj, kTiming, canonical_cal(), kShape, charge,
                           derive_seed(seed, "counts", 0));
}
}  // namespace

TEST_CASE("cycle timing quantization") {
    CHECK(kTiming.init_intervals() == 1);
    CHECK(kTiming.cpt_intervals() == 10);
    CHECK(kTiming.cycle_intervals() == 11);
    CHECK_NOTHROW(kTiming.validate());

    CycleTiming t = kTiming;
    t.init_duration = 25e-6;  // not a multiple of tau
    CHECK_THROWS_AS(t.validate(), UsageError);
    t = kTiming;
    t.cpt_duration = 0.0;
    CHECK_THROWS_AS(t.validate(), UsageError);
    t = kTiming;
    t.update_interval = 0.0;
    CHECK_THROWS_AS(t.validate(), UsageError);
    t = kTiming;
    t.init_duration = 0.0;  // a cycle without green pulses is allowed
    CHECK_NOTHROW(t.validate());
    CHECK(t.cycle_intervals() == 10);
}

TEST_CASE("charge model validation") {
    CHECK_THROWS_AS((ChargeModel{1.5, 0.0}.validate()), UsageError);
    CHECK_THROWS_AS((ChargeModel{-0.1, 0.0}.validate()), UsageError);
    CHECK_THROWS_AS((ChargeModel{0.5, -1.0}.validate()), UsageError);
    CHECK_NOTHROW(ChargeModel{0.75, 0.0}.validate());
}

TEST_CASE("count stream structure follows the cycle") {
    const auto counts = canonical_counts(0.011, 1.0, 99);  // 100 cycles
    REQUIRE(counts.size() == 1100);
    for (const auto& rec : counts) {
        CHECK(rec.in_init == (rec.n % 11 == 0));
        if (rec.in_init) CHECK(rec.y == 0);
        CHECK(rec.t == Catch::Approx(rec.n * 1e-5).margin(1e-12));
        CHECK(rec.charge_ok);  // ideal charge
    }
}

TEST_CASE("count stream is deterministic in the seed") {
    const auto a = canonical_counts(0.02, 0.75, 4);
    const auto b = canonical_counts(0.02, 0.75, 4);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].charge_ok == b[i].charge_ok);
    }
}

TEST_CASE("empirical count rate matches the calibration target") {
    const auto counts = canonical_counts(5.0, 1.0, 2718);
    double total = 0.0;
    std::int64_t live = 0;
    for (const auto& rec : counts) {
        if (rec.in_init) continue;
        total += static_cast<double>(rec.y);
        ++live;
    }
    const double rate = total / (static_cast<double>(live) * kTiming.update_interval);
    CHECK(std::abs(rate / 5400.0 - 1.0) < 0.10);
}

TEST_CASE("charge failures share the signal noise stream") {
    // Same master seed, different fidelity: wherever the lossy run kept its
    // charge, the photon counts must be bit-identical to the ideal run.
    const auto ideal = canonical_counts(0.1, 1.0, 31);
    const auto lossy = canonical_counts(0.1, 0.75, 31);
    REQUIRE(ideal.size() == lossy.size());
    std::int64_t kept = 0, dropped = 0, dropped_y = 0;
    for (std::size_t i = 0; i < ideal.size(); ++i) {
        if (lossy[i].charge_ok) {
            CHECK(lossy[i].y == ideal[i].y);
            ++kept;
        } else {
            dropped_y += lossy[i].y;
            ++dropped;
        }
    }
    CHECK(kept > 0);
    CHECK(dropped > 0);
    CHECK(dropped_y == 0);  // neutral_rate = 0: failed cycles are dark
}

TEST_CASE("neutral background counts appear on failed cycles") {
    const auto traj = generate_trajectory(kOu, 1e-5, 11000, 1);
    ChargeModel charge{0.5, 2e5};  // mean 2 background counts per interval
    const auto counts = simulate_counts(traj, kTiming, canonical_cal(), kShape, charge, 77);
    double failed_total = 0.0;
    std::int64_t failed = 0;
    for (const auto& rec : counts) {
        if (rec.in_init || rec.charge_ok) continue;
        failed_total += static_cast<double>(rec.y);
        ++failed;
    }
    REQUIRE(failed > 1000);
    const double mean_y = failed_total / static_cast<double>(failed);
    CHECK(mean_y == Catch::Approx(2.0).epsilon(0.15));
}

TEST_CASE("count csv round-trips exactly") {
    const auto counts = canonical_counts(0.005, 0.75, 12);
    std::ostringstream os;
    write_counts(os, counts);
    std::istringstream is(os.str());
    const auto back = replay_counts(is, "mem");
    REQUIRE(back.size() == counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        CHECK(back[i].n == counts[i].n);
        CHECK(back[i].t == counts[i].t);  // %.17g: bit-exact
        CHECK(back[i].y == counts[i].y);
        CHECK(back[i].in_init == counts[i].in_init);
        CHECK(back[i].charge_ok);  // never serialized; replay defaults to true
    }
}

TEST_CASE("count replay rejects malformed input") {
    auto replay_str = [](const std::string& s) {
        std::istringstream is(s);
        return replay_counts(is, "mem");
    };
    CHECK_THROWS_AS(replay_str(""), DataError);                        // no header
    CHECK_THROWS_AS(replay_str("n,t,y,in_init\n"), DataError);         // wrong header
    CHECK_THROWS_AS(replay_str("n,t_seconds,y,in_init\n0,0.0,1\n"), DataError);
    CHECK_THROWS_AS(replay_str("n,t_seconds,y,in_init\n0,0.0,-1,0\n"), DataError);
    CHECK_THROWS_AS(replay_str("n,t_seconds,y,in_init\n0,0.0,1,2\n"), DataError);
    CHECK_THROWS_AS(replay_str("n,t_seconds,y,in_init\n0,0.0,3,1\n"), DataError);
    CHECK_THROWS_AS(replay_str("n,t_seconds,y,in_init\n0,zz,1,0\n"), DataError);
    CHECK_NOTHROW(replay_str("n,t_seconds,y,in_init\n0,0.0,3,0\n"));
    // Errors carry the line number.
    try {
        replay_str("n,t_seconds,y,in_init\n0,0.0,1,0\n1,1e-5,xx,0\n");
        FAIL("expected throw");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3") != std::string::npos);
    }
}

TEST_CASE("truth sidecar carries field and charge flag") {
    const auto traj = generate_trajectory(kOu, 1e-5, 22, 5);
    const auto counts = simulate_counts(traj, kTiming, canonical_cal(), kShape,
                                        ChargeModel{0.5, 0.0}, 5);
    std::ostringstream os;
    write_truth(os, traj, counts);
    std::istringstream is(os.str());
    std::string line;
    REQUIRE(std::getline(is, line));
    CHECK(line == "n,t_seconds,x_hz,charge_ok");
    REQUIRE(std::getline(is, line));
    const auto fields = split_csv_line(line);
    REQUIRE(fields.size() == 4);
    CHECK(parse_double(fields[2], "x") ==
          Catch::Approx(rad_to_hz(traj.samples[0])).epsilon(1e-15));

    OuTrajectory longer = traj;
    longer.samples.push_back(0.0);
    std::ostringstream os2;
    CHECK_THROWS_AS(write_truth(os2, longer, counts), UsageError);
}

TEST_CASE("trajectory dt must match the update interval") {
    const auto traj = generate_trajectory(kOu, 2e-5, 100, 5);
    CHECK_THROWS_AS(
        simulate_counts(traj, kTiming, canonical_cal(), kShape, ChargeModel{1.0, 0.0}, 5),
        UsageError);
}
