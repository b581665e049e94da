#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "cptmag/bounds.hpp"
#include "cptmag/csv.hpp"
#include "cptmag/units.hpp"

using namespace cptmag;

namespace {
const OuParams kOu{hz_to_rad(2.2e6), 5e-3, 0.0};
const CptLineshape kShape{hz_to_rad(11.6e6), 0.9, 0.5};
const double kTau = 1e-5;

RateCalibration canonical_cal() {
    return calibrate_rate(kShape, hz_to_rad(4e6), kOu, 5400.0);
}
}  // namespace

TEST_CASE("fisher information matches hand arithmetic") {
    const auto cal = canonical_cal();
    const double x = hz_to_rad(1.5e6);
    const double delta = cal.bias - x;
    const double w2 = kShape.fwhm * kShape.fwhm;
    const double denom = w2 + 4.0 * delta * delta;
    const double rho = kShape.background_pop * (1.0 - kShape.contrast * w2 / denom);
    const double drho_dd = 8.0 * kShape.background_pop * kShape.contrast * w2 * delta /
                           (denom * denom);
    const double ybar = cal.counts_per_pop_per_second * kTau * rho;
    const double dybar_dx = -cal.counts_per_pop_per_second * kTau * drho_dd;
    const double want = dybar_dx * dybar_dx / ybar;
    CHECK(fisher_information(x, kTau, cal, kShape) == Catch::Approx(want).epsilon(1e-12));

    // Stationary points of the count rate carry no information.
    CHECK(fisher_information(cal.bias, kTau, cal, kShape) == 0.0);
    CptLineshape flat = kShape;
    flat.contrast = 0.0;
    CHECK(fisher_information(x, kTau, cal, flat) == 0.0);

    // The lineshape is even about the bias.
    const double d = hz_to_rad(2.7e6);
    CHECK(fisher_information(cal.bias + d, kTau, cal, kShape) ==
          Catch::Approx(fisher_information(cal.bias - d, kTau, cal, kShape)).epsilon(1e-12));
}

TEST_CASE("fisher profile samples the grid in order") {
    const auto cal = canonical_cal();
    const std::vector<double> xs = {-kOu.sigma, 0.0, kOu.sigma};
    const auto prof = fisher_profile(xs, kTau, cal, kShape);
    REQUIRE(prof.x == xs);
    REQUIRE(prof.information.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(prof.information[i] ==
              Catch::Approx(fisher_information(xs[i], kTau, cal, kShape)).epsilon(1e-15));
}

TEST_CASE("steady-state bound reproduces the reference curve") {
    const auto cal = canonical_cal();
    const double pins[4][2] = {{1e-3, 0.6736}, {2e-3, 0.5568}, {5e-3, 0.4080}, {10e-3, 0.3115}};
    double prev = 1.0;
    for (const auto& [tc, want] : pins) {
        OuParams ou = kOu;
        ou.tau_c = tc;
        const auto res = bayesian_crlb(ou, kTau, cal, kShape);
        CHECK(res.bound_over_sigma2 == Catch::Approx(want).margin(5e-4));
        CHECK(res.bound_variance ==
              Catch::Approx(res.bound_over_sigma2 * kOu.sigma * kOu.sigma).epsilon(1e-12));
        CHECK(res.mean_information * kOu.sigma * kOu.sigma == Catch::Approx(0.0141).margin(2e-4));
        CHECK(res.iterations >= 1);
        CHECK(res.iterations < 100000);
        // Longer field memory tightens the bound.
        CHECK(res.bound_over_sigma2 < prev);
        prev = res.bound_over_sigma2;
    }
}

TEST_CASE("more photons tighten the bound") {
    const auto cal = canonical_cal();
    RateCalibration brighter = cal;
    brighter.counts_per_pop_per_second *= 4.0;
    const auto base = bayesian_crlb(kOu, kTau, cal, kShape);
    const auto bright = bayesian_crlb(kOu, kTau, brighter, kShape);
    CHECK(bright.mean_information > 3.9 * base.mean_information);
    CHECK(bright.bound_over_sigma2 < base.bound_over_sigma2);
}

TEST_CASE("flat lineshape gives back the prior variance exactly") {
    // With zero information the recursion's fixed point is J = 1/sigma^2.
    CptLineshape flat = kShape;
    flat.contrast = 0.0;
    const auto cal = canonical_cal();
    const auto res = bayesian_crlb(kOu, kTau, cal, flat);
    CHECK(res.mean_information == 0.0);
    CHECK(res.bound_over_sigma2 == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(res.bound_variance == Catch::Approx(kOu.sigma * kOu.sigma).epsilon(1e-12));
}

TEST_CASE("static-field limit reports an unbounded information accumulation") {
    // tau/tau_c below the smallest denormal, so the per-step process noise q
    // underflows to exactly zero: information accumulates forever, bound -> 0.
    OuParams ou = kOu;
    ou.tau_c = 1e10;
    const auto cal = canonical_cal();
    const auto res = bayesian_crlb(ou, 1e-320, cal, kShape);
    CHECK(std::isinf(res.steady_state_info));
    CHECK(res.bound_variance == 0.0);
    CHECK(res.bound_over_sigma2 == 0.0);
}

TEST_CASE("bound input validation") {
    const auto cal = canonical_cal();
    CHECK_THROWS_AS(bayesian_crlb(kOu, 0.0, cal, kShape), UsageError);
    CHECK_THROWS_AS(bayesian_crlb(kOu, -1e-5, cal, kShape), UsageError);
    OuParams bad = kOu;
    bad.sigma = -1.0;
    CHECK_THROWS_AS(bayesian_crlb(bad, kTau, cal, kShape), UsageError);

    // Tiny node requests are floored, not rejected.
    const auto coarse = bayesian_crlb(kOu, kTau, cal, kShape, 1);
    const auto fine = bayesian_crlb(kOu, kTau, cal, kShape, 96);
    CHECK(coarse.bound_over_sigma2 == Catch::Approx(fine.bound_over_sigma2).epsilon(0.05));
}

TEST_CASE("crlb csv format") {
    std::ostringstream os;
    write_crlb_csv(os, {{1e-3, 0.6736}, {5e-3, 0.408}});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "tau_c_s,bound_over_sigma2");
    std::getline(is, line);
    auto fields = split_csv_line(line);
    REQUIRE(fields.size() == 2);
    CHECK(parse_double(fields[0], "t") == 1e-3);  // %.17g round-trips exactly
    CHECK(parse_double(fields[1], "t") == 0.6736);
    std::getline(is, line);
    fields = split_csv_line(line);
    CHECK(parse_double(fields[0], "t") == 5e-3);
    CHECK(parse_double(fields[1], "t") == 0.408);
    CHECK_FALSE(static_cast<bool>(std::getline(is, line)));
}
