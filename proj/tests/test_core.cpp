#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "cptmag/config.hpp"
#include "cptmag/csv.hpp"
#include "cptmag/errors.hpp"
#include "cptmag/rng.hpp"
#include "cptmag/units.hpp"

using namespace cptmag;

TEST_CASE("seed derivation is deterministic and purpose-separated") {
    static_assert(fnv1a64("poisson") != fnv1a64("charge"));
    const std::uint64_t master = 12345;
    CHECK(derive_seed(master, "poisson", 0) == derive_seed(master, "poisson", 0));
    CHECK(derive_seed(master, "poisson", 0) != derive_seed(master, "poisson", 1));
    CHECK(derive_seed(master, "poisson", 0) != derive_seed(master, "charge", 0));
    CHECK(derive_seed(master, "poisson", 0) != derive_seed(master + 1, "poisson", 0));

    auto a = make_engine(derive_seed(master, "x", 7));
    auto b = make_engine(derive_seed(master, "x", 7));
    for (int i = 0; i < 16; ++i) CHECK(a() == b());
}

TEST_CASE("derived seeds look independent across indices") {
    // Crude whiteness check: bit-level correlation of consecutive seeds.
    int diff_bits = 0;
    for (std::uint64_t i = 0; i + 1 < 512; ++i) {
        const std::uint64_t x = derive_seed(9, "trajectory", i);
        const std::uint64_t y = derive_seed(9, "trajectory", i + 1);
        diff_bits += __builtin_popcountll(x ^ y);
    }
    const double mean_bits = diff_bits / 511.0;
    CHECK(mean_bits > 24.0);  // ~32 expected for independent words
    CHECK(mean_bits < 40.0);
}

TEST_CASE("format_double round-trips exactly") {
    for (double v : {0.0, 1.0, -1.0, 1.0 / 3.0, 2.2e6, 6.283185307179586, 1e-17, -4.25e-9,
                     5400.0, 27833.4}) {
        CHECK(parse_double(format_double(v), "t") == v);
    }
}

TEST_CASE("numeric parsing rejects garbage with context") {
    CHECK_THROWS_AS(parse_double("abc", "ctx"), DataError);
    CHECK_THROWS_AS(parse_double("1.5x", "ctx"), DataError);
    CHECK_THROWS_AS(parse_double("", "ctx"), DataError);
    CHECK_THROWS_AS(parse_int("1.5", "ctx"), DataError);
    CHECK(parse_int("-42", "ctx") == -42);
    try {
        parse_double("zz", "row 7 column y");
        FAIL("expected throw");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("row 7 column y") != std::string::npos);
    }
}

TEST_CASE("csv line splitting keeps empty fields") {
    auto f = split_csv_line("a,b,c");
    REQUIRE(f.size() == 3);
    CHECK(f[0] == "a");
    CHECK(f[2] == "c");
    CHECK(split_csv_line("a,,c").size() == 3);
    CHECK(split_csv_line("a,,c")[1].empty());
    CHECK(split_csv_line("").size() == 1);
    CHECK(split_csv_line("a,").size() == 2);
}

TEST_CASE("csv reader enforces header and column counts") {
    const std::vector<std::string> header = {"n", "y"};
    {
        std::istringstream in("n,y\n1,2\n3,4\n");
        CsvReader r(in, "good", header);
        REQUIRE(r.had_header());
        std::vector<std::string_view> cols;
        REQUIRE(r.next_row(cols));
        CHECK(cols[0] == "1");
        REQUIRE(r.next_row(cols));
        CHECK(cols[1] == "4");
        CHECK_FALSE(r.next_row(cols));
    }
    {
        std::istringstream in("n,z\n");
        CHECK_THROWS_AS(CsvReader(in, "bad", header), DataError);
    }
    {
        std::istringstream in("n,y\n1,2,3\n");
        CsvReader r(in, "wide", header);
        std::vector<std::string_view> cols;
        CHECK_THROWS_AS(r.next_row(cols), DataError);
    }
    {
        std::istringstream in("");
        CsvReader r(in, "empty", header);
        CHECK_FALSE(r.had_header());
    }
    {
        // Windows line endings are tolerated.
        std::istringstream in("n,y\r\n1,2\r\n");
        CsvReader r(in, "crlf", header);
        std::vector<std::string_view> cols;
        REQUIRE(r.next_row(cols));
        CHECK(cols[1] == "2");
    }
}

TEST_CASE("config parses dotted keys, comments, and overrides") {
    std::istringstream in(
        "# comment\n"
        "\n"
        "ou.sigma_hz = 2.2e6\n"
        "  run.seed=77\n"
        "name = hello world\n");
    Config c = Config::from_stream(in, "test.cfg");
    CHECK(c.get_double("ou.sigma_hz", 0.0) == 2.2e6);
    CHECK(c.get_u64("run.seed", 0) == 77);
    CHECK(c.get_string("name", "") == "hello world");
    CHECK(c.get_double("missing", 4.5) == 4.5);
    c.set("run.seed", "88");
    CHECK(c.get_u64("run.seed", 0) == 88);

    CHECK_THROWS_AS((c.validate_keys(std::vector<std::string>{"ou.sigma_hz", "run.seed"})),
                    UsageError);
    CHECK_NOTHROW(
        (c.validate_keys(std::vector<std::string>{"ou.sigma_hz", "run.seed", "name"})));

    // echo() round-trips and is sorted deterministically.
    std::istringstream echo_in(c.echo());
    Config c2 = Config::from_stream(echo_in, "echo");
    CHECK(c2.values() == c.values());

    std::istringstream bad("key value without equals\n");
    CHECK_THROWS_AS(Config::from_stream(bad, "bad.cfg"), DataError);
}

TEST_CASE("config rejects malformed numerics") {
    Config c;
    c.set("k", "1.2.3");
    CHECK_THROWS_AS(c.get_double("k", 0.0), DataError);
    c.set("b", "maybe");
    CHECK_THROWS_AS(c.get_bool("b", false), DataError);
    c.set("u", "-4");
    CHECK_THROWS_AS(c.get_u64("u", 0), DataError);
}

TEST_CASE("unit conversions invert") {
    CHECK(rad_to_hz(hz_to_rad(2.2e6)) == Catch::Approx(2.2e6).epsilon(1e-15));
    CHECK(hz_to_rad(1.0) == Catch::Approx(6.283185307179586).epsilon(1e-15));
}
