#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#ifndef CPTMAG_CLI_PATH
#error "CPTMAG_CLI_PATH must point at the built command-line binary"
#endif

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "cptmag_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

RunResult run_cli(const std::string& args, const std::string& stdin_path = "") {
    static int counter = 0;
    const fs::path out = work_dir() / ("stdout." + std::to_string(counter));
    const fs::path err = work_dir() / ("stderr." + std::to_string(counter));
    ++counter;
    std::string cmd = std::string(CPTMAG_CLI_PATH) + " " + args;
    if (!stdin_path.empty()) cmd += " < " + stdin_path;
    cmd += " > " + out.string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out);
    r.err = read_file(err);
    return r;
}

const std::string& tiny_config_path() {
    static const std::string path = [] {
        const fs::path p = work_dir() / "tiny.cfg";
        write_file(p,
                   "ou.tau_c_s = 1e-3\n"
                   "grid.n_bins = 64\n"
                   "run.duration_s = 0.02\n"
                   "run.n_trajectories = 2\n"
                   "run.threads = 1\n"
                   "run.seed = 99\n");
        return p.string();
    }();
    return path;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) n += (c == '\n');
    return n;
}

}  // namespace

TEST_CASE("cli simulate writes counts, truth, and a manifest") {
    const fs::path counts = work_dir() / "counts.csv";
    const fs::path truth = work_dir() / "truth.csv";
    const auto r = run_cli("simulate --config " + tiny_config_path() + " --out " + counts.string() +
                           " --debug-truth " + truth.string());
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(counts));
    REQUIRE(fs::exists(truth));
    REQUIRE(fs::exists(counts.string() + ".manifest"));

    const std::string counts_text = read_file(counts);
    CHECK(counts_text.rfind("n,t_seconds,y,in_init\n", 0) == 0);
    CHECK(count_lines(counts_text) == 2001);  // header + 0.02 s / 10 us
    const std::string truth_text = read_file(truth);
    CHECK(truth_text.rfind("n,t_seconds,x_hz,charge_ok\n", 0) == 0);
    CHECK(count_lines(truth_text) == 2001);

    const std::string manifest = read_file(counts.string() + ".manifest");
    CHECK(manifest.find("seed = 99") != std::string::npos);
    CHECK(manifest.find("fingerprint = ") != std::string::npos);
    CHECK(manifest.find("run.duration_s = 0.02") != std::string::npos);

    // Deterministic: a second run produces the identical byte stream.
    const fs::path counts2 = work_dir() / "counts2.csv";
    REQUIRE(run_cli("simulate --config " + tiny_config_path() + " --out " + counts2.string())
                .exit_code == 0);
    CHECK(read_file(counts2) == counts_text);

    // A different master seed changes the data.
    const fs::path counts3 = work_dir() / "counts3.csv";
    REQUIRE(run_cli("simulate --config " + tiny_config_path() + " --seed 100 --out " +
                    counts3.string())
                .exit_code == 0);
    CHECK(read_file(counts3) != counts_text);
    CHECK(read_file(counts3.string() + ".manifest").find("seed = 100") != std::string::npos);
}

TEST_CASE("cli estimate replays counts through one estimator") {
    const fs::path counts = work_dir() / "counts.csv";
    REQUIRE(fs::exists(counts));  // produced by the simulate test case
    const fs::path est = work_dir() / "est.csv";
    const auto r = run_cli("estimate --config " + tiny_config_path() + " --in " + counts.string() +
                           " --out " + est.string());
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    const std::string est_text = read_file(est);
    CHECK(est_text.rfind("n,t_seconds,xhat_hz,posterior_sd_hz,photons_seen\n", 0) == 0);
    CHECK(count_lines(est_text) == 2001);

    // Named estimators and aliases are accepted.
    const fs::path est2 = work_dir() / "est_avg.csv";
    CHECK(run_cli("estimate --config " + tiny_config_path() + " --in " + counts.string() +
                  " --out " + est2.string() + " --estimator avg")
              .exit_code == 0);
    CHECK(run_cli("estimate --config " + tiny_config_path() + " --in " + counts.string() +
                  " --out " + est2.string() + " --estimator kalman")
              .exit_code == 1);

    // Missing input file is a data error.
    CHECK(run_cli("estimate --config " + tiny_config_path() + " --in " +
                  (work_dir() / "nope.csv").string() + " --out " + est2.string())
              .exit_code == 2);
}

TEST_CASE("cli stream matches batch estimation byte for byte") {
    const fs::path counts = work_dir() / "counts.csv";
    const fs::path est = work_dir() / "est.csv";
    REQUIRE(fs::exists(counts));
    REQUIRE(fs::exists(est));
    const auto r = run_cli("stream --config " + tiny_config_path(), counts.string());
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(r.out == read_file(est));
}

TEST_CASE("cli stream handles empty and malformed input") {
    // Empty stdin: success, no output rows.
    write_file(work_dir() / "empty.csv", "");
    const auto empty = run_cli("stream --config " + tiny_config_path(),
                               (work_dir() / "empty.csv").string());
    CHECK(empty.exit_code == 0);
    CHECK(empty.out.empty());

    // A corrupted record mid-stream: skipped (with a warning) by default.
    write_file(work_dir() / "bad.csv",
               "n,t_seconds,y,in_init\n"
               "0,0,0,1\n"
               "1,1e-05,3,0\n"
               "2,2e-05,not_a_count,0\n"
               "3,3e-05,1,0\n");
    const auto lax = run_cli("stream --config " + tiny_config_path(),
                             (work_dir() / "bad.csv").string());
    CHECK(lax.exit_code == 0);
    CHECK(count_lines(lax.out) == 4);  // header + 3 surviving records
    CHECK(lax.err.find("stdin:4") != std::string::npos);

    // --strict aborts with the data-error exit code and names the line.
    const auto strict = run_cli("stream --strict --config " + tiny_config_path(),
                                (work_dir() / "bad.csv").string());
    CHECK(strict.exit_code == 2);
    CHECK(strict.err.find("stdin:4") != std::string::npos);

    // A wrong header is always fatal.
    write_file(work_dir() / "hdr.csv", "n,t_seconds,photons,in_init\n0,0,0,1\n");
    const auto hdr = run_cli("stream --config " + tiny_config_path(),
                             (work_dir() / "hdr.csv").string());
    CHECK(hdr.exit_code == 2);
}

TEST_CASE("cli rejects bad configuration") {
    const auto unknown = run_cli("crlb --config " + tiny_config_path() + " --set nope=1 --out " +
                                 (work_dir() / "x.csv").string());
    CHECK(unknown.exit_code == 1);
    CHECK(unknown.err.find("nope") != std::string::npos);

    const auto malformed = run_cli("crlb --config " + tiny_config_path() + " --set grid.n_bins " +
                                   "--out " + (work_dir() / "x.csv").string());
    CHECK(malformed.exit_code == 1);

    const auto missing = run_cli("crlb --config " + (work_dir() / "absent.cfg").string() +
                                 " --out " + (work_dir() / "x.csv").string());
    CHECK(missing.exit_code == 2);

    // No subcommand: usage error from the parser.
    CHECK(run_cli("").exit_code != 0);
}

TEST_CASE("cli crlb writes the bound curve") {
    const fs::path out = work_dir() / "crlb.csv";
    const auto r = run_cli("crlb --config " + tiny_config_path() +
                           " --values 0.001,0.005 --out " + out.string());
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    const std::string text = read_file(out);
    CHECK(text.rfind("tau_c_s,bound_over_sigma2\n", 0) == 0);
    CHECK(count_lines(text) == 3);
}

TEST_CASE("cli sweeps") {
    const fs::path out = work_dir() / "sweep.csv";
    const auto r = run_cli("sweep-tauc --config " + tiny_config_path() +
                           " --values 0.001 --out " + out.string());
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    const std::string text = read_file(out);
    CHECK(text.rfind("tau_c_s,estimator,var_over_sigma2,stderr,bound_over_sigma2\n", 0) == 0);
    CHECK(count_lines(text) == 4);  // three estimators at one point
    CHECK(text.find("ou-bayesian") != std::string::npos);
    CHECK(text.find("simple-bayesian") != std::string::npos);
    CHECK(text.find("avg-count") != std::string::npos);

    // Scalar sweeps take exactly one estimator.
    const auto multi = run_cli("sweep-bias --config " + tiny_config_path() +
                               " --values 0,4e6 --estimator ou-bayesian --estimator avg-count " +
                               "--out " + out.string());
    CHECK(multi.exit_code == 1);

    const fs::path bout = work_dir() / "bias.csv";
    const auto bias = run_cli("sweep-bias --config " + tiny_config_path() +
                              " --values 0,4e6 --out " + bout.string());
    CAPTURE(bias.err);
    REQUIRE(bias.exit_code == 0);
    CHECK(read_file(bout).rfind("bias_hz,var_over_sigma2,stderr\n", 0) == 0);
    CHECK(count_lines(read_file(bout)) == 3);
}

TEST_CASE("cli bench reports latency") {
    const fs::path out = work_dir() / "bench.csv";
    const auto r = run_cli("bench --config " + tiny_config_path() + " --updates 2000 --out " +
                           out.string());
    CAPTURE(r.err);
    REQUIRE(r.exit_code == 0);
    CHECK(read_file(out).rfind("p50_ns,p99_ns,max_ns\n", 0) == 0);
    CHECK(r.err.find("p50") != std::string::npos);

    // Without --out the CSV goes to stdout.
    const auto piped = run_cli("bench --config " + tiny_config_path() + " --updates 2000");
    REQUIRE(piped.exit_code == 0);
    CHECK(piped.out.rfind("p50_ns,p99_ns,max_ns\n", 0) == 0);
}
