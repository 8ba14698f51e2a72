#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "pulseox/csv.hpp"

using namespace pulseox;

namespace {

std::string bin() {
    if (const char* e = std::getenv("PULSEOX_BIN")) return e;
    return "./pulseox";  // running by hand from the build tree
}

// returns the child's exit code, or -1 if it did not exit normally
int run(const std::string& args) {
    const int rc = std::system((bin() + " " + args).c_str());
    if (rc == -1 || !WIFEXITED(rc)) return -1;
    return WEXITSTATUS(rc);
}

const std::string tmp = "/tmp/pulseox_cli_";

// a 12 s clean capture and its 9 readings, generated once per test run
const std::string& readings_fixture() {
    static const std::string path = [] {
        const std::string samples = tmp + "fixture_samples.csv";
        const std::string readings = tmp + "fixture_readings.csv";
        REQUIRE(run("simulate --out " + samples +
                    " --seed 42 --fs 100 --duration 12 --sao2 97 --hr 72 >/dev/null") == 0);
        REQUIRE(run("estimate --in " + samples + " --out " + readings + " >/dev/null") == 0);
        return readings;
    }();
    return path;
}

}  // namespace

TEST_CASE("cli distinguishes usage errors from work") {
    CHECK(run(">/dev/null 2>&1") == 64);  // a subcommand is required
    CHECK(run("frobnicate >/dev/null 2>&1") == 64);
    CHECK(run("simulate --out " + tmp + "x.csv >/dev/null 2>&1") == 64);  // --seed is required
    CHECK(run("simulate --seed 1 >/dev/null 2>&1") == 64);                // --out too
    CHECK(run("--help >/dev/null 2>&1") == 0);
    CHECK(run("simulate --help >/dev/null 2>&1") == 0);
}

TEST_CASE("simulate and estimate round-trip through csv files") {
    const std::string samples = tmp + "samples.csv";
    const std::string readings = tmp + "readings.csv";
    CHECK(run("simulate --out " + samples +
              " --seed 42 --fs 100 --duration 12 --sao2 97 --hr 72 >/dev/null") == 0);
    CHECK(run("estimate --in " + samples + " --out " + readings + " >/dev/null") == 0);

    const auto rs = csvio::read_readings(readings);
    REQUIRE(rs.size() == 9);  // one per second once the first 4 s window fills
    for (const auto& r : rs) {
        CHECK(r.valid);
        CHECK(r.spo2_percent > 96.0);
        CHECK(r.spo2_percent < 98.0);
        REQUIRE(r.hr_bpm.has_value());
        CHECK(*r.hr_bpm > 71.0);
        CHECK(*r.hr_bpm < 73.0);
    }

    // same seed, same bytes; different seed, different noise
    const std::string again = tmp + "samples2.csv";
    CHECK(run("simulate --out " + again +
              " --seed 42 --fs 100 --duration 12 --sao2 97 --hr 72 >/dev/null") == 0);
    CHECK(csvio::slurp(again) == csvio::slurp(samples));
    CHECK(run("simulate --out " + again +
              " --seed 43 --fs 100 --duration 12 --sao2 97 --hr 72 >/dev/null") == 0);
    CHECK(csvio::slurp(again) != csvio::slurp(samples));

    std::remove(again.c_str());
    std::remove(readings.c_str());
    std::remove(samples.c_str());
}

TEST_CASE("config mistakes exit with the config code") {
    // unknown keys and --set syntax are rejected before any file is opened
    const std::string out = tmp + "cfgcase.csv";
    CHECK(run("estimate --in none.csv --out " + out +
              " --set estimator.bogus=1 2>/dev/null") == 2);
    CHECK(run("estimate --in none.csv --out " + out + " --set nonsense 2>/dev/null") == 2);

    // a known key with an out-of-range value is caught once the estimator
    // config is built, after the input is read
    const std::string tiny = tmp + "tiny.csv";
    csvio::spill(tiny, "t_s,red,ir,ambient\n0.000000,100,100,0\n0.010000,100,100,0\n");
    CHECK(run("estimate --in " + tiny + " --out " + out +
              " --set estimator.window_s=-1 2>/dev/null") == 2);
    std::remove(tiny.c_str());

    const std::string bad_cfg = tmp + "bad.cfg";
    csvio::spill(bad_cfg, "unknown.key = 3\n");
    CHECK(run("estimate --in none.csv --out " + out + " --config " + bad_cfg +
              " 2>/dev/null") == 2);
    std::remove(bad_cfg.c_str());
}

TEST_CASE("runtime failures exit with the runtime code") {
    CHECK(run("estimate --in " + tmp + "no_such_file.csv --out " + tmp +
              "r.csv 2>/dev/null") == 1);

    const std::string garbage = tmp + "garbage.csv";
    csvio::spill(garbage, "t_s,red,ir,ambient\nnot,numbers,at,all\n");
    CHECK(run("estimate --in " + garbage + " --out " + tmp + "r.csv 2>/dev/null") == 1);
    std::remove(garbage.c_str());
}

TEST_CASE("calibrate writes the same curve byte for byte") {
    const std::string a = tmp + "cal_a.cfg";
    const std::string b = tmp + "cal_b.cfg";
    CHECK(run("calibrate --out " + a + " >/dev/null") == 0);
    CHECK(run("calibrate --out " + b + " >/dev/null") == 0);
    const std::string text = csvio::slurp(a);
    CHECK(text == csvio::slurp(b));
    CHECK(text.find("calibration.c0") != std::string::npos);
    CHECK(text.find("calibration.r_lo") != std::string::npos);
    CHECK(text.find("extinction.wavelength_red_nm") != std::string::npos);
    std::remove(a.c_str());
    std::remove(b.c_str());
}

TEST_CASE("serve piped into monitor preserves the readings") {
    const std::string& readings = readings_fixture();
    const std::string sink = tmp + "pipe_sink.csv";
    const std::string log = tmp + "pipe_mon.log";

    const int rc = run("serve --in " + readings + " --stdout 2>/dev/null | " + bin() +
                       " monitor --stdin --out " + sink + " >" + log + " 2>&1");
    CHECK(rc == 0);
    const std::string mon_log = csvio::slurp(log);
    CHECK(mon_log.find("received 9 readings (0 malformed lines)") != std::string::npos);
    const std::string sunk = csvio::slurp(sink);
    CHECK(sunk.rfind("t_s,spo2,hr,recv_unix\n", 0) == 0);
    std::size_t rows = 0;
    for (char c : sunk)
        if (c == '\n') ++rows;
    CHECK(rows == 10);  // header + 9 readings
    std::remove(sink.c_str());
    std::remove(log.c_str());
}

TEST_CASE("serve and monitor talk over tcp") {
    const std::string& readings = readings_fixture();
    const std::string sink = tmp + "tcp_sink.csv";
    // serve picks an ephemeral port; scrape it from the log, then monitor
    const std::string script =
        bin() + " serve --in " + readings + " --port 0 --max-clients 1 >" + tmp +
        "serve.log 2>&1 &\n"
        "SPID=$!\n"
        "PORT=\"\"\n"
        "for i in $(seq 1 100); do\n"
        "  PORT=$(sed -n 's/^listening on 127\\.0\\.0\\.1:\\([0-9][0-9]*\\)$/\\1/p' " +
        tmp + "serve.log)\n"
        "  [ -n \"$PORT\" ] && break\n"
        "  sleep 0.05\n"
        "done\n"
        "[ -n \"$PORT\" ] || { kill $SPID 2>/dev/null; exit 9; }\n" +
        bin() + " monitor --port $PORT --out " + sink + " >" + tmp + "mon.log 2>&1\n"
        "RC=$?\n"
        "wait $SPID || exit 8\n"
        "exit $RC\n";
    const int rc = std::system(script.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    CHECK(WEXITSTATUS(rc) == 0);
    CHECK(csvio::slurp(tmp + "serve.log").find("served 1 session(s)") != std::string::npos);
    CHECK(csvio::slurp(tmp + "mon.log").find("received 9 readings") != std::string::npos);

    std::remove((tmp + "serve.log").c_str());
    std::remove((tmp + "mon.log").c_str());
    std::remove(sink.c_str());
}

TEST_CASE("bench emits reports and traces") {
    const std::string dir = tmp + "bench_out";
    std::filesystem::create_directories(dir);
    const std::string log = tmp + "bench.log";
    CHECK(run("bench --seed 7 --readings 3 --out-dir " + dir + " >" + log) == 0);

    CHECK(csvio::slurp(log).find("clean_baseline") != std::string::npos);
    CHECK(std::filesystem::exists(dir + "/report.txt"));
    CHECK(std::filesystem::exists(dir + "/trace_motion_burst.csv"));
    const std::string csv = csvio::slurp(dir + "/report.csv");
    CHECK(csv.rfind("session,readings,valid,", 0) == 0);
    std::size_t rows = 0;
    for (char c : csv)
        if (c == '\n') ++rows;
    CHECK(rows == 8);  // header + seven sessions

    std::filesystem::remove_all(dir);
    std::remove(log.c_str());
}
