// Release gate for the oximeter twin.  Each criterion prints one PASS/FAIL
// line with its runtime; the exit code is the number of failed criteria.
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "pulseox/bench.hpp"
#include "pulseox/codec.hpp"
#include "pulseox/estimator.hpp"
#include "pulseox/optics.hpp"
#include "pulseox/ppg.hpp"
#include "pulseox/rng.hpp"
#include "pulseox/wire.hpp"

namespace {

using namespace pulseox;

struct Gate {
    std::vector<std::string> fails;
    void that(bool ok, const std::string& what) {
        if (!ok) fails.push_back(what);
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

// --- 1: clean-session accuracy ---------------------------------------------

void c1_session_accuracy(Gate& g) {
    est::EstimatorConfig cfg;
    struct Case {
        const char* label;
        double sao2, hr;
        std::uint64_t seed;
    } cases[] = {{"A", 97.0, 72.0, 201}, {"H", 98.0, 65.0, 202}};
    for (const auto& c : cases) {
        bench::SessionSpec spec;
        spec.label = c.label;
        spec.profile.sao2_percent = c.sao2;
        spec.profile.heart_rate_bpm = c.hr;
        spec.seed = c.seed;
        spec.n_readings = 20;
        const auto r = bench::run_session(spec, cfg);
        g.that(r.valid_count == 20, std::string(c.label) + ": not all readings valid");
        g.that(r.spo2_err.abs_rel <= 0.001,
               std::string(c.label) +
                   fmt(": mean |rel err| %.6f exceeds 0.001", r.spo2_err.abs_rel));
    }
}

// --- 2: minute-long trace overlap ------------------------------------------

void c2_minute_trace(Gate& g) {
    est::EstimatorConfig cfg;
    bench::SessionSpec spec;
    spec.label = "minute";
    spec.seed = 42;
    spec.n_readings = 57;  // 60 s of signal at the default 4 s window
    const auto r = bench::run_session(spec, cfg);
    g.that(r.valid_count == 57, "not all readings valid");
    g.that(r.spo2_mean_abs_pp <= 1.0,
           fmt("mean |true-measured| %.4f pp exceeds 1.0", r.spo2_mean_abs_pp));
    std::size_t within = 0;
    for (std::size_t i = 0; i < r.spo2_true.size(); ++i)
        if (std::fabs(r.spo2_true[i] - r.spo2_measured[i]) <= 1.0) ++within;
    const double frac = static_cast<double>(within) / static_cast<double>(r.spo2_true.size());
    g.that(frac >= 0.90, fmt("only %.0f%% of seconds within 1 pp", 100.0 * frac));
}

// --- 3: common-mode supply ripple ------------------------------------------

void c3_supply_ripple(Gate& g) {
    est::EstimatorConfig cfg;
    ppg::PhysioProfile profile;
    ppg::ArtifactSchedule still{}, ripple{};
    ripple.supply_gain.amplitude_fraction = 0.10;
    ripple.supply_gain.freq_hz = 0.1;
    const auto base = est::process_stream(ppg::synthesize(profile, still, 100.0, 23.0, 77), cfg);
    const auto wob = est::process_stream(ppg::synthesize(profile, ripple, 100.0, 23.0, 77), cfg);
    g.that(base.size() == 20 && wob.size() == 20, "expected 20 readings per run");
    double dmax = 0.0;
    for (std::size_t i = 0; i < base.size() && i < wob.size(); ++i) {
        g.that(base[i].valid && wob[i].valid, fmt("reading %g invalid", double(i)));
        dmax = std::max(dmax, std::fabs(base[i].spo2_percent - wob[i].spo2_percent));
    }
    g.that(dmax <= 0.1, fmt("max per-reading shift %.4f pp exceeds 0.1", dmax));
}

// --- 4: ambient light rejection --------------------------------------------

void c4_ambient_rejection(Gate& g) {
    est::EstimatorConfig on;
    est::EstimatorConfig off = on;
    off.ambient_subtraction = false;
    ppg::PhysioProfile profile;
    ppg::ArtifactSchedule lit{};
    lit.ambient_offset_counts = 0.2 * profile.dc_level_counts;
    const auto dark_stream = ppg::synthesize(profile, {}, 100.0, 23.0, 88);
    const auto lit_stream = ppg::synthesize(profile, lit, 100.0, 23.0, 88);
    const auto dark = est::process_stream(dark_stream, on);
    const auto sub_on = est::process_stream(lit_stream, on);
    const auto sub_off = est::process_stream(lit_stream, off);
    double dmax = 0.0, mae_on = 0.0, mae_off = 0.0;
    for (std::size_t i = 0; i < dark.size(); ++i) {
        dmax = std::max(dmax, std::fabs(sub_on[i].spo2_percent - dark[i].spo2_percent));
        mae_on += std::fabs(sub_on[i].spo2_percent - profile.sao2_percent);
        mae_off += std::fabs(sub_off[i].spo2_percent - profile.sao2_percent);
    }
    mae_on /= static_cast<double>(dark.size());
    mae_off /= static_cast<double>(dark.size());
    g.that(dmax <= 1.0, fmt("subtraction on: %.4f pp from dark baseline", dmax));
    g.that(mae_off > mae_on,
           fmt("subtraction off (mae %.4f pp) not worse than on (%.4f pp)", mae_off, mae_on));
}

// --- 5: ratio closure and calibration round-trip ----------------------------

double loglog_slope(const ppg::SampleStream& stream) {
    const std::size_t n = stream.samples.size();
    double mx = 0.0, my = 0.0;
    for (const auto& s : stream.samples) {
        mx += std::log(static_cast<double>(s.ir));
        my += std::log(static_cast<double>(s.red));
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, sxy = 0.0;
    for (const auto& s : stream.samples) {
        const double x = std::log(static_cast<double>(s.ir)) - mx;
        const double y = std::log(static_cast<double>(s.red)) - my;
        sxx += x * x;
        sxy += x * y;
    }
    return sxy / sxx;
}

void c5_ratio_closure(Gate& g) {
    int i = 0;
    for (double s : {0.80, 0.85, 0.90, 0.95, 1.00}) {
        ppg::PhysioProfile profile;
        profile.sao2_percent = 100.0 * s;
        const auto stream = ppg::synthesize(profile, {}, 100.0, 20.0, 300 + i++);
        const double r_meas = loglog_slope(stream);
        const double r_th = optics::theoretical_R(s);
        const double rel = std::fabs(r_meas - r_th) / r_th;
        g.that(rel <= 1e-3, fmt("S=%.2f: measured R off by %.2e relative", s, rel));
    }
    const optics::CalibrationCurve curve = optics::default_calibration();
    double worst = 0.0;
    for (double spo2 = 70.0; spo2 <= 100.0 + 1e-9; spo2 += 0.5) {
        const double r = optics::theoretical_R(spo2 / 100.0);
        const double back = optics::invert_calibration(curve, r).spo2_percent;
        worst = std::max(worst, std::fabs(back - spo2));
    }
    g.that(worst <= 1.0, fmt("calibration round-trip off by %.4f pp", worst));
}

// --- 6: heart rate accuracy -------------------------------------------------

void c6_heart_rate(Gate& g) {
    est::EstimatorConfig cfg;
    for (double hr : {50.0, 72.0, 120.0, 150.0}) {
        ppg::PhysioProfile profile;
        profile.heart_rate_bpm = hr;
        if (hr >= 120.0) profile.sao2_percent = 95.0;
        const auto stream =
            ppg::synthesize(profile, {}, 100.0, 23.0, 400 + static_cast<std::uint64_t>(hr));
        const auto readings = est::process_stream(stream, cfg);
        g.that(readings.size() == 20, fmt("hr %.0f: expected 20 readings", hr));
        for (const auto& r : readings) {
            if (!r.hr_bpm.has_value()) {
                g.that(false, fmt("hr %.0f: reading without a rate", hr));
                continue;
            }
            g.that(std::fabs(*r.hr_bpm - hr) <= 2.0,
                   fmt("hr %.0f: estimate %.2f off by more than 2", hr, *r.hr_bpm));
        }
    }
}

// --- 7: codec round-trips and fault offsets ----------------------------------

i2c::I2CMessage random_message(std::uint64_t seed, std::uint64_t k) {
    auto draw = [&](std::uint64_t salt, std::uint64_t mod) {
        return splitmix64(seed, k * 97 + salt) % mod;
    };
    i2c::I2CMessage m;
    m.address = static_cast<std::uint8_t>(draw(0, 128));
    m.rw = draw(1, 2) ? i2c::Rw::read : i2c::Rw::write;
    const bool addr_acked = draw(2, 8) != 0;
    const std::size_t len = addr_acked ? draw(3, 9) : 0;
    for (std::size_t i = 0; i < len; ++i)
        m.payload.push_back(static_cast<std::uint8_t>(draw(16 + i, 256)));
    m.acks.push_back(addr_acked);
    for (std::size_t i = 0; i < len; ++i) m.acks.push_back(draw(64 + i, 16) != 0);
    return m;
}

std::string fixtures_path() {
    std::vector<std::string> roots;
    if (const char* e = std::getenv("PULSEOX_SRC_DIR")) roots.push_back(e);
    roots.push_back(".");
    roots.push_back("..");
    for (const auto& root : roots) {
        std::string p = root + "/tests/data/malformed_streams.txt";
        if (std::ifstream(p).good()) return p;
    }
    return "";
}

void c7_codec(Gate& g) {
    for (std::uint64_t k = 0; k < 10000; ++k) {
        const i2c::I2CMessage m = random_message(811, k);
        const auto r = i2c::decode(i2c::encode(m));
        if (!r.ok || r.msg.address != m.address || r.msg.rw != m.rw ||
            r.msg.payload != m.payload || r.msg.acks != m.acks) {
            g.that(false, fmt("round-trip %g failed", double(k)));
            return;
        }
    }

    const std::string path = fixtures_path();
    g.that(!path.empty(), "malformed-stream fixture file not found");
    if (path.empty()) return;
    std::ifstream in(path);
    std::string line;
    std::size_t cases = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::stringstream ss(line);
        std::string text, kind, offset_str;
        std::getline(ss, text, '|');
        std::getline(ss, kind, '|');
        std::getline(ss, offset_str);
        auto trim = [](std::string& s) {
            while (!s.empty() && s.back() == ' ') s.pop_back();
            while (!s.empty() && s.front() == ' ') s.erase(s.begin());
        };
        trim(text);
        trim(kind);
        trim(offset_str);
        const auto r = i2c::decode(i2c::from_text(text));
        if (r.ok || i2c::to_string(r.error.kind) != kind ||
            r.error.offset != static_cast<std::size_t>(std::stoul(offset_str))) {
            g.that(false, "fixture mismatch: " + text);
            return;
        }
        ++cases;
    }
    g.that(cases >= 20, fmt("only %g fixture cases", double(cases)));
}

// --- 8: wire loopback, throughput, resync, pacing ----------------------------

struct Pipe {
    int rd = -1, wr = -1;
    bool ok() { return ::pipe(&rd) == 0; }  // pipe(2) fills {rd, wr}
    ~Pipe() {
        if (rd >= 0) ::close(rd);
        if (wr >= 0) ::close(wr);
    }
};

std::vector<est::Reading> synthetic_readings(std::size_t n) {
    std::vector<est::Reading> rs(n);
    for (std::size_t i = 0; i < n; ++i) {
        rs[i].t_s = 4.0 + static_cast<double>(i);
        rs[i].spo2_percent = 94.0 + 0.2 * static_cast<double>(i % 20);
        if (i % 9 != 7) rs[i].hr_bpm = 60.0 + static_cast<double>(i % 40);
        rs[i].valid = true;
    }
    return rs;
}

void c8_wire(Gate& g) {
    {  // loopback: nothing lost, nothing mangled
        const auto rs = synthetic_readings(100);
        Pipe p;
        g.that(p.ok(), "pipe failed");
        wire::LinkConfig link;
        std::thread server([&] {
            wire::serve_fd(p.wr, rs, link);
            ::close(p.wr);
            p.wr = -1;
        });
        const auto got = wire::monitor_fd(p.rd);
        server.join();
        g.that(got.readings.size() == 100,
               fmt("loopback delivered %g of 100", double(got.readings.size())));
        g.that(got.malformed.empty(), "loopback produced malformed lines");
    }

    {  // sustained throughput stays within 2% of baud/10
        const auto rs = synthetic_readings(200);
        Pipe p;
        g.that(p.ok(), "pipe failed");
        wire::LinkConfig link;
        link.baud = 38400;
        wire::ServeStats stats;
        std::thread server([&] {
            stats = wire::serve_fd(p.wr, rs, link);
            ::close(p.wr);
            p.wr = -1;
        });
        const auto got = wire::monitor_fd(p.rd);
        server.join();
        g.that(got.readings.size() == 200, "throttled run dropped readings");
        const double rate = static_cast<double>(stats.bytes) / stats.wall_s;
        g.that(rate <= 3840.0 * 1.02, fmt("%.0f bytes/s exceeds 3840 +2%%", rate));
        g.that(rate >= 3840.0 * 0.5, fmt("%.0f bytes/s suspiciously slow", rate));
    }

    {  // resynchronization after garbage, and a cut-off tail is flagged
        Pipe p;
        g.that(p.ok(), "pipe failed");
        std::thread writer([&] {
            const std::string data = "\x7f\x03garbage\r\n6.0,95.1,61.0\r\n7.0,95.2,--\r\n8.0,95";
            (void)!::write(p.wr, data.data(), data.size());
            ::close(p.wr);
            p.wr = -1;
        });
        const auto got = wire::monitor_fd(p.rd);
        writer.join();
        g.that(got.readings.size() == 2,
               fmt("resync recovered %g of 2 readings", double(got.readings.size())));
        g.that(got.malformed.size() == 2,
               fmt("%g malformed lines, expected 2", double(got.malformed.size())));
    }

    {  // real-time pacing: one reading per second
        const auto rs = synthetic_readings(5);
        Pipe p;
        g.that(p.ok(), "pipe failed");
        wire::LinkConfig link;
        link.realtime = true;
        wire::ServeStats stats;
        std::thread server([&] {
            stats = wire::serve_fd(p.wr, rs, link);
            ::close(p.wr);
            p.wr = -1;
        });
        const auto got = wire::monitor_fd(p.rd);
        server.join();
        g.that(got.readings.size() == 5, "paced run dropped readings");
        g.that(stats.wall_s >= 5.0 && stats.wall_s < 8.0,
               fmt("paced 5 readings took %.2f s", stats.wall_s));
    }
}

// --- 9: relative-error aggregate worked examples -----------------------------

void c9_error_examples(Gate& g) {
    const auto equal = bench::average_measurement_error({97.0, 97.0}, {97.0, 97.0});
    g.that(equal.signed_rel == 0.0 && equal.abs_rel == 0.0, "identical traces: nonzero error");

    const auto sym = bench::average_measurement_error({100.0, 100.0}, {99.0, 101.0});
    g.that(sym.signed_rel == 0.0, "symmetric misses: signed mean not exactly zero");
    g.that(sym.abs_rel == 0.01, "symmetric misses: absolute mean not exactly 0.01");

    std::vector<double> truth, meas;
    for (int i = 0; i < 20; ++i) {
        truth.push_back(90.0 + i);
        meas.push_back(truth.back() * (1.0 - 0.0007));
    }
    const auto bias = bench::average_measurement_error(truth, meas);
    g.that(std::fabs(bias.signed_rel - 0.0007) <= 1e-12, "uniform bias: signed mean off");
    g.that(bias.signed_rel == bias.abs_rel, "uniform bias: signed and absolute should agree");
}

}  // namespace

int main() {
    struct Criterion {
        const char* label;
        void (*run)(Gate&);
        double budget_s;  // 0 = untimed
    };
    const Criterion criteria[] = {
        {"clean-session accuracy within 0.1% relative", c1_session_accuracy, 5.0},
        {"60 s trace within 1 pp, 90% second-overlap", c2_minute_trace, 5.0},
        {"+/-10% supply ripple shifts readings <= 0.1 pp", c3_supply_ripple, 5.0},
        {"ambient: subtraction holds 1 pp, disabling is worse", c4_ambient_rejection, 5.0},
        {"measured R within 1e-3 of theory; inversion <= 1 pp", c5_ratio_closure, 2.0},
        {"heart rate within +/-2 bpm at 50/72/120/150", c6_heart_rate, 5.0},
        {"codec: 10^4 round-trips, exact fault offsets", c7_codec, 5.0},
        {"wire: loopback, baud ceiling, resync, pacing", c8_wire, 10.0},
        {"error-aggregate worked examples exact", c9_error_examples, 0.0},
    };

    int failures = 0;
    int index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        Gate gate;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            c.run(gate);
        } catch (const std::exception& e) {
            gate.that(false, std::string("exception: ") + e.what());
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && dt > c.budget_s)
            gate.that(false, fmt("runtime %.2f s exceeds %.0f s budget", dt, c.budget_s));
        const bool pass = gate.fails.empty();
        failures += pass ? 0 : 1;
        std::printf("criterion %d: %s  %6.2f s  %s\n", index, pass ? "PASS" : "FAIL", dt,
                    c.label);
        for (const auto& why : gate.fails) std::printf("    - %s\n", why.c_str());
    }
    std::printf("%d of 9 criteria passed\n", 9 - failures);
    return failures;
}
