#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pulseox/bench.hpp"
#include "pulseox/csv.hpp"
#include "pulseox/errors.hpp"
#include "pulseox/estimator.hpp"
#include "pulseox/optics.hpp"
#include "pulseox/ppg.hpp"
#include "pulseox/schema.hpp"
#include "pulseox/wire.hpp"

namespace {

using namespace pulseox;

constexpr int exit_ok = 0;
constexpr int exit_runtime = 1;
constexpr int exit_config = 2;
constexpr int exit_usage = 64;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;  // key=value overrides
};

void add_common(CLI::App* cmd, CommonOpts* opts) {
    cmd->add_option("--config", opts->config_path, "Config file (key = value lines)");
    cmd->add_option("--set", opts->sets, "Override a config key, e.g. --set estimator.window_s=6");
}

Config effective_config(const CommonOpts& opts) {
    Config cfg;
    if (!opts.config_path.empty()) cfg = Config::load(opts.config_path);
    for (const std::string& kv : opts.sets) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ConfigError("--set expects key=value, got: " + kv);
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        while (!key.empty() && key.back() == ' ') key.pop_back();
        while (!value.empty() && value.front() == ' ') value.erase(value.begin());
        cfg.set(key, value);
    }
    validate_known_keys(cfg);
    return cfg;
}

int cmd_simulate(const CommonOpts& common, const std::string& out, std::uint64_t seed,
                 double fs, double duration, const std::vector<double>& sao2,
                 const std::vector<double>& hr, const std::vector<double>& pi,
                 const std::vector<double>& dc) {
    Config cfg = effective_config(common);
    ppg::PhysioProfile profile = ppg::PhysioProfile::from_config(cfg);
    if (!sao2.empty()) profile.sao2_percent = sao2.back();
    if (!hr.empty()) profile.heart_rate_bpm = hr.back();
    if (!pi.empty()) profile.perfusion_index = pi.back();
    if (!dc.empty()) profile.dc_level_counts = dc.back();
    ppg::ArtifactSchedule schedule = ppg::ArtifactSchedule::from_config(cfg);
    optics::ExtinctionTable table = optics::ExtinctionTable::from_config(cfg);
    ppg::SampleStream stream = ppg::synthesize(profile, schedule, fs, duration, seed, table);
    csvio::write_samples(stream, out);
    if (stream.saturated_count > 0) {
        std::fprintf(stderr, "warning: %zu samples clipped at the ADC rails\n",
                     stream.saturated_count);
    }
    std::printf("wrote %zu samples (%.6g s at %.6g Hz) to %s\n", stream.samples.size(),
                stream.duration_s(), fs, out.c_str());
    return exit_ok;
}

int cmd_estimate(const CommonOpts& common, const std::string& in, const std::string& out) {
    Config cfg = effective_config(common);
    ppg::SampleStream stream = csvio::read_samples(in);
    est::EstimatorConfig ecfg = est::EstimatorConfig::from_config(cfg);
    std::vector<est::Reading> readings = est::process_stream(stream, ecfg);
    csvio::write_readings(readings, out);
    std::size_t valid = 0;
    for (const est::Reading& r : readings) valid += r.valid ? 1 : 0;
    std::printf("wrote %zu readings (%zu valid) to %s\n", readings.size(), valid, out.c_str());
    return exit_ok;
}

int cmd_serve(const CommonOpts& common, const std::string& in, bool to_stdout, int port,
              std::size_t max_clients) {
    Config cfg = effective_config(common);
    wire::LinkConfig link = wire::LinkConfig::from_config(cfg);
    if (port >= 0) link.port = port;
    std::vector<est::Reading> readings = csvio::read_readings(in);
    if (to_stdout) {
        wire::ServeStats stats = wire::serve_fd(1, readings, link);
        std::fprintf(stderr, "sent %zu lines, %zu bytes in %.3f s\n", stats.lines, stats.bytes,
                     stats.wall_s);
        return exit_ok;
    }
    wire::TcpServer server(std::move(readings), link);
    std::printf("listening on %s:%d\n", link.host.c_str(), server.port());
    std::fflush(stdout);
    server.wait_for_sessions(max_clients);
    server.stop();
    std::printf("served %zu session(s)\n", server.sessions_served());
    return exit_ok;
}

int cmd_monitor(const CommonOpts& common, const std::string& host, int port, bool from_stdin,
                const std::string& out) {
    Config cfg = effective_config(common);
    (void)cfg;
    wire::MonitorResult result;
    if (from_stdin) {
        result = wire::monitor_fd(0, out);
    } else {
        if (port <= 0) throw ConfigError("monitor needs --port (or --stdin)");
        result = wire::monitor_tcp(host, port, out);
    }
    for (const std::string& line : result.malformed) {
        std::fprintf(stderr, "warning: malformed line: %s\n", line.c_str());
    }
    std::printf("received %zu readings (%zu malformed lines)\n", result.readings.size(),
                result.malformed.size());
    return exit_ok;
}

int cmd_bench(const CommonOpts& common, std::uint64_t seed, const std::string& out_dir,
              double fs, std::size_t n_readings) {
    Config cfg = effective_config(common);
    est::EstimatorConfig ecfg = est::EstimatorConfig::from_config(cfg);
    std::vector<bench::SessionSpec> specs = bench::default_suite();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        specs[i].seed = seed + i;
        specs[i].n_readings = n_readings;
    }
    bench::BenchReport report = bench::run_suite(specs, ecfg, fs);
    std::string table = report.to_table();
    std::fputs(table.c_str(), stdout);
    if (!out_dir.empty()) {
        csvio::spill(out_dir + "/report.txt", table);
        csvio::spill(out_dir + "/report.csv", report.to_csv());
        for (std::size_t i = 0; i < report.sessions.size(); ++i) {
            Config session_cfg = cfg;
            specs[i].profile.to_config(session_cfg);
            specs[i].schedule.to_config(session_cfg);
            ecfg.to_config(session_cfg);
            bench::emit_traces(report.sessions[i], session_cfg,
                               out_dir + "/trace_" + report.sessions[i].label + ".csv");
        }
        std::printf("reports written under %s\n", out_dir.c_str());
    }
    return exit_ok;
}

int cmd_calibrate(const CommonOpts& common, const std::string& out, int degree, double lo,
                  double hi, double step) {
    Config cfg = effective_config(common);
    optics::ExtinctionTable table = optics::ExtinctionTable::from_config(cfg);
    if (!(lo < hi) || step <= 0.0)
        throw ConfigError("calibrate needs --lo < --hi and --step > 0");
    std::vector<optics::CalSample> samples;
    for (double s = lo; s <= hi + 1e-9; s += step) {
        double sat = std::min(s, hi);
        samples.push_back({optics::theoretical_R(sat / 100.0, table), sat});
    }
    optics::CalibrationCurve curve = optics::fit_calibration(samples, degree);
    Config out_cfg;
    table.to_config(out_cfg);
    curve.to_config(out_cfg);
    out_cfg.save(out);
    std::printf("fit degree %d over [%.6g, %.6g] %% (%zu points): residual max %.6g pp, rms %.6g pp\n",
                degree, lo, hi, samples.size(), curve.residual_max, curve.residual_rms);
    std::printf("wrote %s\n", out.c_str());
    return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulse oximeter software twin: signal synthesis, SpO2/HR estimation, "
                 "sensor-bus and serial-link emulation, accuracy benchmarks"};
    app.require_subcommand(1);

    CommonOpts sim_common;
    std::string sim_out;
    std::uint64_t sim_seed = 0;
    double sim_fs = 100.0, sim_duration = 30.0;
    std::vector<double> sim_sao2, sim_hr, sim_pi, sim_dc;
    CLI::App* sim = app.add_subcommand("simulate", "Synthesize a dual-wavelength sample CSV");
    sim->add_option("--out", sim_out, "Output sample CSV")->required();
    sim->add_option("--seed", sim_seed, "Noise seed (counter-based; required)")->required();
    sim->add_option("--fs", sim_fs, "Sample rate, Hz");
    sim->add_option("--duration", sim_duration, "Duration, seconds");
    sim->add_option("--sao2", sim_sao2, "Arterial saturation, percent");
    sim->add_option("--hr", sim_hr, "Heart rate, bpm");
    sim->add_option("--pi", sim_pi, "Perfusion index, fraction");
    sim->add_option("--dc", sim_dc, "Diastolic DC level, counts");
    add_common(sim, &sim_common);

    CommonOpts est_common;
    std::string est_in, est_out;
    CLI::App* estc = app.add_subcommand("estimate", "Run the estimator over a sample CSV");
    estc->add_option("--in", est_in, "Input sample CSV")->required();
    estc->add_option("--out", est_out, "Output readings CSV")->required();
    add_common(estc, &est_common);

    CommonOpts srv_common;
    std::string srv_in;
    bool srv_stdout = false;
    int srv_port = -1;
    std::size_t srv_max_clients = 1;
    CLI::App* srv = app.add_subcommand("serve", "Stream a readings CSV over TCP or stdout");
    srv->add_option("--in", srv_in, "Readings CSV to stream")->required();
    srv->add_flag("--stdout", srv_stdout, "Write to stdout instead of TCP");
    srv->add_option("--port", srv_port, "TCP port (0 picks an ephemeral one)");
    srv->add_option("--max-clients", srv_max_clients, "Sessions to serve before exiting");
    add_common(srv, &srv_common);

    CommonOpts mon_common;
    std::string mon_host = "127.0.0.1", mon_out;
    int mon_port = 0;
    bool mon_stdin = false;
    CLI::App* mon = app.add_subcommand("monitor", "Collect readings from a stream");
    mon->add_option("--host", mon_host, "Server host");
    mon->add_option("--port", mon_port, "Server port");
    mon->add_flag("--stdin", mon_stdin, "Read from stdin instead of TCP");
    mon->add_option("--out", mon_out, "Sink CSV (t_s,spo2,hr,recv_unix)");
    add_common(mon, &mon_common);

    CommonOpts bench_common;
    std::uint64_t bench_seed = 0;
    std::string bench_out_dir;
    double bench_fs = 100.0;
    std::size_t bench_readings = 20;
    CLI::App* ben = app.add_subcommand("bench", "Run the accuracy benchmark suite");
    ben->add_option("--seed", bench_seed, "Base seed; session i uses seed + i")->required();
    ben->add_option("--out-dir", bench_out_dir, "Directory for report.txt/report.csv/traces");
    ben->add_option("--fs", bench_fs, "Sample rate, Hz");
    ben->add_option("--readings", bench_readings, "Readings per session");
    add_common(ben, &bench_common);

    CommonOpts cal_common;
    std::string cal_out;
    int cal_degree = 2;
    double cal_lo = 70.0, cal_hi = 100.0, cal_step = 0.5;
    CLI::App* cal = app.add_subcommand("calibrate", "Fit the ratio-to-SpO2 curve");
    cal->add_option("--out", cal_out, "Output calibration config")->required();
    cal->add_option("--degree", cal_degree, "Polynomial degree");
    cal->add_option("--lo", cal_lo, "Grid start, percent SaO2");
    cal->add_option("--hi", cal_hi, "Grid end, percent SaO2");
    cal->add_option("--step", cal_step, "Grid step, percent");
    add_common(cal, &cal_common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return exit_usage;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_common, sim_out, sim_seed, sim_fs, sim_duration, sim_sao2,
                                sim_hr, sim_pi, sim_dc);
        if (estc->parsed()) return cmd_estimate(est_common, est_in, est_out);
        if (srv->parsed())
            return cmd_serve(srv_common, srv_in, srv_stdout, srv_port, srv_max_clients);
        if (mon->parsed()) return cmd_monitor(mon_common, mon_host, mon_port, mon_stdin, mon_out);
        if (ben->parsed())
            return cmd_bench(bench_common, bench_seed, bench_out_dir, bench_fs, bench_readings);
        if (cal->parsed())
            return cmd_calibrate(cal_common, cal_out, cal_degree, cal_lo, cal_hi, cal_step);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_runtime;
    }
    return exit_usage;
}
