#include "pulseox/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "pulseox/csv.hpp"
#include "pulseox/errors.hpp"

namespace pulseox::bench {

namespace {

double mean_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::fabs(a[i] - b[i]);
    return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

}  // namespace

ErrorStats average_measurement_error(const std::vector<double>& truth,
                                     const std::vector<double>& measured) {
    if (truth.size() != measured.size())
        throw DomainError("error stats need equal-length truth and measurement sequences");
    if (truth.empty()) throw DomainError("error stats need at least one pair");
    ErrorStats stats;
    double sum_signed = 0.0;
    double sum_abs = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (!std::isfinite(truth[i]) || truth[i] <= 0.0)
            throw DomainError("true values must be finite and positive");
        if (!std::isfinite(measured[i])) throw DomainError("measured values must be finite");
        double rel = (truth[i] - measured[i]) / truth[i];
        sum_signed += rel;
        sum_abs += std::fabs(rel);
    }
    stats.n = truth.size();
    stats.signed_rel = sum_signed / static_cast<double>(stats.n);
    stats.abs_rel = sum_abs / static_cast<double>(stats.n);
    return stats;
}

SessionResult run_session(const SessionSpec& spec, const est::EstimatorConfig& cfg,
                          double fs_hz) {
    if (spec.n_readings == 0) throw SessionError("session needs n_readings >= 1");
    double duration_s = cfg.window_s + static_cast<double>(spec.n_readings - 1);
    ppg::SampleStream stream =
        ppg::synthesize(spec.profile, spec.schedule, fs_hz, duration_s, spec.seed);
    SessionResult result;
    result.label = spec.label;
    result.readings = est::process_stream(stream, cfg);
    if (result.readings.size() != spec.n_readings)
        throw SessionError("session " + spec.label + ": expected " +
                           std::to_string(spec.n_readings) + " readings, got " +
                           std::to_string(result.readings.size()));
    std::vector<ppg::TruthRecord> truth = ppg::ground_truth(spec.profile, duration_s);
    unsigned flags_seen = 0;
    for (const est::Reading& r : result.readings) {
        result.total_count += 1;
        flags_seen |= r.flags;
        std::size_t idx = static_cast<std::size_t>(std::floor(r.t_s + 1e-9));
        if (idx >= truth.size()) idx = truth.size() - 1;
        if (r.valid) {
            result.valid_count += 1;
            result.spo2_true.push_back(truth[idx].sao2_percent);
            result.spo2_measured.push_back(r.spo2_percent);
        }
        if (r.hr_bpm.has_value()) {
            result.hr_true.push_back(truth[idx].hr_bpm);
            result.hr_measured.push_back(*r.hr_bpm);
        }
    }
    if (result.spo2_true.size() < spec.n_readings) {
        std::string names = est::flag_names(flags_seen);
        throw SessionError("session " + spec.label + ": only " +
                           std::to_string(result.spo2_true.size()) + " of " +
                           std::to_string(spec.n_readings) + " readings valid (flags: " +
                           (names.empty() ? "none" : names) + ")");
    }
    result.spo2_err = average_measurement_error(result.spo2_true, result.spo2_measured);
    result.spo2_mean_abs_pp = mean_abs_diff(result.spo2_true, result.spo2_measured);
    result.spo2_max_abs_pp = max_abs_diff(result.spo2_true, result.spo2_measured);
    if (!result.hr_true.empty()) {
        result.hr_err = average_measurement_error(result.hr_true, result.hr_measured);
        result.hr_mean_abs_bpm = mean_abs_diff(result.hr_true, result.hr_measured);
    }
    return result;
}

std::vector<SessionSpec> default_suite() {
    std::vector<SessionSpec> specs;
    auto add = [&](const std::string& label, std::uint64_t seed,
                   auto&& tweak) {
        SessionSpec s;
        s.label = label;
        s.seed = seed;
        tweak(s);
        specs.push_back(std::move(s));
    };
    add("clean_baseline", 101, [](SessionSpec&) {});
    add("low_perfusion", 102, [](SessionSpec& s) { s.profile.perfusion_index = 0.005; });
    add("bright_ambient", 103,
        [](SessionSpec& s) { s.schedule.ambient_offset_counts = 8000.0; });
    add("supply_ripple", 104, [](SessionSpec& s) {
        s.schedule.supply_gain.amplitude_fraction = 0.03;
        s.schedule.supply_gain.freq_hz = 0.15;
    });
    add("motion_burst", 105, [](SessionSpec& s) {
        s.schedule.motion_events.push_back({8.0, 2.0, 0.08});
    });
    add("hypoxic", 106, [](SessionSpec& s) {
        s.profile.sao2_percent = 88.0;
        s.profile.heart_rate_bpm = 90.0;
    });
    add("tachycardia", 107, [](SessionSpec& s) {
        s.profile.sao2_percent = 94.0;
        s.profile.heart_rate_bpm = 150.0;
        s.profile.perfusion_index = 0.015;
    });
    return specs;
}

BenchReport run_suite(const std::vector<SessionSpec>& specs, const est::EstimatorConfig& cfg,
                      double fs_hz) {
    BenchReport report;
    report.sessions.reserve(specs.size());
    for (const SessionSpec& spec : specs) report.sessions.push_back(run_session(spec, cfg, fs_hz));
    return report;
}

std::string BenchReport::to_table() const {
    std::size_t label_w = 7;
    for (const SessionResult& s : sessions) label_w = std::max(label_w, s.label.size());
    std::string out;
    char row[256];
    std::snprintf(row, sizeof row,
                  "%-*s  %5s  %5s  %11s  %10s  %11s  %10s  %10s\n",
                  static_cast<int>(label_w), "session", "n", "valid", "spo2 mae pp",
                  "spo2 max pp", "spo2 rel |e|", "hr mae bpm", "hr rel |e|");
    out += row;
    out += std::string(out.size() - 1, '-') + "\n";
    for (const SessionResult& s : sessions) {
        char hr_mae[32] = "--";
        char hr_rel[32] = "--";
        if (!s.hr_true.empty()) {
            std::snprintf(hr_mae, sizeof hr_mae, "%.3f", s.hr_mean_abs_bpm);
            std::snprintf(hr_rel, sizeof hr_rel, "%.5f", s.hr_err.abs_rel);
        }
        std::snprintf(row, sizeof row,
                      "%-*s  %5zu  %5zu  %11.3f  %10.3f  %11.5f  %10s  %10s\n",
                      static_cast<int>(label_w), s.label.c_str(), s.total_count,
                      s.valid_count, s.spo2_mean_abs_pp, s.spo2_max_abs_pp,
                      s.spo2_err.abs_rel, hr_mae, hr_rel);
        out += row;
    }
    return out;
}

std::string BenchReport::to_csv() const {
    std::string out =
        "session,readings,valid,spo2_mean_abs_pp,spo2_max_abs_pp,spo2_signed_rel,"
        "spo2_abs_rel,hr_pairs,hr_mean_abs_bpm,hr_signed_rel,hr_abs_rel\n";
    char row[320];
    for (const SessionResult& s : sessions) {
        std::snprintf(row, sizeof row, "%s,%zu,%zu,%.6g,%.6g,%.6g,%.6g,%zu,%.6g,%.6g,%.6g\n",
                      s.label.c_str(), s.total_count, s.valid_count, s.spo2_mean_abs_pp,
                      s.spo2_max_abs_pp, s.spo2_err.signed_rel, s.spo2_err.abs_rel,
                      s.hr_true.size(), s.hr_mean_abs_bpm, s.hr_err.signed_rel,
                      s.hr_err.abs_rel);
        out += row;
    }
    return out;
}

std::uint64_t fnv1a64(const std::string& text) {
    std::uint64_t hash = 14695981039346656037ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

std::string trace_csv(const SessionResult& result, const Config& cfg) {
    char line[160];
    std::snprintf(line, sizeof line, "# config_hash=%016llx\n",
                  static_cast<unsigned long long>(fnv1a64(cfg.serialize())));
    std::string out = line;
    std::snprintf(line, sizeof line, "# mean_abs_diff_pp=%.6f\n", result.spo2_mean_abs_pp);
    out += line;
    out += "t_s,spo2_true,spo2_measured\n";
    // spo2 pairs were collected from valid readings in order.
    std::size_t pair = 0;
    for (const est::Reading& r : result.readings) {
        if (!r.valid) continue;
        std::snprintf(line, sizeof line, "%.3f,%.6f,%.6f\n", r.t_s, result.spo2_true[pair],
                      result.spo2_measured[pair]);
        out += line;
        pair += 1;
    }
    return out;
}

void emit_traces(const SessionResult& result, const Config& cfg, const std::string& path) {
    csvio::spill(path, trace_csv(result, cfg));
}

}  // namespace pulseox::bench
