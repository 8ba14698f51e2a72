#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pulseox/config.hpp"
#include "pulseox/estimator.hpp"
#include "pulseox/ppg.hpp"

namespace pulseox::bench {

// Relative-error aggregate against ground truth:
//   signed_rel = mean((true - measured) / true)
//   abs_rel    = mean(|true - measured| / true)
struct ErrorStats {
    double signed_rel = 0.0;
    double abs_rel = 0.0;
    std::size_t n = 0;
};

ErrorStats average_measurement_error(const std::vector<double>& truth,
                                     const std::vector<double>& measured);

struct SessionSpec {
    std::string label;
    ppg::PhysioProfile profile;
    ppg::ArtifactSchedule schedule;
    std::uint64_t seed = 1;
    std::size_t n_readings = 20;  // one per second of hop
};

struct SessionResult {
    std::string label;
    std::vector<est::Reading> readings;  // every reading, valid or not
    std::vector<double> spo2_true;       // aligned pairs from valid readings
    std::vector<double> spo2_measured;
    std::vector<double> hr_true;  // aligned pairs from readings with an HR
    std::vector<double> hr_measured;
    ErrorStats spo2_err;
    ErrorStats hr_err;
    double spo2_mean_abs_pp = 0.0;  // mean |true - measured|, percentage points
    double spo2_max_abs_pp = 0.0;
    double hr_mean_abs_bpm = 0.0;
    std::size_t valid_count = 0;
    std::size_t total_count = 0;
};

// Synthesizes window_s + n_readings - 1 seconds of signal, runs the
// estimator, and pairs each valid reading with the true state at its
// timestamp.  Throws SessionError when no reading survives, naming the
// flags that were raised.
SessionResult run_session(const SessionSpec& spec, const est::EstimatorConfig& cfg,
                          double fs_hz = 100.0);

std::vector<SessionSpec> default_suite();

struct BenchReport {
    std::vector<SessionResult> sessions;

    std::string to_table() const;  // human-readable summary
    std::string to_csv() const;    // one row per session
};

BenchReport run_suite(const std::vector<SessionSpec>& specs, const est::EstimatorConfig& cfg,
                      double fs_hz = 100.0);

std::uint64_t fnv1a64(const std::string& text);

// Per-reading trace CSV with `# config_hash=` and `# mean_abs_diff_pp=`
// comment headers, then t_s,spo2_true,spo2_measured rows.
std::string trace_csv(const SessionResult& result, const Config& cfg);
void emit_traces(const SessionResult& result, const Config& cfg, const std::string& path);

}  // namespace pulseox::bench
