#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "pulseox/config.hpp"
#include "pulseox/optics.hpp"
#include "pulseox/ppg.hpp"

namespace pulseox::est {

enum class Classification { normal, borderline, hypoxia };

// >= 95 % normal, < 92 % hypoxia, borderline between.
Classification classify(double spo2_percent);
const char* to_string(Classification c);

struct EstimatorConfig {
    double window_s = 4.0;          // sliding window, hop is fixed at 1 s
    double dc_cutoff_hz = 0.5;
    double ac_band_lo_hz = 0.5;
    double ac_band_hi_hz = 4.0;
    double min_peak_distance_s = 0.25;   // admits 240 bpm exactly
    double peak_prominence_fraction = 0.3;
    bool ambient_subtraction = true;
    optics::CalibrationCurve calibration = optics::default_calibration();

    void validate(double fs_hz) const;
    static EstimatorConfig from_config(const Config& cfg);  // estimator.* (+ calibration.*)
    void to_config(Config& cfg) const;
};

enum ReadingFlag : unsigned {
    flag_low_perfusion = 1u << 0,
    flag_extrapolated_calibration = 1u << 1,
    flag_saturated_adc = 1u << 2,
};

std::string flag_names(unsigned flags);            // "low_perfusion;saturated_adc"
unsigned flags_from_names(const std::string& text);  // inverse; throws IoError

struct Reading {
    double t_s = 0.0;                // end of the contributing window
    double spo2_percent = 0.0;       // clamped to [0, 100]; 0 when invalid
    std::optional<double> hr_bpm;    // absent when no usable beat train
    double perfusion_index = 0.0;    // IR AC/DC
    bool valid = false;              // spo2 computed and hr present in [30, 240]
    unsigned flags = 0;
};

// Mean of the slow moving-average component over the window, in input units.
double dc_extract(const std::vector<double>& window, double fs_hz, double dc_cutoff_hz);

// Peak-to-peak amplitude of the band-passed pulsatile component, scaled back
// to input units (the pipeline measures it on the DC-normalized trace).
double ac_extract(const std::vector<double>& window, double fs_hz, const EstimatorConfig& cfg);

// Ratio of ratios (ac_red/dc_red)/(ac_ir/dc_ir).  DomainError when a DC is
// not positive or the IR AC is not positive; callers map that to the
// low_perfusion flag.
double compute_R(double ac_red, double dc_red, double ac_ir, double dc_ir);

// Heart rate from a band-passed pulse trace (systole positive).  Absent when
// fewer than two acceptable peaks or the rate leaves [30, 240] bpm.
std::optional<double> estimate_hr(const double* pulse, std::ptrdiff_t n, double fs_hz,
                                  const EstimatorConfig& cfg);

// Sliding-window readings at 1 Hz.  Streams shorter than one window produce
// an empty sequence; degenerate windows produce invalid flagged readings and
// never abort the stream.
std::vector<Reading> process_stream(const ppg::SampleStream& stream, const EstimatorConfig& cfg);

namespace reference {
// Serial twin built on the reference filter kernels; bit-identical output.
std::vector<Reading> process_stream(const ppg::SampleStream& stream, const EstimatorConfig& cfg);
}  // namespace reference

// Per-window diagnostics used by calibration-closure tests.
struct WindowRatio {
    double t_s = 0.0;
    bool ok = false;
    double r = 0.0;
    double dc_red = 0.0, dc_ir = 0.0;
    double pp_red = 0.0, pp_ir = 0.0;  // peak-to-peak of the normalized traces
};

std::vector<WindowRatio> window_ratios(const ppg::SampleStream& stream,
                                       const EstimatorConfig& cfg);
// Same pipeline on unquantized channel values.
std::vector<WindowRatio> window_ratios(double fs_hz, const std::vector<double>& red,
                                       const std::vector<double>& ir,
                                       const std::vector<double>& ambient,
                                       const EstimatorConfig& cfg);

}  // namespace pulseox::est
