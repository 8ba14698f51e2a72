#pragma once

#include <array>
#include <vector>

#include "pulseox/config.hpp"

namespace pulseox::optics {

enum class Channel { red = 0, infrared = 1 };

struct WavelengthChannel {
    Channel label = Channel::red;
    double wavelength_nm = 660.0; // must lie in (600, 1000)
    void validate() const;
};

// Decadic extinction coefficients for the two hemoglobin species at the two
// LED wavelengths, in L * mmol^-1 * cm^-1.  Only products eps * conc * path
// are ever used, so the concentration unit is whatever the config uses.
//
// Physically meaningful tables satisfy eps_hb > eps_hbo2 at the red
// wavelength and eps_hb < eps_hbo2 in the infrared; that ordering is what
// makes the ratio-of-ratios fall as saturation rises.
struct ExtinctionTable {
    double wavelength_red_nm = 660.0;
    double wavelength_ir_nm = 940.0;
    double eps_hb_red = 3226.56;
    double eps_hbo2_red = 319.6;
    double eps_hb_ir = 693.44;
    double eps_hbo2_ir = 1214.0;

    double eps_hb(Channel c) const { return c == Channel::red ? eps_hb_red : eps_hb_ir; }
    double eps_hbo2(Channel c) const { return c == Channel::red ? eps_hbo2_red : eps_hbo2_ir; }

    void validate() const; // DomainError when the ordering above is broken

    static ExtinctionTable from_config(const Config& cfg); // extinction.* keys
    void to_config(Config& cfg) const;
};

struct BloodState {
    double conc_hb = 0;       // deoxygenated hemoglobin
    double conc_hbo2 = 0;     // oxygenated hemoglobin
    double path_length_cm = 1.0;
};

// Beer-Lambert, decadic form: A = eps * conc * path.
double absorbance(double eps, double conc, double path_cm);

// I = I0 * 10^-A.
double transmitted_intensity(double i0, double absorbance);

// Oxygen saturation as a fraction of total hemoglobin.
double sao2_fraction(const BloodState& blood);

// Small-pulsation ratio-of-ratios predicted for saturation fraction s:
//
//     R(s) = [eps_hb_red + (eps_hbo2_red - eps_hb_red) s]
//          / [eps_hb_ir  + (eps_hbo2_ir  - eps_hb_ir ) s]
//
// Strictly decreasing on [0, 1] for any valid table.
double theoretical_R(double s, const ExtinctionTable& table = {});

// Polynomial R -> SpO2% map.  Inside [r_lo, r_hi] the fitted polynomial is
// evaluated directly; outside it the curve continues along its endpoint
// tangents so that it stays monotone, and evaluations report extrapolation.
struct CalibrationCurve {
    std::array<double, 3> coeff{}; // c0 + c1 r + c2 r^2; unused terms zero
    int degree = 2;
    double r_lo = 0.0;
    double r_hi = 0.0;
    double residual_rms = 0.0; // of the originating fit, in percentage points
    double residual_max = 0.0;

    void validate() const;
    static CalibrationCurve from_config(const Config& cfg); // calibration.* keys
    void to_config(Config& cfg) const;
};

struct Spo2Estimate {
    double spo2_percent = 0.0; // clamped to [0, 100]
    bool extrapolated = false; // r fell outside [r_lo, r_hi]
};

struct CalSample {
    double r;
    double spo2_percent;
};

// Least-squares polynomial fit, degree 1 or 2.  Rejects rank-deficient
// sample sets and fits that are not strictly decreasing over the sampled
// range (FitError).
CalibrationCurve fit_calibration(const std::vector<CalSample>& samples, int degree);

Spo2Estimate invert_calibration(const CalibrationCurve& curve, double r);

// The curve shipped in configs/default_calibration.cfg: a degree-2 fit of
// theoretical_R over SaO2 in [70, 100] % on a 0.5 % grid.  Deterministic.
CalibrationCurve default_calibration(const ExtinctionTable& table = {});

} // namespace pulseox::optics
