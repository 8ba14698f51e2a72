#include "pulseox/optics.hpp"

#include <algorithm>
#include <cmath>

#include "pulseox/errors.hpp"

namespace pulseox::optics {

namespace {

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

} // namespace

void WavelengthChannel::validate() const {
    require_finite(wavelength_nm, "wavelength_nm");
    if (wavelength_nm <= 600.0 || wavelength_nm >= 1000.0)
        throw DomainError("wavelength_nm must lie in (600, 1000)");
}

void ExtinctionTable::validate() const {
    for (double v : {wavelength_red_nm, wavelength_ir_nm, eps_hb_red, eps_hbo2_red, eps_hb_ir, eps_hbo2_ir})
        require_finite(v, "extinction table entry");
    WavelengthChannel{Channel::red, wavelength_red_nm}.validate();
    WavelengthChannel{Channel::infrared, wavelength_ir_nm}.validate();
    if (!(wavelength_red_nm < wavelength_ir_nm))
        throw DomainError("red wavelength must be below the infrared one");
    if (eps_hb_red <= 0 || eps_hbo2_red <= 0 || eps_hb_ir <= 0 || eps_hbo2_ir <= 0)
        throw DomainError("extinction coefficients must be positive");
    if (!(eps_hb_red > eps_hbo2_red))
        throw DomainError("red channel needs eps_hb > eps_hbo2");
    if (!(eps_hb_ir < eps_hbo2_ir))
        throw DomainError("infrared channel needs eps_hb < eps_hbo2");
}

ExtinctionTable ExtinctionTable::from_config(const Config& cfg) {
    cfg.reject_unknown("extinction", {"wavelength_red_nm", "wavelength_ir_nm", "eps_hb_red",
                                      "eps_hbo2_red", "eps_hb_ir", "eps_hbo2_ir"});
    ExtinctionTable t;
    t.wavelength_red_nm = cfg.get_real("extinction.wavelength_red_nm", t.wavelength_red_nm);
    t.wavelength_ir_nm = cfg.get_real("extinction.wavelength_ir_nm", t.wavelength_ir_nm);
    t.eps_hb_red = cfg.get_real("extinction.eps_hb_red", t.eps_hb_red);
    t.eps_hbo2_red = cfg.get_real("extinction.eps_hbo2_red", t.eps_hbo2_red);
    t.eps_hb_ir = cfg.get_real("extinction.eps_hb_ir", t.eps_hb_ir);
    t.eps_hbo2_ir = cfg.get_real("extinction.eps_hbo2_ir", t.eps_hbo2_ir);
    t.validate();
    return t;
}

void ExtinctionTable::to_config(Config& cfg) const {
    cfg.set_real("extinction.wavelength_red_nm", wavelength_red_nm);
    cfg.set_real("extinction.wavelength_ir_nm", wavelength_ir_nm);
    cfg.set_real("extinction.eps_hb_red", eps_hb_red);
    cfg.set_real("extinction.eps_hbo2_red", eps_hbo2_red);
    cfg.set_real("extinction.eps_hb_ir", eps_hb_ir);
    cfg.set_real("extinction.eps_hbo2_ir", eps_hbo2_ir);
}

double absorbance(double eps, double conc, double path_cm) {
    require_finite(eps, "eps");
    require_finite(conc, "conc");
    require_finite(path_cm, "path_cm");
    if (eps <= 0) throw DomainError("eps must be positive");
    if (conc < 0) throw DomainError("conc must be non-negative");
    if (path_cm <= 0) throw DomainError("path_cm must be positive");
    return eps * conc * path_cm;
}

double transmitted_intensity(double i0, double absorbance) {
    require_finite(i0, "i0");
    require_finite(absorbance, "absorbance");
    if (i0 <= 0) throw DomainError("i0 must be positive");
    if (absorbance < 0) throw DomainError("absorbance must be non-negative");
    return i0 * std::pow(10.0, -absorbance);
}

double sao2_fraction(const BloodState& blood) {
    require_finite(blood.conc_hb, "conc_hb");
    require_finite(blood.conc_hbo2, "conc_hbo2");
    if (blood.conc_hb < 0 || blood.conc_hbo2 < 0)
        throw DomainError("hemoglobin concentrations must be non-negative");
    double total = blood.conc_hb + blood.conc_hbo2;
    if (total <= 0) throw DomainError("total hemoglobin must be positive");
    return blood.conc_hbo2 / total;
}

double theoretical_R(double s, const ExtinctionTable& table) {
    require_finite(s, "saturation fraction");
    if (s < 0.0 || s > 1.0) throw DomainError("saturation fraction must lie in [0, 1]");
    table.validate();
    double num = table.eps_hb_red + (table.eps_hbo2_red - table.eps_hb_red) * s;
    double den = table.eps_hb_ir + (table.eps_hbo2_ir - table.eps_hb_ir) * s;
    return num / den;
}

void CalibrationCurve::validate() const {
    for (double c : coeff) require_finite(c, "calibration coefficient");
    if (degree < 1 || degree > 2) throw DomainError("calibration degree must be 1 or 2");
    if (!(r_lo < r_hi)) throw DomainError("calibration needs r_lo < r_hi");
    // strictly decreasing across the valid range; the derivative is linear,
    // so the endpoints decide
    double d_lo = coeff[1] + 2.0 * coeff[2] * r_lo;
    double d_hi = coeff[1] + 2.0 * coeff[2] * r_hi;
    if (!(d_lo < 0.0) || !(d_hi < 0.0))
        throw DomainError("calibration curve must be strictly decreasing over [r_lo, r_hi]");
}

CalibrationCurve CalibrationCurve::from_config(const Config& cfg) {
    cfg.reject_unknown("calibration",
                       {"degree", "c0", "c1", "c2", "r_lo", "r_hi", "residual_rms", "residual_max"});
    CalibrationCurve c;
    c.degree = static_cast<int>(cfg.get_int("calibration.degree"));
    c.coeff[0] = cfg.get_real("calibration.c0");
    c.coeff[1] = cfg.get_real("calibration.c1");
    c.coeff[2] = cfg.get_real("calibration.c2", 0.0);
    c.r_lo = cfg.get_real("calibration.r_lo");
    c.r_hi = cfg.get_real("calibration.r_hi");
    c.residual_rms = cfg.get_real("calibration.residual_rms", 0.0);
    c.residual_max = cfg.get_real("calibration.residual_max", 0.0);
    c.validate();
    return c;
}

void CalibrationCurve::to_config(Config& cfg) const {
    cfg.set("calibration.degree", std::to_string(degree));
    cfg.set_real("calibration.c0", coeff[0]);
    cfg.set_real("calibration.c1", coeff[1]);
    cfg.set_real("calibration.c2", coeff[2]);
    cfg.set_real("calibration.r_lo", r_lo);
    cfg.set_real("calibration.r_hi", r_hi);
    cfg.set_real("calibration.residual_rms", residual_rms);
    cfg.set_real("calibration.residual_max", residual_max);
}

CalibrationCurve fit_calibration(const std::vector<CalSample>& samples, int degree) {
    if (degree < 1 || degree > 2) throw DomainError("fit degree must be 1 or 2");
    const int m = degree + 1;
    if (static_cast<int>(samples.size()) < m)
        throw FitError("not enough samples for the requested degree");

    for (const auto& s : samples) {
        require_finite(s.r, "sample r");
        require_finite(s.spo2_percent, "sample spo2");
    }

    // Normal equations in long double; tiny systems, conditioning is fine
    // over any sane R range.
    long double ata[3][3] = {};
    long double atb[3] = {};
    for (const auto& s : samples) {
        long double pw[3] = {1.0L, s.r, static_cast<long double>(s.r) * s.r};
        for (int i = 0; i < m; ++i) {
            for (int j = 0; j < m; ++j) ata[i][j] += pw[i] * pw[j];
            atb[i] += pw[i] * s.spo2_percent;
        }
    }

    // Gaussian elimination with partial pivoting.
    int idx[3] = {0, 1, 2};
    for (int col = 0; col < m; ++col) {
        int piv = col;
        for (int r = col + 1; r < m; ++r)
            if (std::fabs(static_cast<double>(ata[idx[r]][col])) >
                std::fabs(static_cast<double>(ata[idx[piv]][col])))
                piv = r;
        std::swap(idx[col], idx[piv]);
        long double diag = ata[idx[col]][col];
        if (std::fabs(static_cast<double>(diag)) < 1e-12)
            throw FitError("rank-deficient sample set (distinct R values required)");
        for (int r = col + 1; r < m; ++r) {
            long double f = ata[idx[r]][col] / diag;
            for (int c2 = col; c2 < m; ++c2) ata[idx[r]][c2] -= f * ata[idx[col]][c2];
            atb[idx[r]] -= f * atb[idx[col]];
        }
    }
    long double sol[3] = {};
    for (int r = m - 1; r >= 0; --r) {
        long double acc = atb[idx[r]];
        for (int c2 = r + 1; c2 < m; ++c2) acc -= ata[idx[r]][c2] * sol[c2];
        sol[r] = acc / ata[idx[r]][r];
    }

    CalibrationCurve curve;
    curve.degree = degree;
    curve.coeff = {static_cast<double>(sol[0]), static_cast<double>(sol[1]),
                   degree == 2 ? static_cast<double>(sol[2]) : 0.0};

    auto [lo_it, hi_it] = std::minmax_element(
        samples.begin(), samples.end(), [](const CalSample& a, const CalSample& b) { return a.r < b.r; });
    curve.r_lo = lo_it->r;
    curve.r_hi = hi_it->r;
    if (!(curve.r_lo < curve.r_hi))
        throw FitError("rank-deficient sample set (distinct R values required)");

    long double sq = 0.0L, mx = 0.0L;
    for (const auto& s : samples) {
        long double fit = curve.coeff[0] + curve.coeff[1] * s.r +
                          static_cast<long double>(curve.coeff[2]) * s.r * s.r;
        long double e = fit - s.spo2_percent;
        sq += e * e;
        mx = std::max(mx, std::fabs(static_cast<double>(e)) + 0.0L);
    }
    curve.residual_rms = static_cast<double>(std::sqrt(static_cast<double>(sq / samples.size())));
    curve.residual_max = static_cast<double>(mx);

    double d_lo = curve.coeff[1] + 2.0 * curve.coeff[2] * curve.r_lo;
    double d_hi = curve.coeff[1] + 2.0 * curve.coeff[2] * curve.r_hi;
    if (!(d_lo < 0.0) || !(d_hi < 0.0))
        throw FitError("fitted curve is not strictly decreasing over the sampled R range");
    return curve;
}

Spo2Estimate invert_calibration(const CalibrationCurve& curve, double r) {
    require_finite(r, "r");
    curve.validate();

    auto poly = [&](double x) { return curve.coeff[0] + curve.coeff[1] * x + curve.coeff[2] * x * x; };
    auto slope = [&](double x) { return curve.coeff[1] + 2.0 * curve.coeff[2] * x; };

    Spo2Estimate out;
    double v;
    if (r < curve.r_lo) {
        v = poly(curve.r_lo) + slope(curve.r_lo) * (r - curve.r_lo);
        out.extrapolated = true;
    } else if (r > curve.r_hi) {
        v = poly(curve.r_hi) + slope(curve.r_hi) * (r - curve.r_hi);
        out.extrapolated = true;
    } else {
        v = poly(r);
    }
    out.spo2_percent = std::clamp(v, 0.0, 100.0);
    return out;
}

CalibrationCurve default_calibration(const ExtinctionTable& table) {
    table.validate();
    std::vector<CalSample> samples;
    for (int i = 0; i <= 60; ++i) { // 70 % .. 100 % in 0.5 % steps
        double spo2 = 70.0 + 0.5 * i;
        samples.push_back({theoretical_R(spo2 / 100.0, table), spo2});
    }
    return fit_calibration(samples, 2);
}

} // namespace pulseox::optics
