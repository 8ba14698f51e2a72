#include "pulseox/estimator.hpp"

#include <algorithm>
#include <cmath>

#include "pulseox/errors.hpp"
#include "pulseox/filters.hpp"
#include "pulseox/parallel.hpp"

namespace pulseox::est {

namespace {

int odd_len(double taps) {
    int n = static_cast<int>(std::lround(taps));
    if (n < 1) n = 1;
    if (n % 2 == 0) ++n;
    return n;
}

std::vector<double> run_ma(const std::vector<double>& x, int len, bool par) {
    return par ? filt::moving_average(x, len) : filt::reference::moving_average(x, len);
}

std::vector<double> run_fir(const std::vector<double>& x, const std::vector<double>& h, bool par) {
    return par ? filt::fir_apply(x, h) : filt::reference::fir_apply(x, h);
}

// Inverted DC-normalized pulsatile trace: u = 1 - x / ma(x).  Inversion puts
// the systolic upstroke on the positive side, the usual plethysmogram
// orientation, so peak detection sees beats as maxima.
std::vector<double> pulsatile(const std::vector<double>& x, int len, bool par) {
    const std::vector<double> m = run_ma(x, len, par);
    std::vector<double> u(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        u[i] = m[i] > 0.0 ? 1.0 - x[i] / m[i] : 0.0;
    return u;
}

struct Pipeline {
    double fs = 0.0;
    std::ptrdiff_t win = 0, hop = 0;
    std::vector<double> t;
    std::vector<double> dc_red, dc_ir;  // input units
    std::vector<double> bp_red, bp_ir;  // normalized, band-passed
    std::vector<char> rail;

    std::size_t n_windows() const {
        const auto n = static_cast<std::ptrdiff_t>(t.size());
        return n >= win ? static_cast<std::size_t>((n - win) / hop + 1) : 0u;
    }
};

Pipeline build_pipeline(double fs, std::vector<double> t, const std::vector<double>& xr,
                        const std::vector<double>& xi, std::vector<char> rail,
                        const EstimatorConfig& cfg, bool par) {
    cfg.validate(fs);
    Pipeline p;
    p.fs = fs;
    p.win = std::lround(cfg.window_s * fs);
    p.hop = std::max<std::ptrdiff_t>(1, std::lround(fs));
    p.t = std::move(t);
    p.rail = std::move(rail);

    const int l_norm = odd_len(fs / (2.0 * cfg.dc_cutoff_hz));
    const int l_dc = odd_len(fs / cfg.dc_cutoff_hz);
    const std::vector<double> h =
        filt::design_bandpass(fs, cfg.ac_band_lo_hz, cfg.ac_band_hi_hz);

    p.dc_red = run_ma(xr, l_dc, par);
    p.dc_ir = run_ma(xi, l_dc, par);
    p.bp_red = run_fir(pulsatile(xr, l_norm, par), h, par);
    p.bp_ir = run_fir(pulsatile(xi, l_norm, par), h, par);
    return p;
}

struct WindowMetrics {
    bool rail_any = false;
    double dc_r = 0.0, dc_i = 0.0;
    double pp_r = 0.0, pp_i = 0.0;
};

WindowMetrics window_metrics(const Pipeline& p, std::size_t k) {
    const std::size_t i0 = k * static_cast<std::size_t>(p.hop);
    const std::size_t i1 = i0 + static_cast<std::size_t>(p.win);
    WindowMetrics m;
    double sr = 0.0, si = 0.0;
    double lo_r = p.bp_red[i0], hi_r = p.bp_red[i0];
    double lo_i = p.bp_ir[i0], hi_i = p.bp_ir[i0];
    for (std::size_t i = i0; i < i1; ++i) {
        sr += p.dc_red[i];
        si += p.dc_ir[i];
        lo_r = std::min(lo_r, p.bp_red[i]);
        hi_r = std::max(hi_r, p.bp_red[i]);
        lo_i = std::min(lo_i, p.bp_ir[i]);
        hi_i = std::max(hi_i, p.bp_ir[i]);
        if (p.rail[i]) m.rail_any = true;
    }
    m.dc_r = sr / static_cast<double>(p.win);
    m.dc_i = si / static_cast<double>(p.win);
    m.pp_r = hi_r - lo_r;
    m.pp_i = hi_i - lo_i;
    return m;
}

Reading make_reading(const Pipeline& p, std::size_t k, const EstimatorConfig& cfg) {
    const std::size_t i0 = k * static_cast<std::size_t>(p.hop);
    const WindowMetrics m = window_metrics(p, k);

    Reading r;
    r.t_s = p.t[i0] + cfg.window_s;
    if (m.rail_any) r.flags |= flag_saturated_adc;

    if (!(m.dc_r > 0.0) || !(m.dc_i > 0.0)) {
        r.flags |= flag_low_perfusion;
        return r;
    }
    r.perfusion_index = m.pp_i;

    double ratio = 0.0;
    try {
        ratio = compute_R(m.pp_r * m.dc_r, m.dc_r, m.pp_i * m.dc_i, m.dc_i);
    } catch (const DomainError&) {
        r.flags |= flag_low_perfusion;
        return r;
    }
    const optics::Spo2Estimate est = optics::invert_calibration(cfg.calibration, ratio);
    r.spo2_percent = est.spo2_percent;
    if (est.extrapolated) r.flags |= flag_extrapolated_calibration;

    r.hr_bpm = estimate_hr(p.bp_ir.data() + i0, p.win, p.fs, cfg);
    if (!r.hr_bpm) r.flags |= flag_low_perfusion;
    r.valid = r.hr_bpm.has_value();
    return r;
}

std::vector<Reading> readings_from(const Pipeline& p, const EstimatorConfig& cfg, bool par) {
    std::vector<Reading> out(p.n_windows());
    if (par) {
        parallel_for(static_cast<std::ptrdiff_t>(out.size()),
                     [&](std::ptrdiff_t k) { out[static_cast<std::size_t>(k)] = make_reading(p, static_cast<std::size_t>(k), cfg); });
    } else {
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = make_reading(p, k, cfg);
    }
    return out;
}

std::vector<WindowRatio> ratios_from(const Pipeline& p, const EstimatorConfig& cfg) {
    std::vector<WindowRatio> out(p.n_windows());
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::size_t i0 = k * static_cast<std::size_t>(p.hop);
        const WindowMetrics m = window_metrics(p, k);
        WindowRatio& w = out[k];
        w.t_s = p.t[i0] + cfg.window_s;
        w.dc_red = m.dc_r;
        w.dc_ir = m.dc_i;
        w.pp_red = m.pp_r;
        w.pp_ir = m.pp_i;
        if (m.dc_r > 0.0 && m.dc_i > 0.0 && m.pp_i > 0.0) {
            w.ok = true;
            w.r = compute_R(m.pp_r * m.dc_r, m.dc_r, m.pp_i * m.dc_i, m.dc_i);
        }
    }
    return out;
}

struct StreamArrays {
    std::vector<double> t, red, ir;
    std::vector<char> rail;
};

StreamArrays unpack(const ppg::SampleStream& stream, bool subtract_ambient) {
    StreamArrays a;
    const std::size_t n = stream.samples.size();
    a.t.resize(n);
    a.red.resize(n);
    a.ir.resize(n);
    a.rail.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const ppg::DualSample& s = stream.samples[i];
        const double amb = subtract_ambient ? static_cast<double>(s.ambient) : 0.0;
        a.t[i] = s.t_s;
        a.red[i] = static_cast<double>(s.red) - amb;
        a.ir[i] = static_cast<double>(s.ir) - amb;
        a.rail[i] = s.saturated || s.red == 0 || s.red == 65535 || s.ir == 0 || s.ir == 65535;
    }
    return a;
}

bool long_enough(std::size_t n, double fs, const EstimatorConfig& cfg) {
    return static_cast<std::ptrdiff_t>(n) >= std::lround(cfg.window_s * fs) &&
           std::lround(cfg.window_s * fs) >= 2;
}

}  // namespace

Classification classify(double spo2_percent) {
    if (!std::isfinite(spo2_percent) || spo2_percent < 0.0 || spo2_percent > 100.0)
        throw DomainError("spo2_percent must be in [0, 100]");
    if (spo2_percent >= 95.0) return Classification::normal;
    if (spo2_percent < 92.0) return Classification::hypoxia;
    return Classification::borderline;
}

const char* to_string(Classification c) {
    switch (c) {
        case Classification::normal: return "normal";
        case Classification::borderline: return "borderline";
        case Classification::hypoxia: return "hypoxia";
    }
    return "?";
}

void EstimatorConfig::validate(double fs_hz) const {
    auto bad = [](const char* what) { throw ConfigError(what); };
    if (!(std::isfinite(window_s) && window_s > 0.0)) bad("estimator.window_s must be > 0");
    if (!(std::isfinite(dc_cutoff_hz) && dc_cutoff_hz > 0.0))
        bad("estimator.dc_cutoff_hz must be > 0");
    if (!(std::isfinite(ac_band_lo_hz) && std::isfinite(ac_band_hi_hz) && 0.0 < ac_band_lo_hz &&
          ac_band_lo_hz < ac_band_hi_hz))
        bad("estimator.ac_band must satisfy 0 < lo < hi");
    if (!(window_s >= 2.0 / ac_band_lo_hz))
        bad("estimator.window_s must cover two cycles of ac_band_lo_hz");
    if (!(std::isfinite(min_peak_distance_s) && min_peak_distance_s > 0.0 &&
          min_peak_distance_s <= 60.0 / 240.0))
        bad("estimator.min_peak_distance_s must be in (0, 0.25]");
    if (!(std::isfinite(peak_prominence_fraction) && peak_prominence_fraction > 0.0 &&
          peak_prominence_fraction <= 1.0))
        bad("estimator.peak_prominence_fraction must be in (0, 1]");
    calibration.validate();
    if (fs_hz > 0.0 && !(ac_band_hi_hz < fs_hz / 2.0))
        bad("estimator.ac_band_hi_hz must be below the Nyquist rate");
}

EstimatorConfig EstimatorConfig::from_config(const Config& cfg) {
    EstimatorConfig c;
    c.window_s = cfg.get_real("estimator.window_s", c.window_s);
    c.dc_cutoff_hz = cfg.get_real("estimator.dc_cutoff_hz", c.dc_cutoff_hz);
    c.ac_band_lo_hz = cfg.get_real("estimator.ac_band_lo_hz", c.ac_band_lo_hz);
    c.ac_band_hi_hz = cfg.get_real("estimator.ac_band_hi_hz", c.ac_band_hi_hz);
    c.min_peak_distance_s = cfg.get_real("estimator.min_peak_distance_s", c.min_peak_distance_s);
    c.peak_prominence_fraction =
        cfg.get_real("estimator.peak_prominence_fraction", c.peak_prominence_fraction);
    c.ambient_subtraction = cfg.get_bool("estimator.ambient_subtraction", c.ambient_subtraction);
    if (cfg.has("calibration.degree")) c.calibration = optics::CalibrationCurve::from_config(cfg);
    c.validate(0.0);
    return c;
}

void EstimatorConfig::to_config(Config& cfg) const {
    cfg.set_real("estimator.window_s", window_s);
    cfg.set_real("estimator.dc_cutoff_hz", dc_cutoff_hz);
    cfg.set_real("estimator.ac_band_lo_hz", ac_band_lo_hz);
    cfg.set_real("estimator.ac_band_hi_hz", ac_band_hi_hz);
    cfg.set_real("estimator.min_peak_distance_s", min_peak_distance_s);
    cfg.set_real("estimator.peak_prominence_fraction", peak_prominence_fraction);
    cfg.set("estimator.ambient_subtraction", ambient_subtraction ? "true" : "false");
    calibration.to_config(cfg);
}

std::string flag_names(unsigned flags) {
    std::string out;
    auto add = [&](unsigned bit, const char* name) {
        if (!(flags & bit)) return;
        if (!out.empty()) out += ';';
        out += name;
    };
    add(flag_low_perfusion, "low_perfusion");
    add(flag_extrapolated_calibration, "extrapolated_calibration");
    add(flag_saturated_adc, "saturated_adc");
    return out;
}

unsigned flags_from_names(const std::string& text) {
    unsigned flags = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        if (text.empty()) break;
        const std::size_t next = text.find(';', pos);
        const std::string name =
            text.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
        if (name == "low_perfusion") flags |= flag_low_perfusion;
        else if (name == "extrapolated_calibration") flags |= flag_extrapolated_calibration;
        else if (name == "saturated_adc") flags |= flag_saturated_adc;
        else throw IoError("unknown reading flag: '" + name + "'");
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return flags;
}

namespace {

// Reflection padding settles only half a kernel away from each edge; when the
// trace is long enough, evaluate over that settled interior.
std::pair<std::size_t, std::size_t> settled_span(std::size_t n, std::size_t margin) {
    if (n > 2 * margin) return {margin, n - margin};
    return {0, n};
}

}  // namespace

double dc_extract(const std::vector<double>& window, double fs_hz, double dc_cutoff_hz) {
    if (window.empty()) throw DomainError("dc_extract: empty window");
    if (!(fs_hz > 0.0) || !(dc_cutoff_hz > 0.0))
        throw DomainError("dc_extract: fs and cutoff must be positive");
    const int len = odd_len(fs_hz / dc_cutoff_hz);
    const std::vector<double> lp = filt::moving_average(window, len);
    const auto [b, e] = settled_span(lp.size(), static_cast<std::size_t>(len / 2));
    double sum = 0.0;
    for (std::size_t i = b; i < e; ++i) sum += lp[i];
    const double dc = sum / static_cast<double>(e - b);
    if (!(dc > 0.0)) throw DomainError("dc_extract: window has no positive DC component");
    return dc;
}

double ac_extract(const std::vector<double>& window, double fs_hz, const EstimatorConfig& cfg) {
    const double dc = dc_extract(window, fs_hz, cfg.dc_cutoff_hz);  // zero-DC error propagates
    const int l_norm = odd_len(fs_hz / (2.0 * cfg.dc_cutoff_hz));
    const std::vector<double> u = pulsatile(window, l_norm, true);
    const std::vector<double> h =
        filt::design_bandpass(fs_hz, cfg.ac_band_lo_hz, cfg.ac_band_hi_hz);
    const std::vector<double> bp = filt::fir_apply(u, h);
    const auto [b, e] =
        settled_span(bp.size(), static_cast<std::size_t>(l_norm / 2 + h.size() / 2));
    const auto [lo, hi] = std::minmax_element(bp.begin() + static_cast<std::ptrdiff_t>(b),
                                              bp.begin() + static_cast<std::ptrdiff_t>(e));
    return (*hi - *lo) * dc;
}

double compute_R(double ac_red, double dc_red, double ac_ir, double dc_ir) {
    if (!std::isfinite(ac_red) || !std::isfinite(dc_red) || !std::isfinite(ac_ir) ||
        !std::isfinite(dc_ir))
        throw DomainError("compute_R: non-finite input");
    if (!(dc_red > 0.0) || !(dc_ir > 0.0))
        throw DomainError("compute_R: DC components must be positive");
    if (!(ac_ir > 0.0)) throw DomainError("compute_R: IR AC must be positive");
    if (ac_red < 0.0) throw DomainError("compute_R: red AC must be >= 0");
    return (ac_red / dc_red) / (ac_ir / dc_ir);
}

std::optional<double> estimate_hr(const double* pulse, std::ptrdiff_t n, double fs_hz,
                                  const EstimatorConfig& cfg) {
    if (n < 2 || !(fs_hz > 0.0)) return std::nullopt;
    double lo = pulse[0], hi = pulse[0];
    for (std::ptrdiff_t i = 1; i < n; ++i) {
        lo = std::min(lo, pulse[i]);
        hi = std::max(hi, pulse[i]);
    }
    const double pp = hi - lo;
    if (!(pp > 0.0)) return std::nullopt;

    const auto min_dist =
        std::max<std::ptrdiff_t>(1, std::lround(cfg.min_peak_distance_s * fs_hz));
    const std::vector<filt::Peak> peaks =
        filt::find_peaks(pulse, n, cfg.peak_prominence_fraction * pp, min_dist);
    if (peaks.size() < 2) return std::nullopt;

    const double span = static_cast<double>(peaks.back().index - peaks.front().index);
    const double mean_interval_s = span / (static_cast<double>(peaks.size() - 1) * fs_hz);
    const double hr = 60.0 / mean_interval_s;
    if (!(hr >= 30.0 && hr <= 240.0)) return std::nullopt;
    return hr;
}

std::vector<Reading> process_stream(const ppg::SampleStream& stream, const EstimatorConfig& cfg) {
    if (!long_enough(stream.samples.size(), stream.fs_hz, cfg)) return {};
    StreamArrays a = unpack(stream, cfg.ambient_subtraction);
    const Pipeline p = build_pipeline(stream.fs_hz, std::move(a.t), a.red, a.ir,
                                      std::move(a.rail), cfg, true);
    return readings_from(p, cfg, true);
}

namespace reference {

std::vector<Reading> process_stream(const ppg::SampleStream& stream, const EstimatorConfig& cfg) {
    if (!long_enough(stream.samples.size(), stream.fs_hz, cfg)) return {};
    StreamArrays a = unpack(stream, cfg.ambient_subtraction);
    const Pipeline p = build_pipeline(stream.fs_hz, std::move(a.t), a.red, a.ir,
                                      std::move(a.rail), cfg, false);
    return readings_from(p, cfg, false);
}

}  // namespace reference

std::vector<WindowRatio> window_ratios(const ppg::SampleStream& stream,
                                       const EstimatorConfig& cfg) {
    if (!long_enough(stream.samples.size(), stream.fs_hz, cfg)) return {};
    StreamArrays a = unpack(stream, cfg.ambient_subtraction);
    const Pipeline p = build_pipeline(stream.fs_hz, std::move(a.t), a.red, a.ir,
                                      std::move(a.rail), cfg, true);
    return ratios_from(p, cfg);
}

std::vector<WindowRatio> window_ratios(double fs_hz, const std::vector<double>& red,
                                       const std::vector<double>& ir,
                                       const std::vector<double>& ambient,
                                       const EstimatorConfig& cfg) {
    const std::size_t n = red.size();
    if (ir.size() != n || ambient.size() != n)
        throw DomainError("window_ratios: channel lengths differ");
    if (!long_enough(n, fs_hz, cfg)) return {};
    std::vector<double> t(n), xr(n), xi(n);
    std::vector<char> rail(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = static_cast<double>(i) / fs_hz;
        const double amb = cfg.ambient_subtraction ? ambient[i] : 0.0;
        xr[i] = red[i] - amb;
        xi[i] = ir[i] - amb;
        rail[i] = red[i] <= 0.0 || red[i] >= 65535.0 || ir[i] <= 0.0 || ir[i] >= 65535.0;
    }
    const Pipeline p = build_pipeline(fs_hz, std::move(t), xr, xi, std::move(rail), cfg, true);
    return ratios_from(p, cfg);
}

}  // namespace pulseox::est
