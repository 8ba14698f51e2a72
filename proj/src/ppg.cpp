#include "pulseox/ppg.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pulseox/errors.hpp"
#include "pulseox/parallel.hpp"
#include "pulseox/rng.hpp"

namespace pulseox::ppg {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw DomainError(what);
}

bool finite(double v) { return std::isfinite(v); }

// Per-sample signal model shared by the parallel generator, the serial
// reference and the pre-quantization trace path, so all three agree exactly.
struct Model {
    double dc_red = 0.0, dc_ir = 0.0;
    double a_red_max = 0.0, a_ir_max = 0.0;  // systolic-peak absorbances
    double beats_per_s = 0.0;
    SupplyGain gain;
    double ambient = 0.0;
    double dc_level = 0.0;
    const std::vector<MotionEvent>* events = nullptr;

    double gain_at(double t) const {
        if (gain.amplitude_fraction == 0.0) return 1.0;
        return 1.0 + gain.amplitude_fraction *
                         std::sin(2.0 * std::numbers::pi * gain.freq_hz * t);
    }

    double motion_at(double t) const {
        double m = 0.0;
        for (const auto& e : *events) {
            if (t < e.start_s || t >= e.start_s + e.duration_s) continue;
            const double u = (t - e.start_s) / e.duration_s;
            m += e.amplitude_fraction * dc_level *
                 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * u));
        }
        return m;
    }

    void channels_at(double t, double& red, double& ir) const {
        const double phase = t * beats_per_s - std::floor(t * beats_per_s);
        const double b = beat_shape(phase);
        const double g = gain_at(t);
        const double m = motion_at(t);
        red = optics::transmitted_intensity(dc_red, a_red_max * b) * g + m + ambient;
        ir = optics::transmitted_intensity(dc_ir, a_ir_max * b) * g + m + ambient;
    }
};

Model build_model(const PhysioProfile& profile, const ArtifactSchedule& schedule,
                  const optics::ExtinctionTable& table) {
    profile.validate();
    schedule.validate();
    table.validate();

    Model m;
    m.dc_level = profile.dc_level_counts;
    m.dc_ir = profile.dc_level_counts;
    m.dc_red = profile.dc_level_counts * profile.red_led_balance;
    m.beats_per_s = profile.heart_rate_bpm / 60.0;
    m.gain = schedule.supply_gain;
    m.ambient = schedule.ambient_offset_counts;
    m.events = &schedule.motion_events;

    // Nominal whole blood: 2.3 mmol/L total hemoglobin split by saturation.
    // The absolute concentration cancels in every observable ratio; only the
    // red/IR absorbance ratio and the IR modulation depth matter.
    const double c_tot = 2.3;
    const double s = profile.sao2_percent / 100.0;
    const double c_hbo2 = s * c_tot;
    const double c_hb = (1.0 - s) * c_tot;
    const double k_red = optics::absorbance(table.eps_hb(optics::Channel::red), c_hb, 1.0) +
                         optics::absorbance(table.eps_hbo2(optics::Channel::red), c_hbo2, 1.0);
    const double k_ir = optics::absorbance(table.eps_hb(optics::Channel::infrared), c_hb, 1.0) +
                        optics::absorbance(table.eps_hbo2(optics::Channel::infrared), c_hbo2, 1.0);

    // Peak path excursion chosen so the IR peak-to-peak over its diastolic
    // baseline equals the requested perfusion index exactly.
    m.a_ir_max = -std::log10(1.0 - profile.perfusion_index);
    m.a_red_max = m.a_ir_max * (k_red / k_ir);
    return m;
}

std::uint16_t quantize(double v, double dith, bool& saturated) {
    const double r = std::rint(v + dith);  // round half to even
    if (r < 0.0) {
        saturated = true;
        return 0;
    }
    if (r > 65535.0) {
        saturated = true;
        return 65535;
    }
    return static_cast<std::uint16_t>(r);
}

DualSample make_sample(const Model& m, std::uint64_t seed, std::ptrdiff_t i, double fs_hz) {
    const double t = static_cast<double>(i) / fs_hz;
    double red_f = 0.0, ir_f = 0.0;
    m.channels_at(t, red_f, ir_f);
    DualSample s;
    s.t_s = t;
    bool sat = false;
    const auto n = static_cast<std::uint64_t>(i);
    s.red = quantize(red_f, dither(seed, n, 0), sat);
    s.ir = quantize(ir_f, dither(seed, n, 1), sat);
    s.ambient = quantize(m.ambient, dither(seed, n, 2), sat);
    s.saturated = sat;
    return s;
}

std::size_t sample_count(double fs_hz, double duration_s) {
    require(finite(fs_hz) && fs_hz >= 25.0, "sample rate must be >= 25 Hz");
    require(finite(duration_s) && duration_s > 0.0, "duration must be positive");
    const auto n = static_cast<std::ptrdiff_t>(std::llround(duration_s * fs_hz));
    require(n >= 1, "duration too short for one sample");
    return static_cast<std::size_t>(n);
}

}  // namespace

double beat_shape(double phase01) {
    if (phase01 < 0.0 || phase01 >= 1.0) throw DomainError("beat phase must be in [0, 1)");
    if (phase01 >= 1.0 / 3.0) return 0.0;
    return 0.5 * (1.0 - std::cos(6.0 * std::numbers::pi * phase01));
}

void PhysioProfile::validate() const {
    require(finite(sao2_percent) && sao2_percent >= 50.0 && sao2_percent <= 100.0,
            "sao2_percent must be in [50, 100]");
    require(finite(heart_rate_bpm) && heart_rate_bpm >= 30.0 && heart_rate_bpm <= 240.0,
            "heart_rate_bpm must be in [30, 240]");
    require(finite(perfusion_index) && perfusion_index >= 0.0 && perfusion_index <= 0.2,
            "perfusion_index must be in [0, 0.2]");
    require(finite(dc_level_counts) && dc_level_counts > 0.0 && dc_level_counts <= 65535.0,
            "dc_level_counts must be in (0, 65535]");
    require(finite(red_led_balance) && red_led_balance > 0.0 && red_led_balance <= 1.0,
            "red_led_balance must be in (0, 1]");
}

PhysioProfile PhysioProfile::from_config(const Config& cfg) {
    PhysioProfile p;
    p.sao2_percent = cfg.get_real("profile.sao2_percent", p.sao2_percent);
    p.heart_rate_bpm = cfg.get_real("profile.heart_rate_bpm", p.heart_rate_bpm);
    p.perfusion_index = cfg.get_real("profile.perfusion_index", p.perfusion_index);
    p.dc_level_counts = cfg.get_real("profile.dc_level_counts", p.dc_level_counts);
    p.red_led_balance = cfg.get_real("profile.red_led_balance", p.red_led_balance);
    p.validate();
    return p;
}

void PhysioProfile::to_config(Config& cfg) const {
    cfg.set_real("profile.sao2_percent", sao2_percent);
    cfg.set_real("profile.heart_rate_bpm", heart_rate_bpm);
    cfg.set_real("profile.perfusion_index", perfusion_index);
    cfg.set_real("profile.dc_level_counts", dc_level_counts);
    cfg.set_real("profile.red_led_balance", red_led_balance);
}

void ArtifactSchedule::validate() const {
    require(finite(supply_gain.amplitude_fraction) && supply_gain.amplitude_fraction >= 0.0 &&
                supply_gain.amplitude_fraction <= 0.2,
            "supply amplitude_fraction must be in [0, 0.2]");
    require(finite(supply_gain.freq_hz) && supply_gain.freq_hz >= 0.0,
            "supply freq_hz must be >= 0");
    require(finite(ambient_offset_counts) && ambient_offset_counts >= 0.0,
            "ambient_offset_counts must be >= 0");
    std::vector<MotionEvent> sorted = motion_events;
    std::sort(sorted.begin(), sorted.end(),
              [](const MotionEvent& a, const MotionEvent& b) { return a.start_s < b.start_s; });
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const auto& e = sorted[i];
        require(finite(e.start_s) && e.start_s >= 0.0, "motion start_s must be >= 0");
        require(finite(e.duration_s) && e.duration_s > 0.0, "motion duration_s must be > 0");
        require(finite(e.amplitude_fraction), "motion amplitude_fraction must be finite");
        if (i + 1 < sorted.size())
            require(e.start_s + e.duration_s <= sorted[i + 1].start_s,
                    "motion events must not overlap");
    }
}

ArtifactSchedule ArtifactSchedule::from_config(const Config& cfg) {
    ArtifactSchedule s;
    s.supply_gain.amplitude_fraction =
        cfg.get_real("schedule.supply_amplitude_fraction", s.supply_gain.amplitude_fraction);
    s.supply_gain.freq_hz = cfg.get_real("schedule.supply_freq_hz", s.supply_gain.freq_hz);
    s.ambient_offset_counts =
        cfg.get_real("schedule.ambient_offset_counts", s.ambient_offset_counts);
    const auto count = cfg.get_int("schedule.motion_count", 0);
    if (count < 0) throw ConfigError("schedule.motion_count must be >= 0");
    for (long long i = 0; i < count; ++i) {
        const std::string base = "schedule.motion_" + std::to_string(i) + ".";
        MotionEvent e;
        e.start_s = cfg.get_real(base + "start_s");
        e.duration_s = cfg.get_real(base + "duration_s");
        e.amplitude_fraction = cfg.get_real(base + "amplitude_fraction");
        s.motion_events.push_back(e);
    }
    s.validate();
    return s;
}

void ArtifactSchedule::to_config(Config& cfg) const {
    cfg.set_real("schedule.supply_amplitude_fraction", supply_gain.amplitude_fraction);
    cfg.set_real("schedule.supply_freq_hz", supply_gain.freq_hz);
    cfg.set_real("schedule.ambient_offset_counts", ambient_offset_counts);
    cfg.set("schedule.motion_count", std::to_string(motion_events.size()));
    for (std::size_t i = 0; i < motion_events.size(); ++i) {
        const std::string base = "schedule.motion_" + std::to_string(i) + ".";
        cfg.set_real(base + "start_s", motion_events[i].start_s);
        cfg.set_real(base + "duration_s", motion_events[i].duration_s);
        cfg.set_real(base + "amplitude_fraction", motion_events[i].amplitude_fraction);
    }
}

SampleStream synthesize(const PhysioProfile& profile, const ArtifactSchedule& schedule,
                        double fs_hz, double duration_s, std::uint64_t seed,
                        const optics::ExtinctionTable& table) {
    const Model m = build_model(profile, schedule, table);
    const std::size_t n = sample_count(fs_hz, duration_s);
    SampleStream out;
    out.fs_hz = fs_hz;
    out.seed = seed;
    out.samples.resize(n);
    parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
        out.samples[static_cast<std::size_t>(i)] = make_sample(m, seed, i, fs_hz);
    });
    for (const auto& s : out.samples)
        if (s.saturated) ++out.saturated_count;
    return out;
}

ModelTraces model_traces(const PhysioProfile& profile, const ArtifactSchedule& schedule,
                         double fs_hz, double duration_s, const optics::ExtinctionTable& table) {
    const Model m = build_model(profile, schedule, table);
    const std::size_t n = sample_count(fs_hz, duration_s);
    ModelTraces tr;
    tr.fs_hz = fs_hz;
    tr.t_s.resize(n);
    tr.red.resize(n);
    tr.ir.resize(n);
    tr.ambient.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fs_hz;
        tr.t_s[i] = t;
        m.channels_at(t, tr.red[i], tr.ir[i]);
        tr.ambient[i] = m.ambient;
    }
    return tr;
}

namespace reference {

SampleStream synthesize(const PhysioProfile& profile, const ArtifactSchedule& schedule,
                        double fs_hz, double duration_s, std::uint64_t seed,
                        const optics::ExtinctionTable& table) {
    const Model m = build_model(profile, schedule, table);
    const std::size_t n = sample_count(fs_hz, duration_s);
    SampleStream out;
    out.fs_hz = fs_hz;
    out.seed = seed;
    out.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        out.samples[i] = make_sample(m, seed, static_cast<std::ptrdiff_t>(i), fs_hz);
    for (const auto& s : out.samples)
        if (s.saturated) ++out.saturated_count;
    return out;
}

}  // namespace reference

std::vector<TruthRecord> ground_truth(const PhysioProfile& profile, double duration_s) {
    return ground_truth(std::vector<ProfileSegment>{{profile, duration_s}});
}

std::vector<TruthRecord> ground_truth(const std::vector<ProfileSegment>& segments) {
    require(!segments.empty(), "ground truth needs at least one segment");
    double total = 0.0;
    for (const auto& seg : segments) {
        seg.profile.validate();
        require(finite(seg.duration_s) && seg.duration_s > 0.0,
                "segment duration must be positive");
        total += seg.duration_s;
    }
    const auto n = static_cast<std::size_t>(std::ceil(total - 1e-9));
    std::vector<TruthRecord> out;
    out.reserve(n);
    std::size_t seg_idx = 0;
    double seg_start = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k);
        while (seg_idx + 1 < segments.size() &&
               t >= seg_start + segments[seg_idx].duration_s) {
            seg_start += segments[seg_idx].duration_s;
            ++seg_idx;
        }
        const auto& p = segments[seg_idx].profile;
        out.push_back({t, p.sao2_percent, p.heart_rate_bpm});
    }
    return out;
}

}  // namespace pulseox::ppg
