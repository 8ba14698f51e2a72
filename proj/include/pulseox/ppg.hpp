#pragma once

#include <cstdint>
#include <vector>

#include "pulseox/config.hpp"
#include "pulseox/optics.hpp"

namespace pulseox::ppg {

// Ground-truth physiology plus the acquisition operating point.
// red_led_balance is the red LED drive relative to infrared, so the two
// channels sit at different DC counts like a real front-end.
struct PhysioProfile {
    double sao2_percent = 97.0;     // [50, 100]
    double heart_rate_bpm = 72.0;   // [30, 240]
    double perfusion_index = 0.02;  // AC/DC on the IR channel, [0, 0.2]
    double dc_level_counts = 50000.0;
    double red_led_balance = 0.85;  // (0, 1]

    void validate() const;
    static PhysioProfile from_config(const Config& cfg);
    void to_config(Config& cfg) const;
};

struct SupplyGain {
    double amplitude_fraction = 0.0;  // [0, 0.2]
    double freq_hz = 0.0;
};

struct MotionEvent {
    double start_s = 0.0;
    double duration_s = 0.0;
    double amplitude_fraction = 0.0;  // of dc_level_counts
};

struct ArtifactSchedule {
    SupplyGain supply_gain;
    double ambient_offset_counts = 0.0;
    std::vector<MotionEvent> motion_events;  // non-overlapping

    void validate() const;
    static ArtifactSchedule from_config(const Config& cfg);
    void to_config(Config& cfg) const;
};

struct DualSample {
    double t_s = 0.0;
    std::uint16_t red = 0;
    std::uint16_t ir = 0;
    std::uint16_t ambient = 0;
    bool saturated = false;  // pre-clamp value fell outside the 16-bit range
};

struct SampleStream {
    double fs_hz = 100.0;
    std::vector<DualSample> samples;
    std::uint64_t seed = 0;
    std::size_t saturated_count = 0;

    double duration_s() const { return fs_hz > 0 ? samples.size() / fs_hz : 0.0; }
};

// Pre-quantization channel values, for tests that need the exact model output.
struct ModelTraces {
    double fs_hz = 0.0;
    std::vector<double> t_s, red, ir, ambient;
};

// Raised-cosine systolic bump over the first third of the beat, flat diastole.
// phase01 is the beat phase in [0, 1); returns [0, 1] with the peak at 1/6.
double beat_shape(double phase01);

SampleStream synthesize(const PhysioProfile& profile, const ArtifactSchedule& schedule,
                        double fs_hz, double duration_s, std::uint64_t seed,
                        const optics::ExtinctionTable& table = optics::ExtinctionTable{});

ModelTraces model_traces(const PhysioProfile& profile, const ArtifactSchedule& schedule,
                         double fs_hz, double duration_s,
                         const optics::ExtinctionTable& table = optics::ExtinctionTable{});

namespace reference {
// Serial twin of synthesize; must produce a bit-identical stream.
SampleStream synthesize(const PhysioProfile& profile, const ArtifactSchedule& schedule,
                        double fs_hz, double duration_s, std::uint64_t seed,
                        const optics::ExtinctionTable& table = optics::ExtinctionTable{});
}  // namespace reference

struct ProfileSegment {
    PhysioProfile profile;
    double duration_s = 0.0;
};

struct TruthRecord {
    double t_s = 0.0;
    double sao2_percent = 0.0;
    double hr_bpm = 0.0;
};

// One record per whole second starting at t = 0.
std::vector<TruthRecord> ground_truth(const PhysioProfile& profile, double duration_s);
std::vector<TruthRecord> ground_truth(const std::vector<ProfileSegment>& segments);

}  // namespace pulseox::ppg
