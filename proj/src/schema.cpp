#include "pulseox/schema.hpp"

#include <set>

#include "pulseox/errors.hpp"
#include "pulseox/estimator.hpp"
#include "pulseox/optics.hpp"
#include "pulseox/ppg.hpp"
#include "pulseox/wire.hpp"

namespace pulseox {

Config default_config() {
    Config cfg;
    ppg::PhysioProfile{}.to_config(cfg);
    ppg::ArtifactSchedule{}.to_config(cfg);
    optics::ExtinctionTable{}.to_config(cfg);
    est::EstimatorConfig{}.to_config(cfg);  // includes calibration.*
    wire::LinkConfig{}.to_config(cfg);
    return cfg;
}

std::vector<std::string> unknown_config_keys(const Config& cfg) {
    std::set<std::string> known;
    for (const std::string& k : default_config().keys()) known.insert(k);
    // Motion-event keys are indexed by schedule.motion_count.
    long long count = cfg.get_int("schedule.motion_count", 0);
    for (long long i = 0; i < count; ++i) {
        std::string base = "schedule.motion_" + std::to_string(i) + ".";
        known.insert(base + "start_s");
        known.insert(base + "duration_s");
        known.insert(base + "amplitude_fraction");
    }
    std::vector<std::string> unknown;
    for (const std::string& k : cfg.keys()) {
        if (known.find(k) == known.end()) unknown.push_back(k);
    }
    return unknown;
}

void validate_known_keys(const Config& cfg) {
    std::vector<std::string> unknown = unknown_config_keys(cfg);
    if (unknown.empty()) return;
    std::string msg = "unknown config key";
    if (unknown.size() > 1) msg += "s";
    msg += ":";
    for (const std::string& k : unknown) msg += " " + k;
    throw ConfigError(msg);
}

}  // namespace pulseox
