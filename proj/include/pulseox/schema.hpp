#pragma once

#include <string>
#include <vector>

#include "pulseox/config.hpp"

namespace pulseox {

// Keys present in cfg that no component reads.  Catches typos like
// `estimator.windows_s` before they silently fall back to defaults.
std::vector<std::string> unknown_config_keys(const Config& cfg);

void validate_known_keys(const Config& cfg);  // throws ConfigError naming offenders

// The full default configuration: every consumer's defaults serialized
// into one Config (motion events omitted; they are additive).
Config default_config();

}  // namespace pulseox
