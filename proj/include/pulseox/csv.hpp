#pragma once

#include <string>
#include <vector>

#include "pulseox/estimator.hpp"
#include "pulseox/ppg.hpp"

namespace pulseox::csvio {

// Sample streams: header `t_s,red,ir,ambient`, time to 6 decimals, integer
// counts.  The sample rate is not stored; parsing infers it from the row
// spacing and insists the spacing is uniform.
std::string samples_to_csv(const ppg::SampleStream& stream);
ppg::SampleStream parse_samples(const std::string& text);
void write_samples(const ppg::SampleStream& stream, const std::string& path);
ppg::SampleStream read_samples(const std::string& path);

// Readings: header `t_s,spo2,hr,pi,valid,flags`; hr is empty when absent,
// flags is a semicolon-joined name list, valid is 0/1.
std::string readings_to_csv(const std::vector<est::Reading>& readings);
std::vector<est::Reading> parse_readings(const std::string& text);
void write_readings(const std::vector<est::Reading>& readings, const std::string& path);
std::vector<est::Reading> read_readings(const std::string& path);

std::string slurp(const std::string& path);                    // throws IoError
void spill(const std::string& path, const std::string& text);  // throws IoError

}  // namespace pulseox::csvio
