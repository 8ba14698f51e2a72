#include "pulseox/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pulseox/errors.hpp"

namespace pulseox::csvio {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = line.find(sep, pos);
        if (next == std::string::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, next - pos));
        pos = next + 1;
    }
}

[[noreturn]] void bad_line(std::size_t lineno, const std::string& what) {
    throw IoError("csv line " + std::to_string(lineno) + ": " + what);
}

double parse_real(const std::string& field, std::size_t lineno, const char* what) {
    if (field.empty()) bad_line(lineno, std::string(what) + " is empty");
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (errno != 0 || end != field.c_str() + field.size() || !std::isfinite(v))
        bad_line(lineno, std::string(what) + " is not a finite number: '" + field + "'");
    return v;
}

std::uint16_t parse_count(const std::string& field, std::size_t lineno, const char* what) {
    if (field.empty()) bad_line(lineno, std::string(what) + " is empty");
    errno = 0;
    char* end = nullptr;
    const unsigned long v = std::strtoul(field.c_str(), &end, 10);
    if (errno != 0 || end != field.c_str() + field.size() || v > 65535)
        bad_line(lineno, std::string(what) + " is not an ADC count in [0, 65535]: '" + field + "'");
    return static_cast<std::uint16_t>(v);
}

// Collect non-empty lines, tolerating CRLF and a missing final newline.
std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) {
        if (cur.back() == '\r') cur.pop_back();
        out.push_back(cur);
    }
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed on '" + path + "'");
    return ss.str();
}

void spill(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.flush();
    if (!out.good()) throw IoError("write failed on '" + path + "'");
}

std::string samples_to_csv(const ppg::SampleStream& stream) {
    std::string out = "t_s,red,ir,ambient\n";
    char buf[96];
    for (const auto& s : stream.samples) {
        std::snprintf(buf, sizeof buf, "%.6f,%u,%u,%u\n", s.t_s, unsigned(s.red), unsigned(s.ir),
                      unsigned(s.ambient));
        out += buf;
    }
    return out;
}

ppg::SampleStream parse_samples(const std::string& text) {
    const std::vector<std::string> lines = lines_of(text);
    if (lines.empty()) throw IoError("sample csv: zero-length stream (no header)");
    if (lines[0] != "t_s,red,ir,ambient")
        throw IoError("sample csv: expected header 't_s,red,ir,ambient', got '" + lines[0] + "'");
    if (lines.size() == 1) throw IoError("sample csv: zero-length stream (no rows)");

    ppg::SampleStream stream;
    stream.samples.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split(lines[i], ',');
        if (fields.size() != 4) bad_line(i + 1, "expected 4 fields");
        ppg::DualSample s;
        s.t_s = parse_real(fields[0], i + 1, "t_s");
        s.red = parse_count(fields[1], i + 1, "red");
        s.ir = parse_count(fields[2], i + 1, "ir");
        s.ambient = parse_count(fields[3], i + 1, "ambient");
        s.saturated = s.red == 0 || s.red == 65535 || s.ir == 0 || s.ir == 65535;
        if (!stream.samples.empty() && !(s.t_s > stream.samples.back().t_s))
            bad_line(i + 1, "t_s must be strictly increasing");
        stream.samples.push_back(s);
    }

    if (stream.samples.size() < 2)
        throw IoError("sample csv: need at least 2 rows to infer the sample rate");
    const double span = stream.samples.back().t_s - stream.samples.front().t_s;
    const double fs_raw = static_cast<double>(stream.samples.size() - 1) / span;
    stream.fs_hz = std::round(fs_raw * 1e6) / 1e6;
    const double dt = 1.0 / stream.fs_hz;
    for (std::size_t i = 1; i < stream.samples.size(); ++i) {
        const double gap = stream.samples[i].t_s - stream.samples[i - 1].t_s;
        if (std::abs(gap - dt) > 2e-6)
            bad_line(i + 2, "sample spacing is not uniform");
    }
    return stream;
}

void write_samples(const ppg::SampleStream& stream, const std::string& path) {
    spill(path, samples_to_csv(stream));
}

ppg::SampleStream read_samples(const std::string& path) { return parse_samples(slurp(path)); }

std::string readings_to_csv(const std::vector<est::Reading>& readings) {
    std::string out = "t_s,spo2,hr,pi,valid,flags\n";
    char buf[64];
    for (const auto& r : readings) {
        std::snprintf(buf, sizeof buf, "%.3f", r.t_s);
        out += buf;
        out += ',';
        out += format_real(r.spo2_percent);
        out += ',';
        if (r.hr_bpm) out += format_real(*r.hr_bpm);
        out += ',';
        out += format_real(r.perfusion_index);
        out += ',';
        out += r.valid ? '1' : '0';
        out += ',';
        out += est::flag_names(r.flags);
        out += '\n';
    }
    return out;
}

std::vector<est::Reading> parse_readings(const std::string& text) {
    const std::vector<std::string> lines = lines_of(text);
    if (lines.empty()) throw IoError("readings csv: empty file");
    if (lines[0] != "t_s,spo2,hr,pi,valid,flags")
        throw IoError("readings csv: expected header 't_s,spo2,hr,pi,valid,flags', got '" +
                      lines[0] + "'");
    std::vector<est::Reading> out;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split(lines[i], ',');
        if (fields.size() != 6) bad_line(i + 1, "expected 6 fields");
        est::Reading r;
        r.t_s = parse_real(fields[0], i + 1, "t_s");
        r.spo2_percent = parse_real(fields[1], i + 1, "spo2");
        if (!fields[2].empty()) r.hr_bpm = parse_real(fields[2], i + 1, "hr");
        r.perfusion_index = parse_real(fields[3], i + 1, "pi");
        if (fields[4] == "1") r.valid = true;
        else if (fields[4] == "0") r.valid = false;
        else bad_line(i + 1, "valid must be 0 or 1");
        try {
            r.flags = est::flags_from_names(fields[5]);
        } catch (const IoError& e) {
            bad_line(i + 1, e.what());
        }
        out.push_back(r);
    }
    return out;
}

void write_readings(const std::vector<est::Reading>& readings, const std::string& path) {
    spill(path, readings_to_csv(readings));
}

std::vector<est::Reading> read_readings(const std::string& path) {
    return parse_readings(slurp(path));
}

}  // namespace pulseox::csvio
