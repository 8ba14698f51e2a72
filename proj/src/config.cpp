#include "pulseox/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "pulseox/errors.hpp"

namespace pulseox {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::islower(static_cast<unsigned char>(c)) ||
              std::isdigit(static_cast<unsigned char>(c)) || c == '_' || c == '.'))
            return false;
    }
    return true;
}

} // namespace

Config Config::parse(const std::string& text) {
    Config cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (!valid_key(key))
            throw ConfigError("config line " + std::to_string(lineno) + ": bad key '" + key + "'");
        if (value.empty())
            throw ConfigError("config line " + std::to_string(lineno) + ": empty value for '" + key + "'");
        cfg.entries_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

void Config::set(const std::string& key, const std::string& value) {
    if (!valid_key(key)) throw ConfigError("bad config key '" + key + "'");
    std::string v = trim(value);
    if (v.empty()) throw ConfigError("empty value for '" + key + "'");
    entries_[key] = v;
}

void Config::set_real(const std::string& key, double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    set(key, buf);
}

bool Config::has(const std::string& key) const { return entries_.count(key) != 0; }

double Config::get_real(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
    const char* s = it->second.c_str();
    char* end = nullptr;
    double v = std::strtod(s, &end);
    if (end == s || *end != '\0')
        throw ConfigError("config key '" + key + "': not a number: '" + it->second + "'");
    return v;
}

double Config::get_real(const std::string& key, double fallback) const {
    return has(key) ? get_real(key) : fallback;
}

long long Config::get_int(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
    const char* s = it->second.c_str();
    char* end = nullptr;
    long long v = std::strtoll(s, &end, 10);
    if (end == s || *end != '\0')
        throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
    return v;
}

long long Config::get_int(const std::string& key, long long fallback) const {
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
    std::string v;
    for (char c : it->second) v += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "off" || v == "no") return false;
    throw ConfigError("config key '" + key + "': not a boolean: '" + it->second + "'");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    return has(key) ? get_bool(key) : fallback;
}

std::string Config::get_string(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError("missing config key '" + key + "'");
    return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [k, v] : entries_) out.push_back(k);
    return out;
}

std::vector<std::string> Config::keys_with_prefix(const std::string& prefix) const {
    std::vector<std::string> out;
    const std::string dotted = prefix + ".";
    for (const auto& [k, v] : entries_)
        if (k == prefix || k.rfind(dotted, 0) == 0) out.push_back(k);
    return out;
}

void Config::reject_unknown(const std::string& prefix, const std::set<std::string>& known) const {
    const std::string dotted = prefix + ".";
    for (const auto& [k, v] : entries_) {
        if (k.rfind(dotted, 0) != 0) continue;
        if (!known.count(k.substr(dotted.size())))
            throw ConfigError("unknown config key '" + k + "'");
    }
}

std::string Config::serialize() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_) out << k << " = " << v << "\n";
    return out.str();
}

void Config::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config file: " + path);
    out << serialize();
}

} // namespace pulseox
