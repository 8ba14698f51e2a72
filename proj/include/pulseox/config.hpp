#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace pulseox {

// Plain-text key/value configuration shared by every module.
//
// Grammar, one entry per line:
//
//     # comment
//     profile.heart_rate_bpm = 72      # trailing comment
//
// Keys are dotted identifiers ([a-z0-9_.]); values are decimal numbers or
// bare strings.  Blank lines are ignored and later assignments win.
class Config {
public:
    Config() = default;

    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    void set_real(const std::string& key, double value);
    bool has(const std::string& key) const;
    std::size_t size() const { return entries_.size(); }

    // Typed getters throw ConfigError when the key is missing or malformed.
    double get_real(const std::string& key) const;
    double get_real(const std::string& key, double fallback) const;
    long long get_int(const std::string& key) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;

    std::vector<std::string> keys() const;
    std::vector<std::string> keys_with_prefix(const std::string& prefix) const;

    // Raise ConfigError if any key under `prefix.` is not in `known`
    // (names in `known` are relative to the prefix).
    void reject_unknown(const std::string& prefix, const std::set<std::string>& known) const;

    // Stable, reload-able text form (sorted keys).
    std::string serialize() const;
    void save(const std::string& path) const;

private:
    std::map<std::string, std::string> entries_;
};

} // namespace pulseox
