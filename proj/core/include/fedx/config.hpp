#pragma once

#include <istream>
#include <map>
#include <string>
#include <vector>

#include "fedx/errors.hpp"

namespace fedx::config {

// Flat `key = value` text, grouped by [section] headers into qualified keys
// ("protocol.rounds"). '#' starts a comment; blank lines are ignored. See
// docs/config.md for the grammar.
class Config {
public:
    bool has(const std::string& key) const { return values_.count(key) > 0; }

    const std::string& raw(const std::string& key) const;
    int line_of(const std::string& key) const;

    std::string get_string(const std::string& key) const;
    long long get_int(const std::string& key) const;
    double get_double(const std::string& key) const;
    bool get_bool(const std::string& key) const;  // true/false/1/0/yes/no
    std::vector<long long> get_int_list(const std::string& key) const;   // comma-separated
    std::vector<double> get_double_list(const std::string& key) const;
    std::vector<std::string> get_string_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value, int line = 0);

    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
};

Config parse_config(std::istream& is);
Config parse_config_string(const std::string& text);
Config parse_config_file(const std::string& path);

// Throws ConfigError (with the offending line) for any key not in `known`.
void reject_unknown_keys(const Config& cfg, const std::vector<std::string>& known);

}  // namespace fedx::config
