#include "fedx/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fedx::config {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t");
    return s.substr(a, b - a + 1);
}

}  // namespace

const std::string& Config::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("missing key '" + key + "'", 0);
    return it->second;
}

int Config::line_of(const std::string& key) const {
    auto it = lines_.find(key);
    return it == lines_.end() ? 0 : it->second;
}

void Config::fail(const std::string& key, const std::string& what) const {
    throw ConfigError("key '" + key + "': " + what, line_of(key));
}

std::string Config::get_string(const std::string& key) const { return raw(key); }

long long Config::get_int(const std::string& key) const {
    const std::string& s = raw(key);
    long long v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(key, "expected an integer");
    return v;
}

double Config::get_double(const std::string& key) const {
    const std::string& s = raw(key);
    double v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(key, "expected a number");
    return v;
}

bool Config::get_bool(const std::string& key) const {
    std::string s = raw(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    fail(key, "expected a boolean (true/false/1/0/yes/no)");
}

std::vector<std::string> Config::get_string_list(const std::string& key) const {
    const std::string& s = raw(key);
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t comma = s.find(',', start);
        const std::string item =
            trim(comma == std::string::npos ? s.substr(start) : s.substr(start, comma - start));
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (out.empty()) fail(key, "expected a non-empty comma-separated list");
    return out;
}

std::vector<long long> Config::get_int_list(const std::string& key) const {
    std::vector<long long> out;
    for (const auto& item : get_string_list(key)) {
        long long v{};
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size())
            fail(key, "expected integers, got '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : get_string_list(key)) {
        double v{};
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size())
            fail(key, "expected numbers, got '" + item + "'");
        out.push_back(v);
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value, int line) {
    values_[key] = value;
    lines_[key] = line;
}

Config parse_config(std::istream& is) {
    Config cfg;
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("unterminated section header", lineno);
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) throw ConfigError("empty section name", lineno);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected 'key = value'", lineno);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("empty key", lineno);
        const std::string qualified = section.empty() ? key : section + "." + key;
        if (cfg.has(qualified))
            throw ConfigError("duplicate key '" + qualified + "'", lineno);
        cfg.set(qualified, value, lineno);
    }
    return cfg;
}

Config parse_config_string(const std::string& text) {
    std::istringstream is(text);
    return parse_config(is);
}

Config parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file: " + path, 0);
    return parse_config(f);
}

void reject_unknown_keys(const Config& cfg, const std::vector<std::string>& known) {
    for (const auto& [key, value] : cfg.entries()) {
        (void)value;
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError("unknown key '" + key + "'", cfg.line_of(key));
    }
}

}  // namespace fedx::config
