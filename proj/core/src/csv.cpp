#include "fedx/csv.hpp"

#include <charconv>
#include <system_error>

#include "fedx/errors.hpp"

namespace fedx::csv {

namespace {

template <typename T>
std::string format_fp(T v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw NumericError("to_chars failed");
    return std::string(buf, ptr);
}

template <typename T>
T parse_fp(std::string_view s) {
    T v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw NumericError("not a number: '" + std::string(s) + "'");
    return v;
}

}  // namespace

std::string format_double(double v) { return format_fp(v); }
std::string format_float(float v) { return format_fp(v); }
double parse_double(std::string_view s) { return parse_fp<double>(s); }
float parse_float(std::string_view s) { return parse_fp<float>(s); }

long long parse_int(std::string_view s) {
    long long v{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw NumericError("not an integer: '" + std::string(s) + "'");
    return v;
}

int Table::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

Table read_csv(std::istream& is) {
    Table t;
    std::string line;
    bool first = true;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            if (comma == std::string::npos) {
                fields.push_back(line.substr(start));
                break;
            }
            fields.push_back(line.substr(start, comma - start));
            start = comma + 1;
        }
        if (first) {
            t.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != t.header.size())
                throw Error("csv row width differs from header");
            t.rows.push_back(std::move(fields));
        }
    }
    return t;
}

}  // namespace fedx::csv
