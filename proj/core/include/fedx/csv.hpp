#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace fedx::csv {

// Shortest decimal string that parses back to exactly the same value.
std::string format_double(double v);
std::string format_float(float v);

double parse_double(std::string_view s);
float parse_float(std::string_view s);
long long parse_int(std::string_view s);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

// Comma-split without quoting (no emitted field ever contains a comma).
Table read_csv(std::istream& is);

}  // namespace fedx::csv
