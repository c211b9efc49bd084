#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace fedx {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSpecError : Error {
    using Error::Error;
};

struct ShapeError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct RangeError : Error {
    using Error::Error;
};

struct EmptyDataError : Error {
    using Error::Error;
};

struct InfeasibleDeviceError : Error {
    using Error::Error;
};

// Decode failures carry the bit offset at which the stream became unreadable.
struct DecodeError : Error {
    std::uint64_t bit_offset;
    DecodeError(const std::string& msg, std::uint64_t offset)
        : Error(msg + " (bit offset " + std::to_string(offset) + ")"), bit_offset(offset) {}
};

// Config parse/validation failures carry the 1-based line number.
struct ConfigError : Error {
    int line;
    ConfigError(const std::string& msg, int line_no)
        : Error("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

}  // namespace fedx
