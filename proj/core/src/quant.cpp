#include "fedx/quant.hpp"

#include <cmath>

#include "fedx/rng.hpp"

namespace fedx::quant {

QuantizedPayload quantize(std::span<const float> theta, int q, std::uint64_t key) {
    if (q < 1 || q > 32) throw RangeError("q must be in [1, 32]");

    double norm_sq = 0.0;
    for (float v : theta) {
        if (!std::isfinite(v)) throw NumericError("non-finite input to quantize");
        norm_sq += static_cast<double>(v) * static_cast<double>(v);
    }
    const float norm = static_cast<float>(std::sqrt(norm_sq));
    const std::uint64_t s = std::uint64_t{1} << q;
    const std::size_t n = theta.size();

    std::vector<std::uint64_t> levels(n, 0);
    std::vector<std::uint8_t> signs(n, 0);
    if (norm != 0.0f) {
        const double sd = static_cast<double>(s);
        for (std::size_t i = 0; i < n; ++i) {
            double x = std::abs(static_cast<double>(theta[i])) / static_cast<double>(norm);
            if (x > 1.0) x = 1.0;
            double scaled = x * sd;
            std::uint64_t lo = static_cast<std::uint64_t>(scaled);
            if (lo >= s) {
                levels[i] = s;
            } else {
                double frac = scaled - static_cast<double>(lo);
                levels[i] = lo + (rng::uniform01(key, i) < frac ? 1 : 0);
            }
            signs[i] = theta[i] < 0.0f ? 1 : 0;
        }
    }

    EncodedStream enc = encode_bitstream(levels, signs, norm, q);
    QuantizedPayload p;
    p.n = static_cast<std::uint32_t>(n);
    p.norm = norm;
    p.q = q;
    p.bitstream = std::move(enc.bytes);
    p.encoded_bits = enc.bits;
    return p;
}

std::vector<float> dequantize(const QuantizedPayload& payload) {
    DecodedStream d = decode_bitstream(payload.bitstream);
    const double s = static_cast<double>(std::uint64_t{1} << d.q);
    std::vector<float> out(d.n, 0.0f);
    for (std::uint32_t i = 0; i < d.n; ++i) {
        double v = static_cast<double>(d.norm) * (static_cast<double>(d.levels[i]) / s);
        out[i] = static_cast<float>(d.signs[i] ? -v : v);
    }
    return out;
}

QuantizedPayload payload_from_bytes(std::vector<std::uint8_t> bytes) {
    DecodedStream d = decode_bitstream(bytes);
    QuantizedPayload p;
    p.n = d.n;
    p.norm = d.norm;
    p.q = d.q;
    p.bitstream = std::move(bytes);
    p.encoded_bits = d.bits;
    return p;
}

PrecisionClass precision_class(int q) {
    if (q <= 8) return PrecisionClass::Int8;
    if (q <= 16) return PrecisionClass::Float16;
    return PrecisionClass::Float32;
}

int precision_bits(PrecisionClass c) {
    switch (c) {
        case PrecisionClass::Int8: return 8;
        case PrecisionClass::Float16: return 16;
        case PrecisionClass::Float32: return 32;
    }
    return 32;
}

std::string to_string(PrecisionClass c) {
    switch (c) {
        case PrecisionClass::Int8: return "int8";
        case PrecisionClass::Float16: return "float16";
        case PrecisionClass::Float32: return "float32";
    }
    return "float32";
}

}  // namespace fedx::quant
