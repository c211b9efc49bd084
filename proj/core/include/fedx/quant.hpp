#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedx/bitstream.hpp"

// Stochastic fixed-point quantizer. quantize() scales a vector by its L2 norm,
// dithers each magnitude onto one of 2^q + 1 level endpoints in [0, 1] so the
// expectation is preserved, and entropy-codes the integer levels (zero
// run-length gaps + elias omega) behind a fixed 9-byte header. The dither is
// counter-based: draw i comes from uniform01(key, i), so identical keys replay
// identical payloads regardless of evaluation order.

namespace fedx::quant {

struct QuantizedPayload {
    std::uint32_t n = 0;
    float norm = 0.0f;
    int q = 1;
    std::vector<std::uint8_t> bitstream;  // header + body, zero-padded to bytes
    std::uint64_t encoded_bits = 0;       // exact size in bits, header included
};

QuantizedPayload quantize(std::span<const float> theta, int q, std::uint64_t key);
std::vector<float> dequantize(const QuantizedPayload& payload);

// Rebuild a payload from raw bytes (validates and extracts the exact bit count).
QuantizedPayload payload_from_bytes(std::vector<std::uint8_t> bytes);

inline std::uint64_t payload_bits(const QuantizedPayload& p) { return p.encoded_bits; }

// Deployment precision tier: q is rounded up to the nearest storage width.
enum class PrecisionClass { Int8, Float16, Float32 };

PrecisionClass precision_class(int q);
int precision_bits(PrecisionClass c);
std::string to_string(PrecisionClass c);

}  // namespace fedx::quant
