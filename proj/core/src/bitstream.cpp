#include "fedx/bitstream.hpp"

#include <bit>
#include <cstring>

namespace fedx::quant {

namespace {

// Recursion groups for a 64-bit value fit in a fixed-size stack.
struct OmegaGroups {
    std::uint64_t value[6];
    int width[6];
    int count = 0;
};

OmegaGroups omega_groups(std::uint64_t value) {
    OmegaGroups g;
    while (value > 1) {
        int w = std::bit_width(value);
        g.value[g.count] = value;
        g.width[g.count] = w;
        ++g.count;
        value = static_cast<std::uint64_t>(w - 1);
    }
    return g;
}

void write_u32_le(BitWriter& w, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) w.push_byte(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

std::uint32_t read_u32_le(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
           (static_cast<std::uint32_t>(b[off + 2]) << 16) |
           (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

}  // namespace

std::uint64_t elias_omega_bits(std::uint64_t value) {
    if (value == 0) throw RangeError("elias omega is defined on positive integers");
    std::uint64_t bits = 1;  // terminating 0
    OmegaGroups g = omega_groups(value);
    for (int i = 0; i < g.count; ++i) bits += static_cast<std::uint64_t>(g.width[i]);
    return bits;
}

void elias_omega_encode(BitWriter& w, std::uint64_t value) {
    if (value == 0) throw RangeError("elias omega is defined on positive integers");
    OmegaGroups g = omega_groups(value);
    for (int i = g.count - 1; i >= 0; --i)
        for (int b = g.width[i] - 1; b >= 0; --b) w.push_bit((g.value[i] >> b) & 1);
    w.push_bit(0);
}

std::uint64_t elias_omega_decode(BitReader& r) {
    std::uint64_t n = 1;
    for (;;) {
        int b = r.read_bit();
        if (b == 0) return n;
        if (n > 63) throw DecodeError("malformed omega code: group exceeds 64 bits", r.position());
        std::uint64_t v = 1;
        for (std::uint64_t i = 0; i < n; ++i) v = (v << 1) | static_cast<std::uint64_t>(r.read_bit());
        n = v;
    }
}

EncodedStream encode_bitstream(std::span<const std::uint64_t> levels,
                               std::span<const std::uint8_t> signs, float norm, int q) {
    if (q < 1 || q > 32) throw RangeError("q must be in [1, 32]");
    const std::uint64_t s = std::uint64_t{1} << q;
    const std::size_t n = levels.size();
    if (n > 0xffffffffu) throw RangeError("vector too long for 32-bit element count");
    if (signs.size() != n) throw ShapeError("signs length must match levels length");

    BitWriter w;
    write_u32_le(w, static_cast<std::uint32_t>(n));
    std::uint32_t norm_bits = std::bit_cast<std::uint32_t>(norm);
    for (int i = 0; i < 4; ++i) w.push_byte(static_cast<std::uint8_t>((norm_bits >> (8 * i)) & 0xff));
    w.push_byte(static_cast<std::uint8_t>(q));

    if (norm != 0.0f && n > 0) {
        std::uint64_t gap = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (levels[i] == 0) {
                ++gap;
                continue;
            }
            if (levels[i] > s) throw RangeError("level out of range for q");
            elias_omega_encode(w, gap + 1);
            w.push_bit(signs[i] ? 1 : 0);
            elias_omega_encode(w, levels[i]);
            gap = 0;
        }
        if (gap > 0) elias_omega_encode(w, gap + 1);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            if (levels[i] != 0) throw RangeError("nonzero level with zero norm");
    }

    return EncodedStream{w.take(), w.bits()};
}

DecodedStream decode_bitstream(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 9)
        throw DecodeError("truncated header", 8 * static_cast<std::uint64_t>(bytes.size()));

    DecodedStream out;
    out.n = read_u32_le(bytes, 0);
    out.norm = std::bit_cast<float>(read_u32_le(bytes, 4));
    out.q = bytes[8];
    if (out.q < 1 || out.q > 32) throw DecodeError("q out of range", 64);
    const std::uint64_t s = std::uint64_t{1} << out.q;

    out.levels.assign(out.n, 0);
    out.signs.assign(out.n, 0);

    std::uint64_t consumed_bits = 72;
    if (out.norm != 0.0f && out.n > 0) {
        BitReader r(bytes, 72);
        std::uint64_t consumed = 0;
        while (consumed < out.n) {
            std::uint64_t v = elias_omega_decode(r);
            std::uint64_t remaining = out.n - consumed;
            if (v - 1 > remaining) throw DecodeError("gap overruns element count", r.position());
            if (v - 1 == remaining) {
                consumed = out.n;  // trailing-zero terminator
                break;
            }
            consumed += v - 1;
            int sign = r.read_bit();
            std::uint64_t level = elias_omega_decode(r);
            if (level > s) throw DecodeError("level out of range for q", r.position());
            out.levels[consumed] = level;
            out.signs[consumed] = static_cast<std::uint8_t>(sign);
            ++consumed;
        }
        consumed_bits = r.position();
    }

    std::uint64_t expected_bytes = (consumed_bits + 7) / 8;
    if (bytes.size() > expected_bytes)
        throw DecodeError("trailing garbage beyond padding", consumed_bits);
    if (consumed_bits % 8 != 0) {
        std::uint8_t last = bytes[bytes.size() - 1];
        std::uint8_t mask = static_cast<std::uint8_t>(0xffu >> (consumed_bits % 8));
        if (last & mask) throw DecodeError("nonzero padding bits", consumed_bits);
    }

    out.bits = consumed_bits;
    return out;
}

}  // namespace fedx::quant
