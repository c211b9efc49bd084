#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fedx/errors.hpp"

// Bit-level wire format for quantized parameter vectors. Frozen contract:
//   header   n:u32 LE | norm:f32 LE | q:u8                      (72 bits)
//   body     per nonzero level, in index order:
//              omega(gap+1)  gap = zero levels since previous nonzero
//              sign bit      1 = negative
//              omega(level)
//            then omega(remaining_zeros+1) if any trailing zeros
//   padding  final byte padded with 0 bits
// Bits are MSB-first within bytes. A zero norm (or n = 0) means the body is
// omitted entirely. See docs/wire_format.md.

namespace fedx::quant {

class BitWriter {
public:
    void push_bit(int b) {
        if (bit_pos_ == 0) bytes_.push_back(0);
        if (b) bytes_.back() |= static_cast<std::uint8_t>(1u << (7 - bit_pos_));
        bit_pos_ = (bit_pos_ + 1) & 7;
        ++bits_;
    }

    void push_byte(std::uint8_t v) {
        for (int i = 7; i >= 0; --i) push_bit((v >> i) & 1);
    }

    std::uint64_t bits() const { return bits_; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }
    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
    int bit_pos_ = 0;
    std::uint64_t bits_ = 0;
};

class BitReader {
public:
    BitReader(std::span<const std::uint8_t> bytes, std::uint64_t start_bit = 0)
        : bytes_(bytes), pos_(start_bit), end_(8 * static_cast<std::uint64_t>(bytes.size())) {}

    int read_bit() {
        if (pos_ >= end_) throw DecodeError("truncated bitstream", pos_);
        int b = (bytes_[static_cast<std::size_t>(pos_ >> 3)] >> (7 - (pos_ & 7))) & 1;
        ++pos_;
        return b;
    }

    std::uint64_t position() const { return pos_; }

private:
    std::span<const std::uint8_t> bytes_;
    std::uint64_t pos_;
    std::uint64_t end_;
};

// Elias omega code over positive integers.
std::uint64_t elias_omega_bits(std::uint64_t value);
void elias_omega_encode(BitWriter& w, std::uint64_t value);
std::uint64_t elias_omega_decode(BitReader& r);

struct EncodedStream {
    std::vector<std::uint8_t> bytes;  // padded to a whole byte
    std::uint64_t bits;               // exact payload size before padding
};

struct DecodedStream {
    std::vector<std::uint64_t> levels;
    std::vector<std::uint8_t> signs;  // 1 = negative; meaningful only where level > 0
    float norm;
    int q;
    std::uint32_t n;
    std::uint64_t bits;
};

EncodedStream encode_bitstream(std::span<const std::uint64_t> levels,
                               std::span<const std::uint8_t> signs, float norm, int q);
DecodedStream decode_bitstream(std::span<const std::uint8_t> bytes);

}  // namespace fedx::quant
