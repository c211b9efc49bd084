#include <doctest.h>

#include <cstdint>
#include <string>
#include <vector>

#include "fedx/bitstream.hpp"
#include "fedx/errors.hpp"
#include "fedx/rng.hpp"

using namespace fedx;
using namespace fedx::quant;

static std::string omega_bits_of(std::uint64_t v) {
    BitWriter w;
    elias_omega_encode(w, v);
    const std::uint64_t nbits = w.bits();
    auto bytes = w.take();
    std::string s;
    for (std::uint64_t i = 0; i < nbits; ++i) {
        const std::uint8_t byte = bytes[i / 8];
        s += ((byte >> (7 - (i % 8))) & 1) ? '1' : '0';
    }
    return s;
}

TEST_SUITE("bitstream") {

TEST_CASE("omega codes match hand-derived strings") {
    CHECK(omega_bits_of(1) == "0");
    CHECK(omega_bits_of(2) == "100");
    CHECK(omega_bits_of(3) == "110");
    CHECK(omega_bits_of(4) == "101000");
    CHECK(omega_bits_of(7) == "101110");
    CHECK(omega_bits_of(8) == "1110000");
    CHECK(omega_bits_of(16) == "10100100000");
    CHECK(omega_bits_of(100) == "1011011001000");
    CHECK(omega_bits_of(256) == "1110001000000000");
    CHECK(omega_bits_of(256).size() == 16);
}

TEST_CASE("omega bit-length function agrees with the encoder") {
    for (std::uint64_t v : {1ull, 2ull, 3ull, 4ull, 7ull, 8ull, 100ull, 256ull, 65535ull,
                            1000000ull, 0xFFFFFFFFull, 0xFFFFFFFFFFFFull}) {
        BitWriter w;
        elias_omega_encode(w, v);
        CHECK(elias_omega_bits(v) == w.bits());
    }
}

TEST_CASE("omega round-trips across magnitudes") {
    BitWriter w;
    std::vector<std::uint64_t> vals;
    for (int p = 0; p < 62; ++p) {
        vals.push_back(1ull << p);
        if (p > 0) vals.push_back((1ull << p) + (1ull << (p / 2)));
    }
    vals.push_back(0xFFFFFFFFFFFFFFFFull);
    for (auto v : vals) elias_omega_encode(w, v);
    const auto bytes = w.take();
    BitReader r(bytes, 0);
    for (auto v : vals) CHECK(elias_omega_decode(r) == v);
}

TEST_CASE("encode rejects zero") {
    BitWriter w;
    CHECK_THROWS_AS(elias_omega_encode(w, 0), Error);
}

TEST_CASE("wire fixture: (5,0,0) at q=8") {
    // header 72 bits, then gap omega(1), sign 0, omega(256), terminator omega(3)
    std::vector<std::uint64_t> levels = {256, 0, 0};
    std::vector<std::uint8_t> signs = {0, 0, 0};
    auto enc = encode_bitstream(levels, signs, 5.0f, 8);
    const std::vector<std::uint8_t> expect = {0x03, 0x00, 0x00, 0x00, 0x00, 0x00,
                                              0xA0, 0x40, 0x08, 0x38, 0x80, 0x30};
    CHECK(enc.bytes == expect);
    CHECK(enc.bits == 93);

    auto dec = decode_bitstream(enc.bytes);
    CHECK(dec.n == 3);
    CHECK(dec.q == 8);
    CHECK(dec.norm == 5.0f);
    CHECK(dec.levels == levels);
    CHECK(dec.signs == signs);
    CHECK(dec.bits == 93);
}

TEST_CASE("zero norm emits a header-only payload") {
    std::vector<std::uint64_t> levels(7, 0);
    std::vector<std::uint8_t> signs(7, 0);
    auto enc = encode_bitstream(levels, signs, 0.0f, 4);
    CHECK(enc.bits == 72);
    CHECK(enc.bytes.size() == 9);
    auto dec = decode_bitstream(enc.bytes);
    CHECK(dec.n == 7);
    CHECK(dec.levels == levels);
}

TEST_CASE("all-zero levels with nonzero norm emit only the terminator") {
    std::vector<std::uint64_t> levels(7, 0);
    std::vector<std::uint8_t> signs(7, 0);
    auto enc = encode_bitstream(levels, signs, 1.0f, 4);
    // terminator omega(8) = 1110000 -> one body byte 0xE0
    CHECK(enc.bits == 72 + 7);
    REQUIRE(enc.bytes.size() == 10);
    CHECK(enc.bytes[9] == 0xE0);
    auto dec = decode_bitstream(enc.bytes);
    CHECK(dec.levels == levels);
    CHECK(dec.norm == 1.0f);
}

TEST_CASE("empty vector encodes as bare header") {
    auto enc = encode_bitstream({}, {}, 0.0f, 8);
    CHECK(enc.bits == 72);
    auto dec = decode_bitstream(enc.bytes);
    CHECK(dec.n == 0);
    CHECK(dec.levels.empty());
}

TEST_CASE("random payloads round-trip bit-exactly") {
    rng::Rng r(rng::key_of(77, rng::Stream::Quant, 1));
    for (int trial = 0; trial < 50; ++trial) {
        const int q = 1 + static_cast<int>(r.below(32));
        const std::uint64_t s = (q == 32) ? (1ull << 32) : (1ull << q);
        const int n = static_cast<int>(r.below(200));
        std::vector<std::uint64_t> levels(n);
        std::vector<std::uint8_t> signs(n);
        for (int i = 0; i < n; ++i) {
            // mostly zero, as real quantized tensors are
            levels[i] = (r.uniform01() < 0.3) ? r.below(s + 1) : 0;
            signs[i] = static_cast<std::uint8_t>(r.below(2));
        }
        const float norm = (n > 0) ? 1.5f : 0.0f;
        auto enc = encode_bitstream(levels, signs, norm, q);
        auto dec = decode_bitstream(enc.bytes);
        REQUIRE(dec.n == static_cast<std::uint32_t>(n));
        CHECK(dec.q == q);
        CHECK(dec.levels == levels);
        CHECK(dec.bits == enc.bits);
        // signs of zero levels are not transmitted; compare nonzero positions
        for (int i = 0; i < n; ++i)
            if (levels[i] != 0) CHECK(dec.signs[i] == signs[i]);
        // canonical: re-encoding the decode reproduces the bytes
        auto re = encode_bitstream(dec.levels, dec.signs, dec.norm, dec.q);
        CHECK(re.bytes == enc.bytes);
    }
}

TEST_CASE("decoder rejects truncated and corrupted payloads") {
    std::vector<std::uint64_t> levels = {256, 0, 0};
    std::vector<std::uint8_t> signs = {0, 0, 0};
    auto enc = encode_bitstream(levels, signs, 5.0f, 8);

    SUBCASE("truncated header") {
        std::vector<std::uint8_t> cut(enc.bytes.begin(), enc.bytes.begin() + 5);
        CHECK_THROWS_AS(decode_bitstream(cut), DecodeError);
    }
    SUBCASE("truncated body") {
        std::vector<std::uint8_t> cut(enc.bytes.begin(), enc.bytes.end() - 1);
        CHECK_THROWS_AS(decode_bitstream(cut), DecodeError);
    }
    SUBCASE("trailing garbage byte") {
        auto bad = enc.bytes;
        bad.push_back(0xFF);
        CHECK_THROWS_AS(decode_bitstream(bad), DecodeError);
    }
    SUBCASE("nonzero padding bits") {
        auto bad = enc.bytes;
        bad.back() |= 0x01;  // padding region of the last byte
        CHECK_THROWS_AS(decode_bitstream(bad), DecodeError);
    }
    SUBCASE("level beyond the q range") {
        auto good = encode_bitstream(std::vector<std::uint64_t>{4, 0},
                                     std::vector<std::uint8_t>{0, 0}, 1.0f, 2);
        // decode with a doctored q in the header (q=1 -> s=2 < level 4)
        auto bad = good.bytes;
        bad[8] = 0x01;
        CHECK_THROWS_AS(decode_bitstream(bad), DecodeError);
    }
    SUBCASE("bit offset is reported") {
        std::vector<std::uint8_t> cut(enc.bytes.begin(), enc.bytes.begin() + 5);
        try {
            decode_bitstream(cut);
            FAIL("expected DecodeError");
        } catch (const DecodeError& e) {
            CHECK(std::string(e.what()).find("bit") != std::string::npos);
        }
    }
}

TEST_CASE("encoder validates inputs") {
    auto enc = [](std::vector<std::uint64_t> levels, std::vector<std::uint8_t> signs, float norm,
                  int q) { return encode_bitstream(levels, signs, norm, q); };
    CHECK_THROWS_AS(enc({1}, {0}, 1.0f, 0), Error);
    CHECK_THROWS_AS(enc({1}, {0}, 1.0f, 33), Error);
    CHECK_THROWS_AS(enc({1}, {0, 0}, 1.0f, 8), ShapeError);
    CHECK_THROWS_AS(enc({3, 0}, {0, 0}, 1.0f, 1), RangeError);  // 3 > s=2
    CHECK_THROWS_AS(enc({1, 0}, {0, 0}, 0.0f, 1), RangeError);  // nonzero @ norm 0
}

}  // TEST_SUITE
