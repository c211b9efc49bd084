#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "fedx/bitstream.hpp"
#include "fedx/config.hpp"
#include "fedx/csv.hpp"
#include "fedx/quant.hpp"

using namespace fedx;
using namespace fedx::quant;

namespace {

namespace fs = std::filesystem;

struct GoldenFixture {
    std::string name;
    std::vector<std::uint64_t> levels;
    std::vector<std::uint8_t> signs;
    float norm = 0.0f;
    int q = 1;
    std::uint64_t bits = 0;
    std::vector<std::uint8_t> bytes;
};

GoldenFixture load_fixture(const fs::path& txt_path) {
    GoldenFixture f;
    f.name = txt_path.stem().string();

    // the .txt reuses the config grammar, so the config parser reads it
    std::ifstream txt(txt_path);
    REQUIRE(txt);
    std::stringstream ss;
    ss << txt.rdbuf();
    const auto cfg = config::parse_config_string(ss.str());

    f.q = static_cast<int>(cfg.get_int("q"));
    f.norm = csv::parse_float(cfg.get_string("norm"));
    f.bits = static_cast<std::uint64_t>(cfg.get_int("bits"));
    const std::size_t n = static_cast<std::size_t>(cfg.get_int("n"));
    if (n > 0) {
        for (long long v : cfg.get_int_list("levels"))
            f.levels.push_back(static_cast<std::uint64_t>(v));
        for (long long v : cfg.get_int_list("signs"))
            f.signs.push_back(static_cast<std::uint8_t>(v));
    }
    REQUIRE(f.levels.size() == n);
    REQUIRE(f.signs.size() == n);

    fs::path bin_path = txt_path;
    bin_path.replace_extension(".bin");
    std::ifstream bin(bin_path, std::ios::binary);
    REQUIRE(bin);
    f.bytes.assign(std::istreambuf_iterator<char>(bin), std::istreambuf_iterator<char>());
    return f;
}

}  // namespace

TEST_CASE("golden fixtures: wire bytes are frozen") {
    const fs::path dir = FEDX_GOLDEN_DIR;
    std::vector<GoldenFixture> fixtures;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.path().extension() == ".txt") fixtures.push_back(load_fixture(entry.path()));
    std::sort(fixtures.begin(), fixtures.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    REQUIRE(fixtures.size() >= 10);

    for (const auto& f : fixtures) {
        CAPTURE(f.name);

        // encoding the described payload must reproduce the stored bytes
        const auto enc = encode_bitstream(f.levels, f.signs, f.norm, f.q);
        CHECK(enc.bytes == f.bytes);
        CHECK(enc.bits == f.bits);

        // and the stored bytes must decode back to the described payload
        const auto dec = decode_bitstream(f.bytes);
        CHECK(dec.n == f.levels.size());
        CHECK(dec.q == f.q);
        CHECK(dec.norm == f.norm);
        CHECK(dec.levels == f.levels);
        CHECK(dec.bits == f.bits);
        for (std::size_t i = 0; i < f.levels.size(); ++i)
            if (f.levels[i] != 0) CHECK(dec.signs[i] == f.signs[i]);

        // payload_from_bytes accepts every fixture as a full payload
        const auto payload = payload_from_bytes(f.bytes);
        CHECK(payload.encoded_bits == f.bits);
        CHECK(payload.n == f.levels.size());
    }
}

TEST_CASE("golden fixtures: hand-derived byte anchors") {
    // independently derived from the wire format, bit by bit
    const std::map<std::string, std::vector<std::uint8_t>> anchors = {
        // n=3 | norm 5.0 | q 8 | gap w(1) sign w(256) terminator w(3)
        {"fixture_01_single_max_level",
         {0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0xA0, 0x40, 0x08, 0x38, 0x80, 0x30}},
        // n=0, norm 0: header only
        {"fixture_02_empty", {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01}},
        // n=7 all zero: terminator w(8) = 1110000 -> 0xE0
        {"fixture_03_all_zero_levels",
         {0x07, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3F, 0x04, 0xE0}},
        // zero norm skips the body no matter the level count
        {"fixture_04_zero_norm_skips_body",
         {0x05, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x08}},
        // gap w(1)=0, sign 1, w(3)=110 -> 01110 -> 0x70
        {"fixture_05_single_negative",
         {0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x20, 0x40, 0x02, 0x70}},
        // two saturated levels (s=4): 0 1 101000 | 0 0 101000 -> 0x68 0x28
        {"fixture_06_saturated_pair",
         {0x02, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3F, 0x02, 0x68, 0x28}},
        // 99 leading zeros: w(100) = 1011011001000, sign 0, w(1)=0 -> 0xB6 0x40
        {"fixture_07_long_gap",
         {0x64, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3E, 0x01, 0xB6, 0x40}},
    };
    const fs::path dir = FEDX_GOLDEN_DIR;
    for (const auto& [name, bytes] : anchors) {
        CAPTURE(name);
        std::ifstream bin(dir / (name + ".bin"), std::ios::binary);
        REQUIRE(bin);
        const std::vector<std::uint8_t> stored{std::istreambuf_iterator<char>(bin),
                                               std::istreambuf_iterator<char>()};
        CHECK(stored == bytes);
    }
}
