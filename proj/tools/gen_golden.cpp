// Regenerates the codec golden fixtures under tests/golden/. Each fixture is
// a .txt describing a payload (n, norm, q, levels, signs) plus a .bin with
// the exact wire bytes. The first few are small enough to verify by hand
// against docs/wire_format.md; the rest freeze realistic quantizer output.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "fedx/bitstream.hpp"
#include "fedx/csv.hpp"
#include "fedx/quant.hpp"
#include "fedx/rng.hpp"

using namespace fedx;

namespace {

struct Fixture {
    std::string name;
    std::vector<std::uint64_t> levels;
    std::vector<std::uint8_t> signs;
    float norm = 0.0f;
    int q = 1;
};

Fixture from_payload(const std::string& name, const quant::QuantizedPayload& p) {
    const auto dec = quant::decode_bitstream(p.bitstream);
    Fixture f;
    f.name = name;
    f.levels = dec.levels;
    f.signs = dec.signs;
    f.norm = dec.norm;
    f.q = dec.q;
    return f;
}

std::vector<float> gaussian(int n, double scale, std::uint64_t key) {
    std::vector<float> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] =
            static_cast<float>(scale * rng::normal_at(key, static_cast<std::uint64_t>(i)));
    return v;
}

void write_fixture(const std::filesystem::path& dir, const Fixture& f) {
    const auto enc = quant::encode_bitstream(f.levels, f.signs, f.norm, f.q);

    std::ofstream txt(dir / (f.name + ".txt"));
    txt << "# codec golden fixture: fields of one payload, wire bytes in the .bin\n";
    txt << "q = " << f.q << "\n";
    txt << "norm = " << csv::format_float(f.norm) << "\n";
    txt << "n = " << f.levels.size() << "\n";
    txt << "bits = " << enc.bits << "\n";
    txt << "levels =";
    for (std::size_t i = 0; i < f.levels.size(); ++i)
        txt << (i ? "," : " ") << f.levels[i];
    txt << "\n";
    txt << "signs =";
    for (std::size_t i = 0; i < f.signs.size(); ++i)
        txt << (i ? "," : " ") << static_cast<int>(f.signs[i]);
    txt << "\n";

    std::ofstream bin(dir / (f.name + ".bin"), std::ios::binary);
    bin.write(reinterpret_cast<const char*>(enc.bytes.data()),
              static_cast<std::streamsize>(enc.bytes.size()));
    std::cout << f.name << ": n=" << f.levels.size() << " q=" << f.q << " bits=" << enc.bits
              << " bytes=" << enc.bytes.size() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: gen_golden <output-dir>\n";
        return 1;
    }
    const std::filesystem::path dir = argv[1];
    std::filesystem::create_directories(dir);

    std::vector<Fixture> fixtures;

    // hand-checkable cases first
    fixtures.push_back({"fixture_01_single_max_level", {256, 0, 0}, {0, 0, 0}, 5.0f, 8});
    fixtures.push_back({"fixture_02_empty", {}, {}, 0.0f, 1});
    fixtures.push_back({"fixture_03_all_zero_levels", std::vector<std::uint64_t>(7, 0),
                        std::vector<std::uint8_t>(7, 0), 1.0f, 4});
    fixtures.push_back({"fixture_04_zero_norm_skips_body", std::vector<std::uint64_t>(5, 0),
                        std::vector<std::uint8_t>(5, 0), 0.0f, 8});
    fixtures.push_back({"fixture_05_single_negative", {3}, {1}, 2.5f, 2});
    fixtures.push_back({"fixture_06_saturated_pair", {4, 4}, {1, 0}, 1.0f, 2});
    {
        std::vector<std::uint64_t> levels(100, 0);
        std::vector<std::uint8_t> signs(100, 0);
        levels[99] = 1;
        fixtures.push_back({"fixture_07_long_gap", levels, signs, 0.25f, 1});
    }

    // realistic quantizer output across the q range
    const std::uint64_t seed = 2024;
    fixtures.push_back(from_payload(
        "fixture_08_gauss64_q4",
        quant::quantize(gaussian(64, 1.0, rng::key_of(seed, rng::Stream::TaskGen, 64)), 4,
                        rng::key_of(seed, rng::Stream::Quant, 8))));
    fixtures.push_back(from_payload(
        "fixture_09_gauss256_q1",
        quant::quantize(gaussian(256, 0.1, rng::key_of(seed, rng::Stream::TaskGen, 256)), 1,
                        rng::key_of(seed, rng::Stream::Quant, 9))));
    fixtures.push_back(from_payload(
        "fixture_10_gauss1000_q8",
        quant::quantize(gaussian(1000, 3.0, rng::key_of(seed, rng::Stream::TaskGen, 1000)), 8,
                        rng::key_of(seed, rng::Stream::Quant, 10))));
    fixtures.push_back(from_payload(
        "fixture_11_gauss32_q32",
        quant::quantize(gaussian(32, 10.0, rng::key_of(seed, rng::Stream::TaskGen, 32)), 32,
                        rng::key_of(seed, rng::Stream::Quant, 11))));
    fixtures.push_back(from_payload(
        "fixture_12_gauss128_q16",
        quant::quantize(gaussian(128, 1e-3, rng::key_of(seed, rng::Stream::TaskGen, 128)), 16,
                        rng::key_of(seed, rng::Stream::Quant, 12))));

    for (const auto& f : fixtures) write_fixture(dir, f);
    return 0;
}
