#include "fedx/elastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>

#include "fedx/rng.hpp"

namespace fedx::nn {

namespace {

bool sorted_unique_in(const std::vector<int>& v, int lo, int hi) {
    if (v.empty()) return false;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < lo || v[i] > hi) return false;
        if (i > 0 && v[i] <= v[i - 1]) return false;
    }
    return true;
}

}  // namespace

void ElasticArch::validate() const {
    if (input_dim <= 0 || output_dim <= 0) throw Error("arch: dims must be positive");
    if (num_blocks <= 0 || max_depth_per_block <= 0 || max_width <= 0)
        throw Error("arch: block/depth/width must be positive");
    if (!sorted_unique_in(allowed_depths, 1, max_depth_per_block))
        throw Error("arch: allowed_depths must be sorted, unique, within [1, max_depth_per_block]");
    if (!sorted_unique_in(allowed_widths, 1, max_width))
        throw Error("arch: allowed_widths must be sorted, unique, within [1, max_width]");
    if (allowed_depths.back() != max_depth_per_block)
        throw Error("arch: allowed_depths must include max_depth_per_block");
    if (allowed_widths.back() != max_width)
        throw Error("arch: allowed_widths must include max_width");
}

bool ElasticArch::spec_allowed(const SubNetworkSpec& s) const {
    return std::binary_search(allowed_depths.begin(), allowed_depths.end(), s.depth) &&
           std::binary_search(allowed_widths.begin(), allowed_widths.end(), s.width);
}

void ElasticArch::require_spec(const SubNetworkSpec& s) const {
    if (!spec_allowed(s))
        throw InvalidSpecError("sub-network spec (depth=" + std::to_string(s.depth) +
                               ", width=" + std::to_string(s.width) + ") not allowed by arch");
}

ElasticModel init_model(const ElasticArch& arch, std::uint64_t seed) {
    arch.validate();
    ElasticModel m;
    m.arch = arch;
    m.params.assign(static_cast<std::size_t>(arch.param_count()), 0.0f);

    auto fill = [&](std::int64_t w_off, std::int64_t rows, std::int64_t cols, int fan,
                    std::uint64_t layer_id) {
        const double std_dev = std::sqrt(2.0 / fan);
        const std::uint64_t key = rng::key_of(seed, rng::Stream::Init, layer_id);
        for (std::int64_t j = 0; j < rows * cols; ++j)
            m.params[static_cast<std::size_t>(w_off + j)] =
                static_cast<float>(std_dev * rng::normal_at(key, static_cast<std::uint64_t>(j)));
    };

    std::uint64_t layer_id = 0;
    fill(arch.input_w_offset(), arch.max_width, arch.input_dim, arch.input_dim, layer_id++);
    for (int k = 0; k < arch.num_blocks; ++k)
        for (int l = 0; l < arch.max_depth_per_block; ++l)
            fill(arch.hidden_w_offset(k, l), arch.max_width, arch.max_width, arch.max_width,
                 layer_id++);
    fill(arch.output_w_offset(), arch.output_dim, arch.max_width, arch.max_width, layer_id++);
    return m;
}

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void put_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    if (std::fwrite(b, 1, 4, f) != 4) throw Error("short write");
}

std::uint32_t get_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw Error("truncated model file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

constexpr std::uint32_t kModelMagic = 0x314d5846;  // "FXM1"

}  // namespace

void save_model(const ElasticModel& m, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw Error("cannot open for write: " + path);
    put_u32(f.get(), kModelMagic);
    put_u32(f.get(), static_cast<std::uint32_t>(m.arch.input_dim));
    put_u32(f.get(), static_cast<std::uint32_t>(m.arch.output_dim));
    put_u32(f.get(), static_cast<std::uint32_t>(m.arch.num_blocks));
    put_u32(f.get(), static_cast<std::uint32_t>(m.arch.max_depth_per_block));
    put_u32(f.get(), static_cast<std::uint32_t>(m.arch.max_width));
    put_u32(f.get(), static_cast<std::uint32_t>(m.arch.allowed_depths.size()));
    for (int d : m.arch.allowed_depths) put_u32(f.get(), static_cast<std::uint32_t>(d));
    put_u32(f.get(), static_cast<std::uint32_t>(m.arch.allowed_widths.size()));
    for (int w : m.arch.allowed_widths) put_u32(f.get(), static_cast<std::uint32_t>(w));
    put_u32(f.get(), static_cast<std::uint32_t>(m.params.size()));
    static_assert(sizeof(float) == 4);
    if (!m.params.empty() &&
        std::fwrite(m.params.data(), 4, m.params.size(), f.get()) != m.params.size())
        throw Error("short write");
}

ElasticModel load_model(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw Error("cannot open for read: " + path);
    if (get_u32(f.get()) != kModelMagic) throw Error("not a model file: " + path);
    ElasticModel m;
    m.arch.input_dim = static_cast<int>(get_u32(f.get()));
    m.arch.output_dim = static_cast<int>(get_u32(f.get()));
    m.arch.num_blocks = static_cast<int>(get_u32(f.get()));
    m.arch.max_depth_per_block = static_cast<int>(get_u32(f.get()));
    m.arch.max_width = static_cast<int>(get_u32(f.get()));
    m.arch.allowed_depths.resize(get_u32(f.get()));
    for (int& d : m.arch.allowed_depths) d = static_cast<int>(get_u32(f.get()));
    m.arch.allowed_widths.resize(get_u32(f.get()));
    for (int& w : m.arch.allowed_widths) w = static_cast<int>(get_u32(f.get()));
    m.arch.validate();
    std::uint32_t n = get_u32(f.get());
    if (static_cast<std::int64_t>(n) != m.arch.param_count())
        throw Error("model file parameter count disagrees with arch: " + path);
    m.params.resize(n);
    if (n && std::fread(m.params.data(), 4, n, f.get()) != n)
        throw Error("truncated model file");
    return m;
}

}  // namespace fedx::nn
