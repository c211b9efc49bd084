#include "fedx/dataset.hpp"

#include <cstdio>
#include <cstring>
#include <memory>

namespace fedx {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_u32(std::FILE* f, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                          static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    if (std::fwrite(b, 1, 4, f) != 4) throw Error("short write");
}

std::uint32_t read_u32(std::FILE* f) {
    unsigned char b[4];
    if (std::fread(b, 1, 4, f) != 4) throw Error("truncated dataset file");
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

Dataset subset(const Dataset& d, std::span<const int> indices) {
    Dataset out;
    out.input_dim = d.input_dim;
    out.num_classes = d.num_classes;
    out.inputs.reserve(indices.size() * static_cast<std::size_t>(d.input_dim));
    out.labels.reserve(indices.size());
    for (int i : indices) {
        if (i < 0 || i >= d.size()) throw RangeError("subset index out of range");
        out.push_row(d.row(i), d.labels[i]);
    }
    return out;
}

void save_dataset(const Dataset& d, const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "wb"));
    if (!f) throw Error("cannot open for write: " + path);
    write_u32(f.get(), static_cast<std::uint32_t>(d.size()));
    write_u32(f.get(), static_cast<std::uint32_t>(d.input_dim));
    write_u32(f.get(), static_cast<std::uint32_t>(d.num_classes));
    static_assert(sizeof(float) == 4);
    if (!d.inputs.empty() &&
        std::fwrite(d.inputs.data(), 4, d.inputs.size(), f.get()) != d.inputs.size())
        throw Error("short write");
    for (int lab : d.labels) write_u32(f.get(), static_cast<std::uint32_t>(lab));
}

Dataset load_dataset(const std::string& path) {
    FilePtr f(std::fopen(path.c_str(), "rb"));
    if (!f) throw Error("cannot open for read: " + path);
    Dataset d;
    std::uint32_t n = read_u32(f.get());
    d.input_dim = static_cast<int>(read_u32(f.get()));
    d.num_classes = static_cast<int>(read_u32(f.get()));
    if (d.input_dim <= 0 || d.num_classes <= 0)
        throw Error("invalid dataset header: " + path);
    d.inputs.resize(static_cast<std::size_t>(n) * d.input_dim);
    if (!d.inputs.empty() &&
        std::fread(d.inputs.data(), 4, d.inputs.size(), f.get()) != d.inputs.size())
        throw Error("truncated dataset file");
    d.labels.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        int lab = static_cast<int>(read_u32(f.get()));
        if (lab < 0 || lab >= d.num_classes) throw Error("label out of range in " + path);
        d.labels[i] = lab;
    }
    return d;
}

Batch gather(const Dataset& d, std::span<const int> indices) {
    Batch b;
    b.batch_size = static_cast<int>(indices.size());
    b.input_dim = d.input_dim;
    b.inputs.reserve(indices.size() * static_cast<std::size_t>(d.input_dim));
    b.labels.reserve(indices.size());
    for (int i : indices) {
        auto r = d.row(i);
        b.inputs.insert(b.inputs.end(), r.begin(), r.end());
        b.labels.push_back(d.labels[i]);
    }
    return b;
}

Batch full_batch(const Dataset& d) {
    Batch b;
    b.batch_size = d.size();
    b.input_dim = d.input_dim;
    b.inputs = d.inputs;
    b.labels = d.labels;
    return b;
}

}  // namespace fedx
