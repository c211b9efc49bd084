#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fedx/errors.hpp"

namespace fedx {

// Row-major labeled samples. Also the on-disk interchange unit: little-endian
// header (n, dim, num_classes as u32) followed by n*dim float32 rows and n
// int32 labels.
struct Dataset {
    int input_dim = 0;
    int num_classes = 0;
    std::vector<float> inputs;  // n x input_dim
    std::vector<int> labels;

    int size() const { return static_cast<int>(labels.size()); }

    std::span<const float> row(int i) const {
        return {inputs.data() + static_cast<std::size_t>(i) * input_dim,
                static_cast<std::size_t>(input_dim)};
    }

    void push_row(std::span<const float> x, int label) {
        inputs.insert(inputs.end(), x.begin(), x.end());
        labels.push_back(label);
    }
};

// Copy of the selected rows, in index order.
Dataset subset(const Dataset& d, std::span<const int> indices);

void save_dataset(const Dataset& d, const std::string& path);
Dataset load_dataset(const std::string& path);

// Minibatch view materialized as owned buffers.
struct Batch {
    int batch_size = 0;
    int input_dim = 0;
    std::vector<float> inputs;  // batch_size x input_dim
    std::vector<int> labels;
};

Batch gather(const Dataset& d, std::span<const int> indices);
Batch full_batch(const Dataset& d);

}  // namespace fedx
