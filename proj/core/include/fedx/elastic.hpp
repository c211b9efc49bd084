#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedx/errors.hpp"

namespace fedx::nn {

// A (depth, width) configuration of the elastic network. depth = number of
// live layers per residual block, width = number of live hidden units.
struct SubNetworkSpec {
    int depth = 0;
    int width = 0;

    friend bool operator==(const SubNetworkSpec&, const SubNetworkSpec&) = default;
};

// inner fits fully inside outer (component-wise order)
inline bool contains(const SubNetworkSpec& outer, const SubNetworkSpec& inner) {
    return inner.depth <= outer.depth && inner.width <= outer.width;
}

// Elastic MLP: input linear (no activation), num_blocks residual blocks of
// max_depth_per_block layers h <- h + relu(W h + b), output linear. Slicing a
// sub-network keeps the first `width` units of every hidden layer and the
// first `depth` layers of every block; dropped layers contribute identity.
//
// Canonical flat parameter order (row-major W, then b, per layer):
//   input W [max_width x input_dim], input b [max_width],
//   block 0 layer 0 W [max_width x max_width], b [max_width],
//   ... all block/layer pairs in order ...,
//   output W [output_dim x max_width], output b [output_dim].
struct ElasticArch {
    int input_dim = 0;
    int output_dim = 0;
    int num_blocks = 0;
    int max_depth_per_block = 0;
    int max_width = 0;
    std::vector<int> allowed_depths;  // sorted ascending, each in [1, max_depth_per_block]
    std::vector<int> allowed_widths;  // sorted ascending, each in [1, max_width]

    void validate() const;

    bool spec_allowed(const SubNetworkSpec& s) const;
    // throws InvalidSpecError unless depth/width are listed and in range
    void require_spec(const SubNetworkSpec& s) const;
    SubNetworkSpec full_spec() const { return {max_depth_per_block, max_width}; }

    std::int64_t input_w_offset() const { return 0; }
    std::int64_t input_b_offset() const {
        return static_cast<std::int64_t>(max_width) * input_dim;
    }
    // stride of one hidden layer (W + b)
    std::int64_t hidden_stride() const {
        return static_cast<std::int64_t>(max_width) * max_width + max_width;
    }
    std::int64_t hidden_w_offset(int block, int layer) const {
        return input_b_offset() + max_width +
               (static_cast<std::int64_t>(block) * max_depth_per_block + layer) * hidden_stride();
    }
    std::int64_t hidden_b_offset(int block, int layer) const {
        return hidden_w_offset(block, layer) + static_cast<std::int64_t>(max_width) * max_width;
    }
    std::int64_t output_w_offset() const {
        return input_b_offset() + max_width +
               static_cast<std::int64_t>(num_blocks) * max_depth_per_block * hidden_stride();
    }
    std::int64_t output_b_offset() const {
        return output_w_offset() + static_cast<std::int64_t>(output_dim) * max_width;
    }
    std::int64_t param_count() const {
        return output_b_offset() + output_dim;
    }

    // parameters of the (depth, width) slice
    std::int64_t param_count(const SubNetworkSpec& s) const {
        return static_cast<std::int64_t>(s.width) * input_dim + s.width +
               static_cast<std::int64_t>(num_blocks) * s.depth *
                   (static_cast<std::int64_t>(s.width) * s.width + s.width) +
               static_cast<std::int64_t>(output_dim) * s.width + output_dim;
    }

    // multiply-accumulates of one forward pass through the slice
    std::int64_t forward_flops(const SubNetworkSpec& s) const {
        return static_cast<std::int64_t>(s.width) * input_dim +
               static_cast<std::int64_t>(num_blocks) * s.depth * s.width * s.width +
               static_cast<std::int64_t>(output_dim) * s.width;
    }

    friend bool operator==(const ElasticArch&, const ElasticArch&) = default;
};

struct ElasticModel {
    ElasticArch arch;
    std::vector<float> params;  // canonical order, size arch.param_count()
};

// He-normal weights (std sqrt(2/fan_in), full-width fan for hidden/output
// layers), zero biases. Each layer draws from its own counter stream so the
// values are independent of traversal order.
ElasticModel init_model(const ElasticArch& arch, std::uint64_t seed);

void save_model(const ElasticModel& m, const std::string& path);
ElasticModel load_model(const std::string& path);

}  // namespace fedx::nn
