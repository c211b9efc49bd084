#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <utility>
#include <vector>

#include "fedx/elastic.hpp"

namespace fedx::decompose {

using nn::ElasticArch;
using nn::ElasticModel;
using nn::SubNetworkSpec;

// All allowed (depth, width) pairs, depth-major ascending.
std::vector<SubNetworkSpec> family(const ElasticArch& arch);

// 1 where the global parameter index belongs to the slice.
struct IndexMask {
    std::vector<std::uint8_t> live;
    std::int64_t live_count = 0;
};
IndexMask mask_of(const ElasticArch& arch, const SubNetworkSpec& spec);

// Slice values in ascending global index order (== the canonical order of the
// shrunken architecture).
std::vector<float> extract(const ElasticModel& m, const SubNetworkSpec& spec);

// Copy of base with the slice overwritten by values.
ElasticModel embed(const ElasticModel& base, const SubNetworkSpec& spec,
                   std::span<const float> values);

// Per-index contribution counts from the last aggregation.
struct AggregationMask {
    std::vector<std::uint32_t> counts;
};

// Masked averaging: each global index becomes the mean of the updates that
// cover it; untouched indices keep the global value. Result is independent of
// update order (inputs are canonically sorted and summed with compensation).
std::pair<ElasticModel, AggregationMask> aggregate(
    const ElasticModel& global_model,
    const std::vector<std::pair<SubNetworkSpec, std::vector<float>>>& updates);

// Standalone architecture of the slice (max dims = spec dims, allowed lists
// filtered), and the physically materialized sub-model.
ElasticArch shrink_arch(const ElasticArch& arch, const SubNetworkSpec& spec);
ElasticModel shrink(const ElasticModel& m, const SubNetworkSpec& spec);

// index,segment,row,col,live per global parameter index
void write_mask_csv(const ElasticArch& arch, const SubNetworkSpec& spec, std::ostream& os);

}  // namespace fedx::decompose
