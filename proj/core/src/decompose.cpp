#include "fedx/decompose.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace fedx::decompose {

namespace {

// Visits every live global index of the slice in ascending order.
template <typename F>
void for_each_live(const ElasticArch& a, const SubNetworkSpec& s, F&& f) {
    const int w = s.width;
    const int d = s.depth;
    // input W: rows r < w (full input_dim columns)
    for (int r = 0; r < w; ++r) {
        const std::int64_t base = a.input_w_offset() + static_cast<std::int64_t>(r) * a.input_dim;
        for (int c = 0; c < a.input_dim; ++c) f(base + c);
    }
    for (int r = 0; r < w; ++r) f(a.input_b_offset() + r);
    // hidden layers l < d: top-left w x w corner + first w biases
    for (int k = 0; k < a.num_blocks; ++k) {
        for (int l = 0; l < d; ++l) {
            const std::int64_t woff = a.hidden_w_offset(k, l);
            for (int r = 0; r < w; ++r) {
                const std::int64_t base = woff + static_cast<std::int64_t>(r) * a.max_width;
                for (int c = 0; c < w; ++c) f(base + c);
            }
            const std::int64_t boff = a.hidden_b_offset(k, l);
            for (int r = 0; r < w; ++r) f(boff + r);
        }
    }
    // output W: cols c < w in every row; output b always live
    for (int r = 0; r < a.output_dim; ++r) {
        const std::int64_t base = a.output_w_offset() + static_cast<std::int64_t>(r) * a.max_width;
        for (int c = 0; c < w; ++c) f(base + c);
    }
    for (int r = 0; r < a.output_dim; ++r) f(a.output_b_offset() + r);
}

}  // namespace

std::vector<SubNetworkSpec> family(const ElasticArch& arch) {
    arch.validate();
    std::vector<SubNetworkSpec> out;
    out.reserve(arch.allowed_depths.size() * arch.allowed_widths.size());
    for (int d : arch.allowed_depths)
        for (int w : arch.allowed_widths) out.push_back({d, w});
    return out;
}

IndexMask mask_of(const ElasticArch& arch, const SubNetworkSpec& spec) {
    arch.require_spec(spec);
    IndexMask m;
    m.live.assign(static_cast<std::size_t>(arch.param_count()), 0);
    for_each_live(arch, spec, [&](std::int64_t i) {
        m.live[static_cast<std::size_t>(i)] = 1;
        ++m.live_count;
    });
    return m;
}

std::vector<float> extract(const ElasticModel& m, const SubNetworkSpec& spec) {
    m.arch.require_spec(spec);
    std::vector<float> out;
    out.reserve(static_cast<std::size_t>(m.arch.param_count(spec)));
    for_each_live(m.arch, spec,
                  [&](std::int64_t i) { out.push_back(m.params[static_cast<std::size_t>(i)]); });
    return out;
}

ElasticModel embed(const ElasticModel& base, const SubNetworkSpec& spec,
                   std::span<const float> values) {
    base.arch.require_spec(spec);
    if (static_cast<std::int64_t>(values.size()) != base.arch.param_count(spec))
        throw ShapeError("embed: value count does not match sub-network size");
    ElasticModel out = base;
    std::size_t j = 0;
    for_each_live(base.arch, spec,
                  [&](std::int64_t i) { out.params[static_cast<std::size_t>(i)] = values[j++]; });
    return out;
}

std::pair<ElasticModel, AggregationMask> aggregate(
    const ElasticModel& global_model,
    const std::vector<std::pair<SubNetworkSpec, std::vector<float>>>& updates) {
    const ElasticArch& arch = global_model.arch;
    const std::size_t n = global_model.params.size();

    // canonical processing order so the float result ignores caller order
    std::vector<const std::pair<SubNetworkSpec, std::vector<float>>*> order;
    order.reserve(updates.size());
    for (const auto& u : updates) {
        arch.require_spec(u.first);
        if (static_cast<std::int64_t>(u.second.size()) != arch.param_count(u.first))
            throw ShapeError("aggregate: update size does not match its spec");
        order.push_back(&u);
    }
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        if (a->first.depth != b->first.depth) return a->first.depth < b->first.depth;
        if (a->first.width != b->first.width) return a->first.width < b->first.width;
        return std::lexicographical_compare(a->second.begin(), a->second.end(), b->second.begin(),
                                            b->second.end());
    });

    std::vector<double> sum(n, 0.0), comp(n, 0.0);
    AggregationMask mask;
    mask.counts.assign(n, 0);
    for (const auto* u : order) {
        std::size_t j = 0;
        for_each_live(arch, u->first, [&](std::int64_t gi) {
            const std::size_t i = static_cast<std::size_t>(gi);
            const double v = static_cast<double>(u->second[j++]);
            // Neumaier compensated add
            const double t = sum[i] + v;
            comp[i] += std::abs(sum[i]) >= std::abs(v) ? (sum[i] - t) + v : (v - t) + sum[i];
            sum[i] = t;
            ++mask.counts[i];
        });
    }

    ElasticModel out = global_model;
    for (std::size_t i = 0; i < n; ++i)
        if (mask.counts[i] > 0)
            out.params[i] = static_cast<float>((sum[i] + comp[i]) / mask.counts[i]);
    return {std::move(out), std::move(mask)};
}

ElasticArch shrink_arch(const ElasticArch& arch, const SubNetworkSpec& spec) {
    arch.require_spec(spec);
    ElasticArch a = arch;
    a.max_depth_per_block = spec.depth;
    a.max_width = spec.width;
    std::erase_if(a.allowed_depths, [&](int d) { return d > spec.depth; });
    std::erase_if(a.allowed_widths, [&](int w) { return w > spec.width; });
    a.validate();
    return a;
}

ElasticModel shrink(const ElasticModel& m, const SubNetworkSpec& spec) {
    ElasticModel out;
    out.arch = shrink_arch(m.arch, spec);
    out.params = extract(m, spec);
    return out;
}

void write_mask_csv(const ElasticArch& arch, const SubNetworkSpec& spec, std::ostream& os) {
    IndexMask mask = mask_of(arch, spec);
    os << "index,segment,row,col,live\n";
    auto dump = [&](std::int64_t off, std::int64_t rows, std::int64_t cols,
                    const std::string& name) {
        for (std::int64_t r = 0; r < rows; ++r)
            for (std::int64_t c = 0; c < cols; ++c) {
                const std::int64_t i = off + r * cols + c;
                os << i << ',' << name << ',' << r << ',' << c << ','
                   << int(mask.live[static_cast<std::size_t>(i)]) << '\n';
            }
    };
    dump(arch.input_w_offset(), arch.max_width, arch.input_dim, "input.W");
    dump(arch.input_b_offset(), arch.max_width, 1, "input.b");
    for (int k = 0; k < arch.num_blocks; ++k)
        for (int l = 0; l < arch.max_depth_per_block; ++l) {
            const std::string tag = "block" + std::to_string(k) + ".layer" + std::to_string(l);
            dump(arch.hidden_w_offset(k, l), arch.max_width, arch.max_width, tag + ".W");
            dump(arch.hidden_b_offset(k, l), arch.max_width, 1, tag + ".b");
        }
    dump(arch.output_w_offset(), arch.output_dim, arch.max_width, "output.W");
    dump(arch.output_b_offset(), arch.output_dim, 1, "output.b");
}

}  // namespace fedx::decompose
