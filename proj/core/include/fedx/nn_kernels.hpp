#pragma once

// Forward/backward kernels templated on the parameter scalar so the gradient
// can also be evaluated in double (used by tests to compare against finite
// differences without float round-off dominating the error budget).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fedx/elastic.hpp"
#include "fedx/errors.hpp"

namespace fedx::nn::kernels {

// Activations kept per live hidden layer for backprop.
template <typename T>
struct ForwardCache {
    int batch = 0;
    int width = 0;
    // hs[0] = output of the input layer; hs[i+1] = output of live hidden layer i
    std::vector<std::vector<T>> hs;
    // zs[i] = pre-activation of live hidden layer i
    std::vector<std::vector<T>> zs;
    std::vector<T> logits;  // batch x output_dim
};

template <typename T>
ForwardCache<T> forward_pass(const ElasticArch& arch, const SubNetworkSpec& spec,
                             std::span<const T> params, std::span<const float> x, int batch) {
    const int w = spec.width;
    const int d = spec.depth;
    const int in = arch.input_dim;
    const int out = arch.output_dim;
    const int mw = arch.max_width;

    ForwardCache<T> c;
    c.batch = batch;
    c.width = w;
    c.hs.reserve(static_cast<std::size_t>(arch.num_blocks) * d + 1);

    std::vector<T> h(static_cast<std::size_t>(batch) * w);
    {
        const T* W = params.data() + arch.input_w_offset();
        const T* b = params.data() + arch.input_b_offset();
        for (int s = 0; s < batch; ++s) {
            const float* xs = x.data() + static_cast<std::size_t>(s) * in;
            for (int r = 0; r < w; ++r) {
                T acc = b[r];
                const T* wr = W + static_cast<std::size_t>(r) * in;
                for (int col = 0; col < in; ++col) acc += wr[col] * static_cast<T>(xs[col]);
                h[static_cast<std::size_t>(s) * w + r] = acc;
            }
        }
    }
    c.hs.push_back(h);

    for (int k = 0; k < arch.num_blocks; ++k) {
        for (int l = 0; l < d; ++l) {
            const T* W = params.data() + arch.hidden_w_offset(k, l);
            const T* b = params.data() + arch.hidden_b_offset(k, l);
            std::vector<T> z(static_cast<std::size_t>(batch) * w);
            std::vector<T> hn(static_cast<std::size_t>(batch) * w);
            for (int s = 0; s < batch; ++s) {
                const T* hrow = h.data() + static_cast<std::size_t>(s) * w;
                for (int r = 0; r < w; ++r) {
                    T acc = b[r];
                    const T* wr = W + static_cast<std::size_t>(r) * mw;
                    for (int col = 0; col < w; ++col) acc += wr[col] * hrow[col];
                    const std::size_t idx = static_cast<std::size_t>(s) * w + r;
                    z[idx] = acc;
                    hn[idx] = hrow[r] + (acc > T(0) ? acc : T(0));
                }
            }
            c.zs.push_back(std::move(z));
            h = std::move(hn);
            c.hs.push_back(h);
        }
    }

    c.logits.resize(static_cast<std::size_t>(batch) * out);
    {
        const T* W = params.data() + arch.output_w_offset();
        const T* b = params.data() + arch.output_b_offset();
        for (int s = 0; s < batch; ++s) {
            const T* hrow = h.data() + static_cast<std::size_t>(s) * w;
            for (int o = 0; o < out; ++o) {
                T acc = b[o];
                const T* wr = W + static_cast<std::size_t>(o) * mw;
                for (int col = 0; col < w; ++col) acc += wr[col] * hrow[col];
                c.logits[static_cast<std::size_t>(s) * out + o] = acc;
            }
        }
    }

    for (const T& v : c.logits)
        if (!std::isfinite(static_cast<double>(v)))
            throw NumericError("non-finite activation in forward pass");
    return c;
}

// Mean softmax cross-entropy over the batch; log-sum-exp in double with max
// subtraction. Fills dlogits (batch x output_dim, also mean-scaled) when
// non-null.
template <typename T>
double softmax_ce(std::span<const T> logits, std::span<const int> labels, int out,
                  double* dlogits) {
    const int batch = static_cast<int>(labels.size());
    double total = 0.0;
    for (int s = 0; s < batch; ++s) {
        const T* row = logits.data() + static_cast<std::size_t>(s) * out;
        double mx = static_cast<double>(row[0]);
        for (int o = 1; o < out; ++o) mx = std::max(mx, static_cast<double>(row[o]));
        double denom = 0.0;
        for (int o = 0; o < out; ++o) denom += std::exp(static_cast<double>(row[o]) - mx);
        const double log_denom = std::log(denom);
        const int y = labels[s];
        total += log_denom - (static_cast<double>(row[y]) - mx);
        if (dlogits) {
            double* drow = dlogits + static_cast<std::size_t>(s) * out;
            for (int o = 0; o < out; ++o) {
                const double p = std::exp(static_cast<double>(row[o]) - mx) / denom;
                drow[o] = (p - (o == y ? 1.0 : 0.0)) / batch;
            }
        }
    }
    return total / batch;
}

// Backprop through the cached forward pass. Accumulates into grad (size
// arch.param_count(), zero outside the live slice). All gradient arithmetic in
// double.
template <typename T>
void backward_pass(const ElasticArch& arch, const SubNetworkSpec& spec,
                   std::span<const T> params, std::span<const float> x,
                   const ForwardCache<T>& c, std::span<const double> dlogits,
                   std::span<double> grad) {
    const int w = spec.width;
    const int d = spec.depth;
    const int in = arch.input_dim;
    const int out = arch.output_dim;
    const int mw = arch.max_width;
    const int batch = c.batch;

    std::vector<double> gh(static_cast<std::size_t>(batch) * w, 0.0);
    {
        const T* W = params.data() + arch.output_w_offset();
        double* gW = grad.data() + arch.output_w_offset();
        double* gb = grad.data() + arch.output_b_offset();
        const std::vector<T>& h = c.hs.back();
        for (int s = 0; s < batch; ++s) {
            const double* drow = dlogits.data() + static_cast<std::size_t>(s) * out;
            const T* hrow = h.data() + static_cast<std::size_t>(s) * w;
            double* ghrow = gh.data() + static_cast<std::size_t>(s) * w;
            for (int o = 0; o < out; ++o) {
                const double g = drow[o];
                gb[o] += g;
                double* gwr = gW + static_cast<std::size_t>(o) * mw;
                const T* wr = W + static_cast<std::size_t>(o) * mw;
                for (int col = 0; col < w; ++col) {
                    gwr[col] += g * static_cast<double>(hrow[col]);
                    ghrow[col] += g * static_cast<double>(wr[col]);
                }
            }
        }
    }

    int live = arch.num_blocks * d;  // live hidden layers, global index
    for (int k = arch.num_blocks - 1; k >= 0; --k) {
        for (int l = d - 1; l >= 0; --l) {
            --live;
            const T* W = params.data() + arch.hidden_w_offset(k, l);
            double* gW = grad.data() + arch.hidden_w_offset(k, l);
            double* gb = grad.data() + arch.hidden_b_offset(k, l);
            const std::vector<T>& hin = c.hs[static_cast<std::size_t>(live)];
            const std::vector<T>& z = c.zs[static_cast<std::size_t>(live)];
            std::vector<double> ghn(static_cast<std::size_t>(batch) * w, 0.0);
            for (int s = 0; s < batch; ++s) {
                const std::size_t base = static_cast<std::size_t>(s) * w;
                for (int r = 0; r < w; ++r) {
                    const double gout = gh[base + r];
                    ghn[base + r] += gout;  // residual path
                    if (!(z[base + r] > T(0))) continue;
                    gb[r] += gout;
                    double* gwr = gW + static_cast<std::size_t>(r) * mw;
                    const T* wr = W + static_cast<std::size_t>(r) * mw;
                    for (int col = 0; col < w; ++col) {
                        gwr[col] += gout * static_cast<double>(hin[base + col]);
                        ghn[base + col] += gout * static_cast<double>(wr[col]);
                    }
                }
            }
            gh = std::move(ghn);
        }
    }

    {
        double* gW = grad.data() + arch.input_w_offset();
        double* gb = grad.data() + arch.input_b_offset();
        for (int s = 0; s < batch; ++s) {
            const float* xs = x.data() + static_cast<std::size_t>(s) * in;
            const double* ghrow = gh.data() + static_cast<std::size_t>(s) * w;
            for (int r = 0; r < w; ++r) {
                const double g = ghrow[r];
                gb[r] += g;
                double* gwr = gW + static_cast<std::size_t>(r) * in;
                for (int col = 0; col < in; ++col) gwr[col] += g * static_cast<double>(xs[col]);
            }
        }
    }
}

}  // namespace fedx::nn::kernels
