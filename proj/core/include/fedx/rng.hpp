#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <vector>

// Deterministic random number generation. Two flavors:
//  * counter-based draws keyed by (seed, stream, ids..., counter), used wherever
//    replay must be order-independent (quantization dither, weight init);
//  * a small stateful generator for shuffles and sampling.
// No std::*_distribution anywhere: their output is not pinned across standard
// libraries, and every consumer here needs bit-reproducible streams.

namespace fedx::rng {

constexpr std::uint64_t kMixConst = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) {
    z += kMixConst;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Named sub-streams. Every randomized operation draws from its own stream so
// adding or removing one consumer never perturbs another.
enum class Stream : std::uint64_t {
    Init = 1,
    ServerSplit,
    Pretrain,
    DeviceSample,
    Quant,
    LocalShuffle,
    Finetune,
    EvalQuant,
    SelectQuant,
    TaskGen,
    Partition,
    TestSplit,
    Fleet,
    MixAssign,
    Uplink,
    Convergence,
};

inline std::uint64_t derive_key(std::initializer_list<std::uint64_t> words) {
    std::uint64_t k = 0x6a09e667f3bcc909ULL;
    for (std::uint64_t w : words) k = mix64(k ^ mix64(w));
    return k;
}

inline std::uint64_t key_of(std::uint64_t seed, Stream s) {
    return derive_key({seed, static_cast<std::uint64_t>(s)});
}
inline std::uint64_t key_of(std::uint64_t seed, Stream s, std::uint64_t a) {
    return derive_key({seed, static_cast<std::uint64_t>(s), a});
}
inline std::uint64_t key_of(std::uint64_t seed, Stream s, std::uint64_t a, std::uint64_t b) {
    return derive_key({seed, static_cast<std::uint64_t>(s), a, b});
}
inline std::uint64_t key_of(std::uint64_t seed, Stream s, std::uint64_t a, std::uint64_t b,
                            std::uint64_t c) {
    return derive_key({seed, static_cast<std::uint64_t>(s), a, b, c});
}

// Uniform in [0, 1) from (key, counter); 53 mantissa bits.
inline double uniform01(std::uint64_t key, std::uint64_t counter) {
    return static_cast<double>(mix64(key ^ mix64(counter)) >> 11) * 0x1.0p-53;
}

// Standard normal at a counter index; consumes counters 2i and 2i+1.
inline double normal_at(std::uint64_t key, std::uint64_t index) {
    double u1 = uniform01(key, 2 * index);
    double u2 = uniform01(key, 2 * index + 1);
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return r * std::cos(2.0 * std::numbers::pi * u2);
}

// Stateful splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += kMixConst;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal() {
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log1p(-u1));
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    // Uniform in [0, n). Multiply-shift; the O(2^-64) bias is irrelevant here.
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

template <class T>
inline void shuffle(std::vector<T>& v, Rng& rng) {
    rng.shuffle(v);
}

// First k entries of a Fisher-Yates pass over [0, n).
inline std::vector<int> sample_without_replacement(int n, int k, Rng& rng) {
    std::vector<int> pool(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
    for (int i = 0; i < k && i < n; ++i) {
        int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - i)));
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(k < n ? k : n));
    return pool;
}

// Marsaglia-Tsang for alpha >= 1, boosted for alpha < 1.
inline double gamma_draw(Rng& rng, double alpha) {
    if (alpha < 1.0) {
        double u = rng.uniform01();
        while (u <= 0.0) u = rng.uniform01();
        return gamma_draw(rng, alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    double d = alpha - 1.0 / 3.0;
    double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x = rng.normal();
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        double u = rng.uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

inline std::vector<double> dirichlet(Rng& rng, double alpha, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (auto& x : g) {
        x = gamma_draw(rng, alpha);
        sum += x;
    }
    if (sum <= 0.0) {
        for (auto& x : g) x = 1.0 / n;
        return g;
    }
    for (auto& x : g) x /= sum;
    return g;
}

}  // namespace fedx::rng
