#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fedx/rng.hpp"

using namespace fedx;

TEST_SUITE("rng") {

TEST_CASE("uniform01 lies in [0,1) and is reproducible") {
    const auto key = rng::key_of(42, rng::Stream::Quant, 7);
    for (std::uint64_t i = 0; i < 1000; ++i) {
        double u = rng::uniform01(key, i);
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(u == rng::uniform01(key, i));  // pure function of (key, counter)
    }
}

TEST_CASE("distinct streams and ids give distinct keys") {
    std::set<std::uint64_t> keys;
    for (int s = 1; s <= 12; ++s)
        for (std::uint64_t id = 0; id < 8; ++id)
            keys.insert(rng::key_of(1, static_cast<rng::Stream>(s), id));
    CHECK(keys.size() == 12u * 8u);
    CHECK(rng::key_of(1, rng::Stream::Quant, 2) != rng::key_of(2, rng::Stream::Quant, 2));
}

TEST_CASE("counter-based normals have sane moments") {
    const auto key = rng::key_of(3, rng::Stream::Init, 0);
    const int n = 20000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        double z = rng::normal_at(key, static_cast<std::uint64_t>(i));
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_CASE("Rng::below stays in range and covers it") {
    rng::Rng r(rng::key_of(9, rng::Stream::DeviceSample));
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 7000; ++i) {
        auto v = r.below(7);
        REQUIRE(v < 7);
        ++hits[static_cast<int>(v)];
    }
    for (int h : hits) CHECK(h > 700);  // ~1000 each
}

TEST_CASE("shuffle is a permutation and seed-deterministic") {
    std::vector<int> a(100), b(100);
    for (int i = 0; i < 100; ++i) a[i] = b[i] = i;
    rng::Rng r1(rng::key_of(5, rng::Stream::LocalShuffle, 1));
    rng::Rng r2(rng::key_of(5, rng::Stream::LocalShuffle, 1));
    rng::shuffle(a, r1);
    rng::shuffle(b, r2);
    CHECK(a == b);
    auto sorted = a;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 100; ++i) CHECK(sorted[i] == i);
    CHECK(a != sorted);  // astronomically unlikely to be identity
}

TEST_CASE("sample_without_replacement returns k distinct in-range ids") {
    rng::Rng r(rng::key_of(11, rng::Stream::DeviceSample, 3));
    auto s = rng::sample_without_replacement(50, 12, r);
    REQUIRE(s.size() == 12);
    std::set<int> uniq(s.begin(), s.end());
    CHECK(uniq.size() == 12);
    for (int v : s) {
        CHECK(v >= 0);
        CHECK(v < 50);
    }
}

TEST_CASE("dirichlet draws are probability vectors") {
    rng::Rng r(rng::key_of(7, rng::Stream::Partition, 0));
    for (double alpha : {0.01, 1.0, 100.0}) {
        auto p = rng::dirichlet(r, alpha, 20);
        REQUIRE(p.size() == 20);
        double s = 0;
        for (double v : p) {
            CHECK(v >= 0.0);
            s += v;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("small dirichlet alpha concentrates mass") {
    rng::Rng r(rng::key_of(7, rng::Stream::Partition, 1));
    double max_sum_small = 0, max_sum_large = 0;
    const int trials = 200;
    for (int t = 0; t < trials; ++t) {
        auto a = rng::dirichlet(r, 0.01, 10);
        auto b = rng::dirichlet(r, 100.0, 10);
        max_sum_small += *std::max_element(a.begin(), a.end());
        max_sum_large += *std::max_element(b.begin(), b.end());
    }
    CHECK(max_sum_small / trials > 0.9);   // nearly one-hot
    CHECK(max_sum_large / trials < 0.25);  // nearly uniform (1/10 ideal)
}

}  // TEST_SUITE
