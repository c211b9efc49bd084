#include "fedx/simenv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "fedx/rng.hpp"

namespace fedx::simenv {

Task generate_task(const TaskConfig& cfg, std::uint64_t seed) {
    if (cfg.num_classes < 2) throw RangeError("need at least two classes");
    if (cfg.input_dim < cfg.num_classes)
        throw RangeError("input_dim must be >= num_classes (one mean axis per class)");
    if (cfg.samples_per_class < 2) throw RangeError("need at least two samples per class");
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0)
        throw RangeError("train_fraction must lie in (0, 1)");

    Task t;
    t.train.input_dim = t.test.input_dim = cfg.input_dim;
    t.train.num_classes = t.test.num_classes = cfg.num_classes;

    const int n_train = static_cast<int>(cfg.train_fraction * cfg.samples_per_class + 0.5);
    std::vector<float> row(static_cast<std::size_t>(cfg.input_dim));
    for (int c = 0; c < cfg.num_classes; ++c) {
        const auto key = rng::key_of(seed, rng::Stream::TaskGen, static_cast<std::uint64_t>(c));
        for (int i = 0; i < cfg.samples_per_class; ++i) {
            for (int j = 0; j < cfg.input_dim; ++j) {
                const double mean = (j == c) ? cfg.mean_scale : 0.0;
                const std::uint64_t ctr =
                    static_cast<std::uint64_t>(i) * cfg.input_dim + static_cast<std::uint64_t>(j);
                row[static_cast<std::size_t>(j)] =
                    static_cast<float>(mean + cfg.noise_sigma * rng::normal_at(key, ctr));
            }
            (i < n_train ? t.train : t.test).push_row(row, c);
        }
    }
    return t;
}

std::vector<int> apportion(const std::vector<double>& weights, int total) {
    if (weights.empty()) throw RangeError("apportion: no weights");
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w)) throw RangeError("apportion: weights must be >= 0");
        sum += w;
    }
    if (sum <= 0.0) throw RangeError("apportion: weights sum to zero");

    const std::size_t n = weights.size();
    std::vector<int> counts(n, 0);
    std::vector<std::pair<double, std::size_t>> rem(n);
    int assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double quota = weights[i] / sum * total;
        counts[i] = static_cast<int>(std::floor(quota));
        assigned += counts[i];
        rem[i] = {quota - counts[i], i};
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // remainder ties go to the lower index
    });
    for (int k = 0; k < total - assigned; ++k) ++counts[rem[static_cast<std::size_t>(k)].second];
    return counts;
}

namespace {

std::vector<int> class_indices(const Dataset& d, int c) {
    std::vector<int> out;
    for (int i = 0; i < d.size(); ++i)
        if (d.labels[i] == c) out.push_back(i);
    return out;
}

}  // namespace

Partition partition(const Task& task, const PartitionPlan& plan, int num_devices,
                    std::uint64_t seed) {
    const int C = task.train.num_classes;
    if (num_devices < 1) throw RangeError("need at least one device");
    std::set<int> server_set(plan.server_classes.begin(), plan.server_classes.end());
    if (server_set.size() != plan.server_classes.size())
        throw RangeError("duplicate server class");
    for (int c : server_set)
        if (c < 0 || c >= C) throw RangeError("server class out of range");

    // stake out the training pools
    std::vector<int> server_pool, device_pool;
    if (plan.dirichlet_all_classes) {
        std::vector<int> all(static_cast<std::size_t>(task.train.size()));
        std::iota(all.begin(), all.end(), 0);
        rng::Rng r(rng::key_of(seed, rng::Stream::ServerSplit, 0));
        rng::shuffle(all, r);
        const int k = static_cast<int>(plan.server_data_fraction * task.train.size() + 0.5);
        server_pool.assign(all.begin(), all.begin() + k);
        device_pool.assign(all.begin() + k, all.end());
        std::sort(server_pool.begin(), server_pool.end());
        std::sort(device_pool.begin(), device_pool.end());
    } else {
        for (int i = 0; i < task.train.size(); ++i)
            (server_set.count(task.train.labels[i]) ? server_pool : device_pool).push_back(i);
    }
    if (device_pool.empty()) throw EmptyDataError("no training data left for devices");

    Partition p;

    // held-out slice of the server pool for selection-time scoring
    {
        std::vector<int> pool = server_pool;
        rng::Rng r(rng::key_of(seed, rng::Stream::ServerSplit, 1));
        rng::shuffle(pool, r);
        int n_eval = static_cast<int>(plan.selection_eval_fraction * pool.size() + 0.5);
        if (n_eval >= static_cast<int>(pool.size()) && !pool.empty())
            n_eval = static_cast<int>(pool.size()) - 1;
        std::vector<int> eval_idx(pool.begin(), pool.begin() + n_eval);
        std::vector<int> train_idx(pool.begin() + n_eval, pool.end());
        std::sort(eval_idx.begin(), eval_idx.end());
        std::sort(train_idx.begin(), train_idx.end());
        p.server_eval = subset(task.train, eval_idx);
        p.server_train = subset(task.train, train_idx);
    }

    // device training data
    std::vector<std::vector<int>> dev_idx(static_cast<std::size_t>(num_devices));
    if (plan.scheme == Scheme::IID) {
        std::vector<int> pool = device_pool;
        rng::Rng r(rng::key_of(seed, rng::Stream::Partition, 0));
        rng::shuffle(pool, r);
        for (std::size_t j = 0; j < pool.size(); ++j)
            dev_idx[j % static_cast<std::size_t>(num_devices)].push_back(pool[j]);
    } else {
        std::set<int> device_classes;
        for (int i : device_pool) device_classes.insert(task.train.labels[i]);
        for (int c : device_classes) {
            std::vector<int> pool;
            for (int i : device_pool)
                if (task.train.labels[i] == c) pool.push_back(i);
            rng::Rng shuf(rng::key_of(seed, rng::Stream::Partition,
                                      static_cast<std::uint64_t>(c) + 1));
            rng::shuffle(pool, shuf);
            rng::Rng draw(rng::key_of(seed, rng::Stream::Partition,
                                      0x10000u + static_cast<std::uint64_t>(c)));
            const auto shares = rng::dirichlet(draw, plan.alpha, num_devices);
            const auto counts = apportion(shares, static_cast<int>(pool.size()));
            std::size_t at = 0;
            for (int j = 0; j < num_devices; ++j)
                for (int k = 0; k < counts[static_cast<std::size_t>(j)]; ++k)
                    dev_idx[static_cast<std::size_t>(j)].push_back(pool[at++]);
        }
    }
    // no device may start a round with nothing to train on
    for (std::size_t j = 0; j < dev_idx.size(); ++j) {
        while (dev_idx[j].empty()) {
            std::size_t donor = 0;
            for (std::size_t k = 1; k < dev_idx.size(); ++k)
                if (dev_idx[k].size() > dev_idx[donor].size()) donor = k;
            if (dev_idx[donor].size() <= 1)
                throw EmptyDataError("not enough device data to give every device a sample");
            dev_idx[j].push_back(dev_idx[donor].back());
            dev_idx[donor].pop_back();
        }
    }
    p.device_train.reserve(dev_idx.size());
    for (auto& idx : dev_idx) {
        std::sort(idx.begin(), idx.end());
        p.device_train.push_back(subset(task.train, idx));
    }

    // the server evaluates globally; devices split the test set stratified
    p.server_test = task.test;
    std::vector<std::vector<int>> test_idx(static_cast<std::size_t>(num_devices));
    for (int c = 0; c < C; ++c) {
        std::vector<int> pool = class_indices(task.test, c);
        rng::Rng r(rng::key_of(seed, rng::Stream::TestSplit, static_cast<std::uint64_t>(c)));
        rng::shuffle(pool, r);
        for (std::size_t j = 0; j < pool.size(); ++j)
            test_idx[j % static_cast<std::size_t>(num_devices)].push_back(pool[j]);
    }
    p.device_test.reserve(test_idx.size());
    for (auto& idx : test_idx) {
        std::sort(idx.begin(), idx.end());
        p.device_test.push_back(subset(task.test, idx));
    }
    return p;
}

double comm_time(double payload_bits, const selection::DeviceProfile& dev) {
    if (dev.bandwidth_bps <= 0) throw RangeError("bandwidth must be positive");
    return payload_bits / dev.bandwidth_bps;
}

std::vector<selection::DeviceProfile> build_fleet(const std::vector<TierTemplate>& tiers, int n,
                                                  std::uint64_t seed) {
    if (tiers.empty()) throw RangeError("build_fleet: no tiers");
    std::vector<double> weights;
    weights.reserve(tiers.size());
    for (const auto& t : tiers) weights.push_back(t.fraction);
    const auto counts = apportion(weights, n);

    std::vector<int> tier_of;
    tier_of.reserve(static_cast<std::size_t>(n));
    for (std::size_t t = 0; t < tiers.size(); ++t)
        tier_of.insert(tier_of.end(), static_cast<std::size_t>(counts[t]), static_cast<int>(t));
    rng::Rng r(rng::key_of(seed, rng::Stream::Fleet));
    rng::shuffle(tier_of, r);

    std::vector<selection::DeviceProfile> fleet(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const TierTemplate& t = tiers[static_cast<std::size_t>(tier_of[static_cast<std::size_t>(i)])];
        auto& d = fleet[static_cast<std::size_t>(i)];
        d.id = i;
        d.compute_rate = t.compute_rate;
        d.q_max = t.q_max;
        d.bandwidth_bps = t.bandwidth_bps;
        d.mu_s = t.mu_s;
        d.tier = tier_of[static_cast<std::size_t>(i)];
    }
    return fleet;
}

}  // namespace fedx::simenv
