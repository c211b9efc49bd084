#include "fedx/convergence.hpp"

#include <cmath>

#include "fedx/errors.hpp"
#include "fedx/rng.hpp"

namespace fedx::convergence {

namespace {

// L(theta) = 1/2 sum a_i (theta_i - star_i)^2 with a_i in [0.5, 1.5]; L* = 0.
struct Quadratic {
    std::vector<double> a;
    std::vector<double> star;

    double loss(const std::vector<double>& th) const {
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = th[i] - star[i];
            s += 0.5 * a[i] * d * d;
        }
        return s;
    }
    void grad(const std::vector<double>& th, std::vector<double>& g) const {
        for (std::size_t i = 0; i < a.size(); ++i) g[i] = a[i] * (th[i] - star[i]);
    }
};

Quadratic make_problem(const ConvergenceConfig& cfg) {
    Quadratic q;
    q.a.resize(static_cast<std::size_t>(cfg.dim));
    q.star.resize(static_cast<std::size_t>(cfg.dim));
    const auto key = rng::key_of(cfg.seed, rng::Stream::Convergence, 0xFFFFFFFFull);
    double norm2 = 0;
    for (int i = 0; i < cfg.dim; ++i) {
        q.a[i] = 0.5 + rng::uniform01(key, static_cast<std::uint64_t>(2 * i));
        q.star[i] = rng::normal_at(key, static_cast<std::uint64_t>(cfg.dim + i));
        norm2 += q.star[i] * q.star[i];
    }
    // keep the optimum inside the radius-Q/2 ball so theta_0 = 0 is feasible
    const double scale = (norm2 > 0) ? (0.5 * cfg.Q / std::sqrt(norm2)) : 0.0;
    for (auto& s : q.star) s *= scale;
    return q;
}

}  // namespace

std::vector<ConvergencePoint> run_trajectory(const ConvergenceConfig& cfg, int trial) {
    if (cfg.dim < 1 || cfg.G <= 0 || cfg.Q <= 0) throw RangeError("bad convergence config");
    if (cfg.log2_T_min < 1 || cfg.log2_T_max < cfg.log2_T_min)
        throw RangeError("bad checkpoint range");

    const Quadratic prob = make_problem(cfg);
    const auto key = rng::key_of(cfg.seed, rng::Stream::Convergence,
                                 static_cast<std::uint64_t>(trial));

    std::vector<double> th(static_cast<std::size_t>(cfg.dim), 0.0);
    if (cfg.start_at_optimum) th = prob.star;

    std::vector<ConvergencePoint> points;
    std::vector<double> g(th.size()), anchor(th.size());
    const std::int64_t T_max = std::int64_t(1) << cfg.log2_T_max;
    int next_log = cfg.log2_T_min;
    for (std::int64_t t = 1; t <= T_max; ++t) {
        prob.grad(th, g);
        const double lam = cfg.Q / (cfg.G * std::sqrt(static_cast<double>(t)));
        // the anchor plays the aggregated model: one noisy device step away
        for (std::size_t i = 0; i < th.size(); ++i) {
            const double noise_a =
                cfg.noise_sigma * rng::normal_at(key, static_cast<std::uint64_t>(2 * t) *
                                                              th.size() + i);
            anchor[i] = th[i] - cfg.eta * (g[i] + noise_a);
        }
        for (std::size_t i = 0; i < th.size(); ++i) {
            const double noise_g =
                cfg.noise_sigma * rng::normal_at(key, static_cast<std::uint64_t>(2 * t + 1) *
                                                              th.size() + i);
            th[i] -= lam * ((g[i] + noise_g) + cfg.gamma * (th[i] - anchor[i]));
        }
        if (next_log <= cfg.log2_T_max && t == (std::int64_t(1) << next_log)) {
            points.push_back({t, prob.loss(th)});
            ++next_log;
        }
    }
    return points;
}

ConvergenceReport run_convergence(const ConvergenceConfig& cfg) {
    if (cfg.trials < 1) throw RangeError("need at least one trial");
    ConvergenceReport rep;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        auto pts = run_trajectory(cfg, trial);
        if (rep.points.empty()) {
            rep.points = pts;
            for (auto& p : rep.points) p.mean_gap = 0.0;
        }
        for (std::size_t i = 0; i < pts.size(); ++i) rep.points[i].mean_gap += pts[i].mean_gap;
    }
    for (auto& p : rep.points) p.mean_gap /= cfg.trials;

    // fit log(gap) = intercept + slope * log(sqrt(T)/log T)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (const auto& p : rep.points) {
        if (p.mean_gap <= 0) continue;
        const double x = std::log(std::sqrt(static_cast<double>(p.T)) /
                                  std::log(static_cast<double>(p.T)));
        const double y = std::log(p.mean_gap);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    if (m < 2) throw NumericError("convergence fit needs at least two positive gaps");
    const double denom = m * sxx - sx * sx;
    rep.slope = (m * sxy - sx * sy) / denom;
    rep.intercept = (sy - rep.slope * sx) / m;
    return rep;
}

}  // namespace fedx::convergence
