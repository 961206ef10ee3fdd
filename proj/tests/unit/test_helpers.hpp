#pragma once

// Independent oracles used across the test suites: Richardson-extrapolated
// finite differences of eval_G, scalar bisection for the one-species
// mean-field equation, brute-force 2^N enumeration, and a deterministic
// random-model generator.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "mscw/exactdist.hpp"
#include "mscw/landscape.hpp"
#include "mscw/model.hpp"

namespace testutil {

using mscw::Mat;
using mscw::Vec;

inline double richardson(const std::function<double(double)>& d, double h) {
    // one Romberg step: D(h), D(h/2) -> (4 D(h/2) - D(h)) / 3
    return (4.0 * d(h / 2.0) - d(h)) / 3.0;
}

inline Vec fd_grad(const std::function<double(const Vec&)>& f, Vec x, double h = 1e-5) {
    Vec g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const auto diff = [&](double step) {
            Vec xp = x, xm = x;
            xp[i] += step;
            xm[i] -= step;
            return (f(xp) - f(xm)) / (2.0 * step);
        };
        g[i] = richardson(diff, h);
    }
    return g;
}

inline Mat fd_hess(const std::function<double(const Vec&)>& f, Vec x, double h = 1e-4) {
    const std::size_t n = x.size();
    Mat hess(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            const auto diff = [&](double step) {
                Vec a = x, b = x, c = x, d = x;
                a[i] += step; a[j] += step;
                b[i] += step; b[j] -= step;
                c[i] -= step; c[j] += step;
                d[i] -= step; d[j] -= step;
                return (f(a) - f(b) - f(c) + f(d)) / (4.0 * step * step);
            };
            hess(i, j) = hess(j, i) = richardson(diff, h);
        }
    return hess;
}

// third derivative d3 f / dxi dxj dxk by nested central differences
inline double fd_third(const std::function<double(const Vec&)>& f, Vec x, std::size_t i,
                       std::size_t j, std::size_t k, double h = 1e-2) {
    const auto diff = [&](double step) {
        const auto hess_ij = [&](Vec y) {
            Vec a = y, b = y, c = y, d = y;
            a[i] += step; a[j] += step;
            b[i] += step; b[j] -= step;
            c[i] -= step; c[j] += step;
            d[i] -= step; d[j] -= step;
            return (f(a) - f(b) - f(c) + f(d)) / (4.0 * step * step);
        };
        Vec p = x, m = x;
        p[k] += step;
        m[k] -= step;
        return (hess_ij(p) - hess_ij(m)) / (2.0 * step);
    };
    return richardson(diff, h);
}

inline double fd_fourth(const std::function<double(const Vec&)>& f, Vec x, std::size_t i,
                        std::size_t j, std::size_t k, std::size_t l, double h = 1e-2) {
    const auto diff = [&](double step) {
        const auto third_ijk = [&](Vec y) {
            const auto hess_ij = [&](Vec z) {
                Vec a = z, b = z, c = z, d = z;
                a[i] += step; a[j] += step;
                b[i] += step; b[j] -= step;
                c[i] -= step; c[j] += step;
                d[i] -= step; d[j] -= step;
                return (f(a) - f(b) - f(c) + f(d)) / (4.0 * step * step);
            };
            Vec p = y, m = y;
            p[k] += step;
            m[k] -= step;
            return (hess_ij(p) - hess_ij(m)) / (2.0 * step);
        };
        Vec p = x, m = x;
        p[l] += step;
        m[l] -= step;
        return (third_ijk(p) - third_ijk(m)) / (2.0 * step);
    };
    return richardson(diff, h);
}

// positive root of m = tanh(c m + h) by bisection, c, h >= 0
inline double scalar_mean_field_root(double c, double h = 0.0, double tol = 1e-14) {
    const auto f = [&](double m) { return std::tanh(c * m + h) - m; };
    double lo = h > 0.0 ? 0.0 : 1e-9, hi = 1.0;
    if (f(lo) <= 0.0) return 0.0;  // no positive root
    for (int it = 0; it < 200 && hi - lo > tol; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

inline mscw::ValidatedModel make_model(std::vector<std::int64_t> sizes,
                                       std::vector<std::vector<double>> j,
                                       std::vector<double> h) {
    mscw::ModelSpec spec;
    spec.partition.sizes = std::move(sizes);
    const std::size_t n = spec.partition.sizes.size();
    spec.J = mscw::Mat(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) spec.J(r, c) = j[r][c];
    spec.h = std::move(h);
    return mscw::validate_model(std::move(spec));
}

// random positive-definite model, optionally scaled to a subcritical regime
// so the mean-field fixed point is unique
inline mscw::ValidatedModel random_model(std::mt19937_64& rng, bool subcritical,
                                         int max_species = 3, std::int64_t max_size = 12) {
    std::uniform_int_distribution<int> nspec(1, max_species);
    std::uniform_int_distribution<std::int64_t> size_dist(1, max_size);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const int n = nspec(rng);

    std::vector<std::int64_t> sizes(n);
    for (auto& s : sizes) s = size_dist(rng);

    // J = R R^T + eps I is positive definite with positive diagonal
    mscw::Mat r(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) r(a, b) = unif(rng);
    mscw::Mat j = r * r.transposed();
    for (int a = 0; a < n; ++a) j(a, a) += 0.05 + 0.2 * std::fabs(unif(rng));

    std::vector<double> h(n);
    for (auto& v : h) v = 0.3 * unif(rng);

    if (subcritical) {
        // scale J so that max_l sum_s alpha_s |J_ls| <= 0.9: the tanh map is
        // then a contraction and the minimum is unique and Type1
        std::int64_t total = 0;
        for (auto s : sizes) total += s;
        double row = 0.0;
        for (int a = 0; a < n; ++a) {
            double acc = 0.0;
            for (int b = 0; b < n; ++b)
                acc += static_cast<double>(sizes[b]) / total * std::fabs(j(a, b));
            row = std::max(row, acc);
        }
        const double scale = 0.9 / std::max(row, 1e-9);
        if (scale < 1.0)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) j(a, b) *= scale;
    }

    mscw::ModelSpec spec;
    spec.partition.sizes = std::move(sizes);
    spec.J = std::move(j);
    spec.h = std::move(h);
    return mscw::validate_model(std::move(spec));
}

// exact distribution of the count vector by summing exp(-H) over all 2^N
// configurations; the independent oracle for the count-collapse enumeration
inline std::map<std::vector<std::int64_t>, double> brute_force_distribution(
    const mscw::ValidatedModel& model) {
    const auto& p = model.spec.partition;
    const std::int64_t n_total = p.total();
    std::map<std::vector<std::int64_t>, double> weight;
    double z = 0.0;
    for (std::uint64_t mask = 0; mask < (1ull << n_total); ++mask) {
        mscw::SpinConfig cfg;
        cfg.sigma.resize(n_total);
        for (std::int64_t i = 0; i < n_total; ++i)
            cfg.sigma[i] = (mask >> i) & 1 ? 1 : -1;
        const double w = std::exp(-mscw::energy_quadratic(cfg, model));
        std::vector<std::int64_t> counts(p.species(), 0);
        std::size_t idx = 0;
        for (std::size_t l = 0; l < p.species(); ++l)
            for (std::int64_t k = 0; k < p.sizes[l]; ++k)
                counts[l] += (cfg.sigma[idx++] + 1) / 2;
        weight[counts] += w;
        z += w;
    }
    for (auto& [key, v] : weight) v /= z;
    return weight;
}

} // namespace testutil
