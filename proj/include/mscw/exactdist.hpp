#pragma once

// Exact finite-N joint law of the per-species spin sums. The Boltzmann weight
// depends on a configuration only through the species magnetizations, so the
// 2^N configurations collapse onto the count grid c_l in {0..N_l} with
// binomial multiplicity:
//
//   log w(c) = sum_l ln C(N_l, c_l) + N g(2c/N_partition - 1)
//
// Everything stays in the log domain; normalizers and moments use slab-wise
// tree reductions so results do not depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mscw/errors.hpp"
#include "mscw/landscape.hpp"
#include "mscw/limits.hpp"
#include "mscw/linalg.hpp"
#include "mscw/model.hpp"
#include "mscw/numeric.hpp"

namespace mscw {

struct Ball {
    Vec center;
    double radius = 0.0;
};

struct FiniteDist {
    SpeciesPartition partition;
    std::vector<double> log_weights;  // unnormalized, -inf outside a condition
    double log_z = 0.0;
    std::optional<Ball> condition;
    double boundary_mass = 0.0;   // conditional mass within half a cell of the sphere
    bool boundary_flagged = false;  // true when that mass exceeds 1%

    std::size_t cells() const { return log_weights.size(); }

    // mixed-radix decode: cell -> counts c_l
    void counts(std::size_t cell, std::vector<std::int64_t>& c) const {
        const auto& sz = partition.sizes;
        c.resize(sz.size());
        for (std::size_t l = 0; l < sz.size(); ++l) {
            const std::size_t d = static_cast<std::size_t>(sz[l]) + 1;
            c[l] = static_cast<std::int64_t>(cell % d);
            cell /= d;
        }
    }

    double probability(std::size_t cell) const {
        const double w = log_weights[cell];
        return w == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(w - log_z);
    }
};

namespace detail {

inline std::size_t grid_cells_checked(const SpeciesPartition& p) {
    double cells = 1.0;
    for (auto sz : p.sizes) {
        cells *= static_cast<double>(sz) + 1.0;
        if (cells > 1e7) throw BudgetExceededError("enumeration grid exceeds 1e7 cells");
    }
    return static_cast<std::size_t>(cells);
}

inline std::vector<std::vector<double>> log_binomials(const SpeciesPartition& p) {
    std::vector<std::vector<double>> lb(p.species());
    for (std::size_t l = 0; l < p.species(); ++l) {
        const auto n = p.sizes[l];
        lb[l].resize(static_cast<std::size_t>(n) + 1);
        const double lg_n = std::lgamma(static_cast<double>(n) + 1.0);
        for (std::int64_t c = 0; c <= n; ++c)
            lb[l][static_cast<std::size_t>(c)] =
                lg_n - std::lgamma(static_cast<double>(c) + 1.0) -
                std::lgamma(static_cast<double>(n - c) + 1.0);
    }
    return lb;
}

} // namespace detail

inline FiniteDist exact_joint(const ValidatedModel& model, int threads = 1) {
    const auto& p = model.spec.partition;
    const std::size_t n = p.species();
    const std::size_t cells = detail::grid_cells_checked(p);
    const auto lb = detail::log_binomials(p);
    const double n_total = static_cast<double>(p.total());

    FiniteDist dist;
    dist.partition = p;
    dist.log_weights.assign(cells, 0.0);

    const std::size_t slab = 16384;
    std::vector<LogSumExp> partials((cells + slab - 1) / slab);
    parallel_slabs(
        cells, threads,
        [&](std::size_t s, std::size_t begin, std::size_t end) {
            std::vector<std::int64_t> c(n);
            Vec m(n);
            LogSumExp lse;
            for (std::size_t cell = begin; cell < end; ++cell) {
                dist.counts(cell, c);
                double w = 0.0;
                for (std::size_t l = 0; l < n; ++l) {
                    w += lb[l][static_cast<std::size_t>(c[l])];
                    m[l] = static_cast<double>(2 * c[l] - p.sizes[l]) /
                           static_cast<double>(p.sizes[l]);
                }
                w += n_total * g_per_spin(m, model);
                dist.log_weights[cell] = w;
                lse.add(w);
            }
            partials[s] = lse;
        },
        slab);

    // pairwise tree merge in fixed order
    std::vector<LogSumExp> level = std::move(partials);
    while (level.size() > 1) {
        std::vector<LogSumExp> next((level.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < level.size(); i += 2) {
            next[i / 2] = level[i];
            next[i / 2].merge(level[i + 1]);
        }
        if (level.size() % 2 == 1) next.back() = level.back();
        level = std::move(next);
    }
    dist.log_z = level.front().value();
    return dist;
}

// Restriction of the joint law to magnetization vectors inside the Euclidean
// ball around `center` (boundary grid points included), renormalized.
inline FiniteDist conditional_joint(const ValidatedModel& model, const Vec& center,
                                    double radius, int threads = 1) {
    const auto& p = model.spec.partition;
    const std::size_t n = p.species();
    if (center.size() != n) throw ValidationError("ball center has wrong dimension");
    if (!(radius > 0.0)) throw ValidationError("ball radius must be positive");

    FiniteDist dist = exact_joint(model, threads);
    dist.condition = Ball{center, radius};

    double max_spacing = 0.0;
    for (std::size_t l = 0; l < n; ++l)
        max_spacing = std::max(max_spacing, 2.0 / static_cast<double>(p.sizes[l]));
    const double half_cell = 0.5 * max_spacing;

    std::vector<std::int64_t> c(n);
    LogSumExp lse;
    LogSumExp lse_boundary;
    for (std::size_t cell = 0; cell < dist.cells(); ++cell) {
        dist.counts(cell, c);
        double d2 = 0.0;
        for (std::size_t l = 0; l < n; ++l) {
            const double m =
                static_cast<double>(2 * c[l] - p.sizes[l]) / static_cast<double>(p.sizes[l]);
            const double diff = m - center[l];
            d2 += diff * diff;
        }
        const double d = std::sqrt(d2);
        if (d > radius) {
            dist.log_weights[cell] = -std::numeric_limits<double>::infinity();
        } else {
            lse.add(dist.log_weights[cell]);
            if (std::fabs(d - radius) <= half_cell) lse_boundary.add(dist.log_weights[cell]);
        }
    }
    if (lse.sum == 0.0) throw ValidationError("conditioning ball contains no grid point");
    dist.log_z = lse.value();
    const double lb = lse_boundary.value();
    dist.boundary_mass =
        lb == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(lb - dist.log_z);
    dist.boundary_flagged = dist.boundary_mass > 0.01;
    return dist;
}

struct MomentReport {
    Vec mean;
    Mat covariance;              // central
    Vec second_about_center;     // E[x_l^2]
    Vec fourth_raw;              // E[x_l^4] about the center
    Vec fourth_standardized;     // E[(x-mean)^4] / Var^2
    Mat cross_fourth;            // E[x_l^2 x_m^2] about the center
    Vec center;                  // mu used in the normalization
    Vec exponents;               // gamma_l
    Vec mean_magnetization;      // E[S_l / N_l], unnormalized diagnostic
    std::optional<Vec> mean_se;  // batch standard errors (samplers only)
    std::optional<Mat> covariance_se;
};

// Divisor for coordinate l. Gaussian scale gamma=1/2 divides by sqrt(N_l)
// (the covariance then converges to chi). Quartic scale gamma=1/4 divides by
// alpha_l^{1/4} N_l^{3/4} = N_l / N^{1/4}, absorbing the alpha-rescale so the
// limit density exponent is the raw Taylor form. gamma=1 leaves raw sums.
inline double normalization_divisor(double gamma, double alpha, double n_l) {
    if (gamma == 1.0) return 1.0;
    if (gamma == 0.5) return std::sqrt(n_l);
    if (gamma == 0.25) return std::pow(alpha, 0.25) * std::pow(n_l, 0.75);
    throw ValidationError("unsupported normalization exponent");
}

inline MomentReport normalized_moments(const FiniteDist& dist, const Vec& center,
                                       const Vec& exponents, int threads = 1) {
    const auto& p = dist.partition;
    const std::size_t n = p.species();
    if (center.size() != n || exponents.size() != n)
        throw ValidationError("center/exponents have wrong dimension");

    const Vec alpha = p.alphas();
    Vec divisor(n);
    for (std::size_t l = 0; l < n; ++l)
        divisor[l] = normalization_divisor(exponents[l], alpha[l],
                                           static_cast<double>(p.sizes[l]));

    struct Acc {
        KahanSum p_total;
        std::vector<KahanSum> s1, s2, s3, s4, m_raw;
        std::vector<KahanSum> cross2;   // full n x n of E[x_l x_m]
        std::vector<KahanSum> cross22;  // E[x_l^2 x_m^2]
        void init(std::size_t n) {
            s1.resize(n); s2.resize(n); s3.resize(n); s4.resize(n); m_raw.resize(n);
            cross2.resize(n * n);
            cross22.resize(n * n);
        }
        void merge(const Acc& o) {
            p_total.add(o.p_total.value());
            for (std::size_t i = 0; i < s1.size(); ++i) {
                s1[i].add(o.s1[i].value());
                s2[i].add(o.s2[i].value());
                s3[i].add(o.s3[i].value());
                s4[i].add(o.s4[i].value());
                m_raw[i].add(o.m_raw[i].value());
            }
            for (std::size_t i = 0; i < cross2.size(); ++i) {
                cross2[i].add(o.cross2[i].value());
                cross22[i].add(o.cross22[i].value());
            }
        }
    };

    const std::size_t slab = 16384;
    std::vector<Acc> partials((dist.cells() + slab - 1) / slab);
    parallel_slabs(
        dist.cells(), threads,
        [&](std::size_t s, std::size_t begin, std::size_t end) {
            Acc acc;
            acc.init(n);
            std::vector<std::int64_t> c(n);
            Vec x(n);
            for (std::size_t cell = begin; cell < end; ++cell) {
                const double prob = dist.probability(cell);
                if (prob == 0.0) continue;
                dist.counts(cell, c);
                for (std::size_t l = 0; l < n; ++l) {
                    const double s_l = static_cast<double>(2 * c[l] - p.sizes[l]);
                    x[l] = (s_l - static_cast<double>(p.sizes[l]) * center[l]) / divisor[l];
                    acc.m_raw[l].add(prob * s_l / static_cast<double>(p.sizes[l]));
                }
                acc.p_total.add(prob);
                for (std::size_t l = 0; l < n; ++l) {
                    const double xl = x[l];
                    acc.s1[l].add(prob * xl);
                    acc.s2[l].add(prob * xl * xl);
                    acc.s3[l].add(prob * xl * xl * xl);
                    acc.s4[l].add(prob * xl * xl * xl * xl);
                    for (std::size_t mdx = 0; mdx < n; ++mdx) {
                        acc.cross2[l * n + mdx].add(prob * xl * x[mdx]);
                        acc.cross22[l * n + mdx].add(prob * xl * xl * x[mdx] * x[mdx]);
                    }
                }
            }
            partials[s] = std::move(acc);
        },
        slab);

    Acc total;
    total.init(n);
    for (auto& part : partials) total.merge(part);

    MomentReport rep;
    rep.center = center;
    rep.exponents = exponents;
    rep.mean.resize(n);
    rep.second_about_center.resize(n);
    rep.fourth_raw.resize(n);
    rep.fourth_standardized.resize(n);
    rep.mean_magnetization.resize(n);
    rep.covariance = Mat(n, n);
    rep.cross_fourth = Mat(n, n);

    const double z = total.p_total.value();
    for (std::size_t l = 0; l < n; ++l) {
        rep.mean[l] = total.s1[l].value() / z;
        rep.second_about_center[l] = total.s2[l].value() / z;
        rep.fourth_raw[l] = total.s4[l].value() / z;
        rep.mean_magnetization[l] = total.m_raw[l].value() / z;
    }
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t mdx = 0; mdx < n; ++mdx) {
            rep.covariance(l, mdx) =
                total.cross2[l * n + mdx].value() / z - rep.mean[l] * rep.mean[mdx];
            rep.cross_fourth(l, mdx) = total.cross22[l * n + mdx].value() / z;
        }
    for (std::size_t l = 0; l < n; ++l) {
        const double m1 = rep.mean[l];
        const double m2 = total.s2[l].value() / z;
        const double m3 = total.s3[l].value() / z;
        const double m4 = rep.fourth_raw[l];
        const double var = m2 - m1 * m1;
        const double central4 =
            m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
        rep.fourth_standardized[l] = var > 0.0 ? central4 / (var * var) : 0.0;
    }
    return rep;
}

struct Discrepancy {
    double covariance_max_abs = 0.0;
    double covariance_max_rel = 0.0;
    Vec fourth_raw_diff;           // report - law, per coordinate
    Vec fourth_standardized_diff;
    double tv_distance = -1.0;     // -1 when not applicable
};

// Per-cell law mass for a 1-D quartic coordinate with exponent c x^4: the
// density integrated across the cell around each grid point.
namespace detail {

inline std::vector<double> quartic_cell_masses(double c, const std::vector<double>& grid_x,
                                               double spacing, double z) {
    std::vector<double> mass(grid_x.size(), 0.0);
    const auto density = [c](double x) { return std::exp(-c * x * x * x * x); };
    QuadOptions opts;
    opts.rel_tol = 1e-10;
    for (std::size_t i = 0; i < grid_x.size(); ++i) {
        const double lo = grid_x[i] - 0.5 * spacing;
        const double hi = grid_x[i] + 0.5 * spacing;
        mass[i] = integrate(density, lo, hi, opts) / z;
    }
    return mass;
}

} // namespace detail

inline Discrepancy compare_to_law(const MomentReport& rep, const LimitLaw& law,
                                  const FiniteDist* dist = nullptr) {
    const std::size_t n = rep.exponents.size();
    if (law.exponents.size() != n) throw ValidationError("dimension mismatch");
    for (std::size_t l = 0; l < n; ++l)
        if (rep.exponents[l] != law.exponents[l])
            throw ValidationError("normalization exponents do not match the law");

    const LawMoments lm = law_moments(law);
    Discrepancy d;
    d.fourth_raw_diff.resize(n);
    d.fourth_standardized_diff.resize(n);

    double law_scale = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) {
            const double diff = std::fabs(rep.covariance(r, c) - lm.covariance(r, c));
            d.covariance_max_abs = std::max(d.covariance_max_abs, diff);
            law_scale = std::max(law_scale, std::fabs(lm.covariance(r, c)));
        }
    d.covariance_max_rel = law_scale > 0.0 ? d.covariance_max_abs / law_scale : 0.0;

    for (std::size_t l = 0; l < n; ++l) {
        d.fourth_raw_diff[l] = rep.fourth_raw[l] - lm.fourth_raw[l];
        d.fourth_standardized_diff[l] =
            rep.fourth_standardized[l] - lm.fourth_standardized[l];
    }

    // discretized total variation on the quartic block. The quartic block of
    // every law built here is coordinate-separable, so law cell masses are
    // products of one-dimensional integrals: marginal TV per coordinate, and
    // the joint over the 2-D grid when the block has two coordinates.
    if (dist != nullptr && !law.quartic_coords.empty() &&
        detail::is_diagonal_quartic(law.quartic_exponent)) {
        const auto& p = dist->partition;
        const Vec alpha = p.alphas();

        std::vector<std::vector<double>> cell_mass(n);   // per quartic coordinate
        std::vector<std::vector<double>> marginal(n);
        for (const auto& term : law.quartic_exponent) {
            const std::size_t l = term.idx[0];
            const double divisor = normalization_divisor(rep.exponents[l], alpha[l],
                                                         static_cast<double>(p.sizes[l]));
            const std::size_t d_l = static_cast<std::size_t>(p.sizes[l]) + 1;
            std::vector<double> grid_x(d_l, 0.0);
            marginal[l].assign(d_l, 0.0);
            std::vector<std::int64_t> c(n);
            for (std::size_t cell = 0; cell < dist->cells(); ++cell) {
                const double prob = dist->probability(cell);
                if (prob == 0.0) continue;
                dist->counts(cell, c);
                marginal[l][static_cast<std::size_t>(c[l])] += prob;
            }
            for (std::size_t i = 0; i < d_l; ++i) {
                const double s_l = static_cast<double>(2 * static_cast<std::int64_t>(i) -
                                                       p.sizes[l]);
                grid_x[i] = (s_l - static_cast<double>(p.sizes[l]) * rep.center[l]) / divisor;
            }
            const auto q1 = detail::quartic_1d_moments(term.coeff);
            cell_mass[l] =
                detail::quartic_cell_masses(term.coeff, grid_x, 2.0 / divisor, q1.z);
        }

        double tv = 0.0;
        if (law.quartic_coords.size() == 2 && n == 2) {
            // joint comparison over the full grid; the law factorizes
            const std::size_t a = law.quartic_coords[0];
            const std::size_t b = law.quartic_coords[1];
            std::vector<std::int64_t> c(n);
            double abs_diff = 0.0, law_covered = 0.0;
            for (std::size_t cell = 0; cell < dist->cells(); ++cell) {
                dist->counts(cell, c);
                const double q = cell_mass[a][static_cast<std::size_t>(c[a])] *
                                 cell_mass[b][static_cast<std::size_t>(c[b])];
                abs_diff += std::fabs(dist->probability(cell) - q);
                law_covered += q;
            }
            tv = 0.5 * (abs_diff + std::max(0.0, 1.0 - law_covered));
        } else {
            for (const auto& term : law.quartic_exponent) {
                const std::size_t l = term.idx[0];
                double abs_diff = 0.0, law_covered = 0.0;
                for (std::size_t i = 0; i < marginal[l].size(); ++i) {
                    abs_diff += std::fabs(marginal[l][i] - cell_mass[l][i]);
                    law_covered += cell_mass[l][i];
                }
                tv = std::max(tv, 0.5 * (abs_diff + std::max(0.0, 1.0 - law_covered)));
            }
        }
        d.tv_distance = tv;
    }
    return d;
}

} // namespace mscw
