#pragma once

// The variational landscape. With t_l(x) = sum_s alpha_s J_ls x_s + h_l,
//
//   G(x)    = 1/2 sum_{l,s} alpha_l alpha_s J_ls x_l x_s - sum_l alpha_l ln cosh t_l(x)
//   pbar(x) = ln 2 - G(x)
//   Phi(x)  = sum_l alpha_l ln cosh t_l(x)          (strictly convex)
//
// Stationary points of G are the mean-field solutions mu_l = tanh t_l(mu).
// All derivatives of G have closed forms: with T_l = tanh t_l, u_l = 1 - T_l^2
// and B_{l,a} = alpha_a J_la,
//
//   dG/da        = alpha_a sum_l alpha_l J_la (x_l - T_l)
//   d2G/dadb     = alpha_a alpha_b J_ab - sum_l alpha_l u_l B_la B_lb
//   d3G/dadbdc   = 2 sum_l alpha_l T_l u_l B_la B_lb B_lc
//   d4G/dadbdcdd = 2 sum_l alpha_l u_l (1 - 3 T_l^2) B_la B_lb B_lc B_ld

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mscw/errors.hpp"
#include "mscw/linalg.hpp"
#include "mscw/model.hpp"
#include "mscw/numeric.hpp"

namespace mscw {

namespace detail {

// t_l(x) for all l
inline Vec field_args(const Vec& x, const ValidatedModel& m) {
    const std::size_t n = m.n();
    Vec t(n);
    for (std::size_t l = 0; l < n; ++l) {
        double acc = m.h()[l];
        for (std::size_t s = 0; s < n; ++s) acc += m.alpha[s] * m.J()(l, s) * x[s];
        t[l] = acc;
    }
    return t;
}

} // namespace detail

inline double eval_phi(const Vec& x, const ValidatedModel& m) {
    const Vec t = detail::field_args(x, m);
    double phi = 0.0;
    for (std::size_t l = 0; l < m.n(); ++l) phi += m.alpha[l] * log_cosh(t[l]);
    return phi;
}

inline double eval_G(const Vec& x, const ValidatedModel& m) {
    const Vec t = detail::field_args(x, m);
    double quad = 0.0, phi = 0.0;
    for (std::size_t l = 0; l < m.n(); ++l) {
        quad += m.alpha[l] * x[l] * (t[l] - m.h()[l]);
        phi += m.alpha[l] * log_cosh(t[l]);
    }
    return 0.5 * quad - phi;
}

inline double eval_pressure_functional(const Vec& x, const ValidatedModel& m) {
    return 0.6931471805599453094172321214581766 - eval_G(x, m);
}

inline Vec grad_G(const Vec& x, const ValidatedModel& m) {
    const std::size_t n = m.n();
    const Vec t = detail::field_args(x, m);
    Vec g(n, 0.0);
    for (std::size_t a = 0; a < n; ++a) {
        double acc = 0.0;
        for (std::size_t l = 0; l < n; ++l)
            acc += m.alpha[l] * m.J()(l, a) * (x[l] - std::tanh(t[l]));
        g[a] = m.alpha[a] * acc;
    }
    return g;
}

inline Mat hess_G(const Vec& x, const ValidatedModel& m) {
    const std::size_t n = m.n();
    const Vec t = detail::field_args(x, m);
    Vec u(n);
    for (std::size_t l = 0; l < n; ++l) {
        const double tl = std::tanh(t[l]);
        u[l] = 1.0 - tl * tl;
    }
    Mat hess(n, n);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b) {
            double acc = m.alpha[a] * m.alpha[b] * m.J()(a, b);
            for (std::size_t l = 0; l < n; ++l)
                acc -= m.alpha[l] * u[l] * (m.alpha[a] * m.J()(l, a)) * (m.alpha[b] * m.J()(l, b));
            hess(a, b) = acc;
            hess(b, a) = acc;
        }
    return hess;
}

// Dense symmetric order-3 and order-4 derivative tensors of G at a point.
struct Taylor4 {
    std::size_t n = 0;
    std::vector<double> third;   // n^3, index (a*n + b)*n + c
    std::vector<double> fourth;  // n^4

    double t3(std::size_t a, std::size_t b, std::size_t c) const {
        return third[(a * n + b) * n + c];
    }
    double t4(std::size_t a, std::size_t b, std::size_t c, std::size_t d) const {
        return fourth[((a * n + b) * n + c) * n + d];
    }

    // Q(y) = (1/4!) sum_{abcd} d4G_{abcd} y_a y_b y_c y_d
    double quartic_form(const Vec& y) const {
        double acc = 0.0;
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                const double yab = y[a] * y[b];
                if (yab == 0.0) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    if (y[c] == 0.0) continue;
                    for (std::size_t d = 0; d < n; ++d)
                        acc += t4(a, b, c, d) * yab * y[c] * y[d];
                }
            }
        return acc / 24.0;
    }

    double max_abs_third() const {
        double mx = 0.0;
        for (double v : third) mx = std::max(mx, std::fabs(v));
        return mx;
    }
};

inline Taylor4 taylor4_G(const Vec& mu, const ValidatedModel& m) {
    const std::size_t n = m.n();
    if (n > 32) throw BudgetExceededError("dense order-4 tensor limited to n <= 32");
    const Vec t = detail::field_args(mu, m);
    Vec tn(n), u(n);
    for (std::size_t l = 0; l < n; ++l) {
        tn[l] = std::tanh(t[l]);
        u[l] = 1.0 - tn[l] * tn[l];
    }
    Taylor4 out;
    out.n = n;
    out.third.assign(n * n * n, 0.0);
    out.fourth.assign(n * n * n * n, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
        Vec b(n);
        for (std::size_t a = 0; a < n; ++a) b[a] = m.alpha[a] * m.J()(l, a);
        const double c3 = 2.0 * m.alpha[l] * tn[l] * u[l];
        const double c4 = 2.0 * m.alpha[l] * u[l] * (1.0 - 3.0 * tn[l] * tn[l]);
        for (std::size_t a = 0; a < n; ++a) {
            if (b[a] == 0.0) continue;
            for (std::size_t bb = 0; bb < n; ++bb) {
                const double p2 = b[a] * b[bb];
                if (p2 == 0.0) continue;
                for (std::size_t c = 0; c < n; ++c) {
                    const double p3 = p2 * b[c];
                    if (p3 == 0.0) continue;
                    out.third[(a * n + bb) * n + c] += c3 * p3;
                    for (std::size_t d = 0; d < n; ++d)
                        out.fourth[((a * n + bb) * n + c) * n + d] += c4 * p3 * b[d];
                }
            }
        }
    }
    return out;
}

struct SolveOptions {
    double tol = 1e-12;
    long max_fixed_point = 100000;
    int max_newton = 50;
    double damping = 0.5;
};

// Damped fixed-point iteration on x <- (1-l) x + l tanh(t(x)), then Newton
// polish on grad G. Stalls (degenerate fixed points slow the map down to a
// polynomial rate) hand over to Newton early.
inline Vec solve_mean_field(Vec x, const ValidatedModel& m, double tol = 1e-12,
                            const SolveOptions& opts = {}) {
    if (!(tol > 0.0)) throw ValidationError("tolerance must be positive");
    const std::size_t n = m.n();
    if (x.size() != n) throw ValidationError("start point has wrong length");
    for (double& v : x) v = std::clamp(v, -1.0, 1.0);

    const auto residual = [&](const Vec& p) {
        const Vec t = detail::field_args(p, m);
        double r = 0.0;
        for (std::size_t l = 0; l < n; ++l) r = std::max(r, std::fabs(p[l] - std::tanh(t[l])));
        return r;
    };

    double res = residual(x);
    double window_res = res;
    for (long iter = 0; iter < std::max<long>(1, opts.max_fixed_point) && res > 0.1 * tol;
         ++iter) {
        const Vec t = detail::field_args(x, m);
        for (std::size_t l = 0; l < n; ++l)
            x[l] = (1.0 - opts.damping) * x[l] + opts.damping * std::tanh(t[l]);
        res = residual(x);
        if ((iter & 255) == 255) {
            if (res > 0.5 * window_res) break;  // stalled, let Newton finish
            window_res = res;
        }
    }

    // Newton polish on grad G via an eigen-pseudo-inverse of the Hessian.
    // At a degenerate minimum the gradient has a triple root along the flat
    // directions, where plain Newton only contracts by 2/3 per step and any
    // point within ~tol^(1/3) of the minimum already satisfies the residual
    // contract; the multiplicity-3 candidate x - 3*step lands on the root
    // itself. Both candidates are tried, the lower residual wins.
    Vec best = x;
    double best_res = res;
    int stale = 0;
    for (int iter = 0; iter < opts.max_newton && best_res > 0.0; ++iter) {
        const Vec g = grad_G(x, m);
        const auto eig = eigen_sym(hess_G(x, m));
        double lam_max = 0.0;
        for (double v : eig.values) lam_max = std::max(lam_max, std::fabs(v));
        const double lam_tol = 1e-14 * std::max(1.0, lam_max);
        Vec step(n, 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            if (std::fabs(eig.values[k]) <= lam_tol) continue;
            double coef = 0.0;
            for (std::size_t i = 0; i < n; ++i) coef += eig.vectors(i, k) * g[i];
            coef /= eig.values[k];
            for (std::size_t i = 0; i < n; ++i) step[i] -= coef * eig.vectors(i, k);
        }
        double sn = norm_inf(step);
        if (sn == 0.0) break;
        if (sn > 0.25) {
            for (double& v : step) v *= 0.25 / sn;
            sn = 0.25;
        }

        Vec chosen;
        double chosen_res = std::numeric_limits<double>::infinity();
        for (double factor : {1.0, 3.0}) {
            Vec cand(n);
            bool inside = true;
            for (std::size_t l = 0; l < n; ++l) {
                cand[l] = x[l] + factor * step[l];
                if (std::fabs(cand[l]) > 1.5) inside = false;
            }
            if (!inside) continue;
            const double r = residual(cand);
            if (r < chosen_res) {
                chosen_res = r;
                chosen = std::move(cand);
            }
        }
        if (!std::isfinite(chosen_res)) break;
        x = std::move(chosen);
        if (chosen_res < best_res) {
            best = x;
            best_res = chosen_res;
            stale = 0;
        } else if (++stale >= 3) {
            break;
        }
        if (sn < 1e-13) break;
    }

    if (best_res > tol)
        throw NonConvergenceError("mean-field iteration did not reach tolerance", best_res);
    for (double& v : best) v = std::clamp(v, -1.0, 1.0);
    return best;
}

enum class MinimumType { Type1, Type2, NonHomogeneousSeparable, Unclassified };

inline const char* to_string(MinimumType k) {
    switch (k) {
        case MinimumType::Type1: return "Type1";
        case MinimumType::Type2: return "Type2";
        case MinimumType::NonHomogeneousSeparable: return "NonHomogeneousSeparable";
        default: return "Unclassified";
    }
}

struct CriticalPoint {
    Vec mu;
    double value = 0.0;
    double grad_norm = 0.0;
    Mat hessian;
    MinimumType k = MinimumType::Unclassified;
    std::optional<Taylor4> quartic;  // present when the Hessian has a null direction
    double third_order_norm = 0.0;
    std::vector<std::size_t> null_coords;  // coordinates of the degenerate block(s)
};

struct MinimaSet {
    std::vector<CriticalPoint> points;
    double f_min = 0.0;
    double delta_bar = std::numeric_limits<double>::infinity();
};

namespace detail {

// Connected components of the coupling graph (edge where J_ls != 0 exactly);
// decoupled blocks factorize the model and the limit law.
inline std::vector<int> coupling_components(const Mat& j) {
    const std::size_t n = j.rows();
    std::vector<int> comp(n, -1);
    int next = 0;
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (comp[seed] >= 0) continue;
        std::vector<std::size_t> stack{seed};
        comp[seed] = next;
        while (!stack.empty()) {
            const std::size_t v = stack.back();
            stack.pop_back();
            for (std::size_t w = 0; w < n; ++w)
                if (comp[w] < 0 && j(v, w) != 0.0) {
                    comp[w] = next;
                    stack.push_back(w);
                }
        }
        ++next;
    }
    return comp;
}

// Deterministic quasi-uniform directions on the unit sphere of the given
// coordinate subset (plus the coordinate axes), used to probe quartic forms.
inline std::vector<Vec> sphere_directions(std::size_t n, const std::vector<std::size_t>& coords,
                                          std::size_t count) {
    std::vector<Vec> dirs;
    for (std::size_t c : coords) {
        Vec axis(n, 0.0);
        axis[c] = 1.0;
        dirs.push_back(axis);
        axis[c] = -1.0;
        dirs.push_back(axis);
    }
    if (coords.size() == 1) return dirs;
    // golden-ratio lattice mapped through inverse-normal-ish transform; exact
    // uniformity is irrelevant, coverage is what matters
    const double golden = 0.6180339887498949;
    double seed = 0.5;
    for (std::size_t i = 0; i < count; ++i) {
        Vec d(n, 0.0);
        double norm = 0.0;
        for (std::size_t k = 0; k < coords.size(); ++k) {
            seed += golden * (k + 1);
            seed -= std::floor(seed);
            const double z = std::tan(3.14159265358979323846 * (seed - 0.5));
            const double v = z / (1.0 + std::fabs(z));  // heavy tails squashed
            d[coords[k]] = v;
            norm += v * v;
        }
        if (norm < 1e-12) continue;
        norm = std::sqrt(norm);
        for (std::size_t c : coords) d[c] /= norm;
        dirs.push_back(d);
    }
    return dirs;
}

} // namespace detail

// Eigen-classification of a stationary point. All eigenvalues above the
// relative zero-threshold -> Type1. All below -> Type2 provided the third
// order vanishes and the quartic form is positive on sampled directions.
// A mixed spectrum is separable only when the degenerate and non-degenerate
// coordinates sit in different coupling components.
inline CriticalPoint classify_minimum(const Vec& mu, const ValidatedModel& m) {
    const std::size_t n = m.n();
    CriticalPoint pt;
    pt.mu = mu;
    pt.value = eval_G(mu, m);
    pt.grad_norm = norm_inf(grad_G(mu, m));
    pt.hessian = hess_G(mu, m);

    const double grad_scale = std::max(1.0, m.J().max_abs());
    if (pt.grad_norm > 1e-8 * grad_scale)
        throw ValidationError("classify_minimum requires a stationary point");

    const auto eig = eigen_sym(pt.hessian);
    double h_norm = 0.0;
    for (double v : eig.values) h_norm = std::max(h_norm, std::fabs(v));
    const double tau = 1e-8 * std::max(1.0, h_norm);

    std::size_t n_null = 0;
    for (double v : eig.values)
        if (v <= tau) ++n_null;

    // scale for "third derivatives vanish": entries are bounded by
    // 2 max_l (sum_s alpha_s |J_ls|)^3
    double row_scale = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        double r = 0.0;
        for (std::size_t s = 0; s < n; ++s) r += m.alpha[s] * std::fabs(m.J()(l, s));
        row_scale = std::max(row_scale, r);
    }
    const double tau3 = 1e-8 * std::max(1.0, 2.0 * row_scale * row_scale * row_scale);
    const double tau4 = 1e-10 * std::max(1.0, row_scale * row_scale * row_scale * row_scale);

    if (n_null == 0) {
        pt.k = MinimumType::Type1;
        return pt;
    }

    pt.quartic = taylor4_G(mu, m);

    const auto comp = detail::coupling_components(m.J());
    const int n_comp = *std::max_element(comp.begin(), comp.end()) + 1;

    // per-component verdicts: +1 positive definite, 0 degenerate, -1 mixed
    std::vector<int> verdict(n_comp, 0);
    std::vector<std::vector<std::size_t>> members(n_comp);
    for (std::size_t l = 0; l < n; ++l) members[comp[l]].push_back(l);
    for (int c = 0; c < n_comp; ++c) {
        const auto& idx = members[c];
        Mat sub(idx.size(), idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t cc = 0; cc < idx.size(); ++cc)
                sub(r, cc) = pt.hessian(idx[r], idx[cc]);
        const auto sub_eig = eigen_sym(sub);
        const bool all_pos = sub_eig.values.front() > tau;
        const bool all_null = sub_eig.values.back() <= tau;
        verdict[c] = all_pos ? +1 : (all_null ? 0 : -1);
    }

    for (int c = 0; c < n_comp; ++c)
        if (verdict[c] == 0)
            for (std::size_t l : members[c]) pt.null_coords.push_back(l);

    // third-derivative magnitude on triples touching the degenerate block;
    // cross-component triples vanish identically
    double third_max = 0.0;
    for (std::size_t a : pt.null_coords)
        for (std::size_t b = 0; b < n; ++b)
            for (std::size_t c = 0; c < n; ++c)
                third_max = std::max(third_max, std::fabs(pt.quartic->t3(a, b, c)));
    pt.third_order_norm = third_max;

    bool degenerate_ok = third_max <= tau3;
    if (degenerate_ok && !pt.null_coords.empty()) {
        const auto dirs = detail::sphere_directions(n, pt.null_coords, 1000);
        for (const Vec& d : dirs)
            if (pt.quartic->quartic_form(d) <= tau4) {
                degenerate_ok = false;
                break;
            }
    }

    bool any_mixed_component = false;
    bool any_positive_component = false;
    for (int c = 0; c < n_comp; ++c) {
        if (verdict[c] == -1) any_mixed_component = true;
        if (verdict[c] == +1) any_positive_component = true;
    }

    if (any_mixed_component || !degenerate_ok) {
        pt.k = MinimumType::Unclassified;
        return pt;
    }
    pt.k = any_positive_component ? MinimumType::NonHomogeneousSeparable : MinimumType::Type2;
    return pt;
}

// Multi-start search for the global minima of G on [-1,1]^n.
inline MinimaSet find_global_minima(const ValidatedModel& m, int grid_points_per_axis = 21,
                                    int threads = 1) {
    if (!m.positive_definite)
        throw ValidationError("reduced interaction matrix not positive definite");
    if (grid_points_per_axis < 5)
        throw ValidationError("grid must have at least 5 points per axis");
    const std::size_t n = m.n();
    double budget = 1.0;
    for (std::size_t l = 0; l < n; ++l) {
        budget *= grid_points_per_axis;
        if (budget > 1e7) throw BudgetExceededError("multi-start grid exceeds 1e7 points");
    }
    const std::size_t total = static_cast<std::size_t>(budget);

    SolveOptions opts;
    opts.max_fixed_point = 5000;  // per start; Newton covers degenerate tails

    std::vector<std::vector<Vec>> found_per_slab((total + 4095) / 4096);
    std::vector<char> failed(total, 0);
    parallel_slabs(
        total, threads,
        [&](std::size_t slab, std::size_t begin, std::size_t end) {
            auto& bucket = found_per_slab[slab];
            for (std::size_t i = begin; i < end; ++i) {
                Vec x0(n);
                std::size_t rem = i;
                for (std::size_t l = 0; l < n; ++l) {
                    const std::size_t g = rem % grid_points_per_axis;
                    rem /= grid_points_per_axis;
                    x0[l] = -1.0 + 2.0 * static_cast<double>(g) /
                                       static_cast<double>(grid_points_per_axis - 1);
                }
                try {
                    bucket.push_back(solve_mean_field(std::move(x0), m, 1e-12, opts));
                } catch (const NonConvergenceError&) {
                    failed[i] = 1;
                }
            }
        },
        4096);

    std::vector<Vec> stationary;
    for (auto& bucket : found_per_slab)
        for (auto& v : bucket) stationary.push_back(std::move(v));
    if (stationary.empty()) {
        double worst = 0.0;
        throw NonConvergenceError("no start point converged", worst);
    }

    double f_min = std::numeric_limits<double>::infinity();
    std::vector<double> values(stationary.size());
    for (std::size_t i = 0; i < stationary.size(); ++i) {
        values[i] = eval_G(stationary[i], m);
        f_min = std::min(f_min, values[i]);
    }
    const double value_tol = 1e-9 * std::max(1.0, std::fabs(f_min));

    // deterministic merge: lexicographic order before dedup
    std::vector<std::size_t> order(stationary.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return stationary[a] < stationary[b];
    });

    std::vector<Vec> kept;
    for (std::size_t oi : order) {
        if (values[oi] > f_min + value_tol) continue;
        const auto eig = eigen_sym(hess_G(stationary[oi], m));
        double h_norm = std::max(std::fabs(eig.values.front()), std::fabs(eig.values.back()));
        if (eig.values.front() < -1e-8 * std::max(1.0, h_norm)) continue;  // saddle
        bool dup = false;
        for (const Vec& k : kept) {
            double d2 = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                const double d = k[l] - stationary[oi][l];
                d2 += d * d;
            }
            if (std::sqrt(d2) <= 1e-6) {
                dup = true;
                break;
            }
        }
        if (!dup) kept.push_back(stationary[oi]);
    }

    MinimaSet set;
    set.f_min = f_min;
    for (const Vec& muv : kept) set.points.push_back(classify_minimum(muv, m));
    for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = i + 1; j < kept.size(); ++j) {
            double d2 = 0.0;
            for (std::size_t l = 0; l < n; ++l) {
                const double d = kept[i][l] - kept[j][l];
                d2 += d * d;
            }
            set.delta_bar = std::min(set.delta_bar, std::sqrt(d2));
        }
    return set;
}

} // namespace mscw
