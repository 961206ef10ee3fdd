#pragma once

// Limit laws of the normalized spin sums at a classified minimum.
//
// Type1 minima give a Gaussian for (S_l - N_l mu_l)/sqrt(N_l) with covariance
// chi, computable two independent ways:
//   * implicit differentiation of the mean-field equations,
//     dmu/dh = (I - D M)^{-1} D with D = diag(1 - mu_l^2), M_ls = alpha_s J_ls,
//     symmetrized by the signed square-root rule; and
//   * Htilde^{-1} - A^{-1} with Htilde = D_alpha^{-1} H_G D_alpha^{-1}.
//
// Type2 minima give a quartic-exponential law. We normalize by
// alpha_l^{1/4} N_l^{3/4} (equivalently N^{1/4}(m_l - mu_l)), in which
// coordinates the density exponent is the raw fourth-order Taylor form of G,
// so the two-species critical model has density exp(-(x1^4+x2^4)/24).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "mscw/errors.hpp"
#include "mscw/landscape.hpp"
#include "mscw/linalg.hpp"
#include "mscw/model.hpp"
#include "mscw/quadrature.hpp"

namespace mscw {

// dmu/dh = (I - D M)^{-1} D, then the signed square-root symmetrization.
inline Mat susceptibility_chi(const Vec& mu, const ValidatedModel& m) {
    const std::size_t n = m.n();
    const Vec t = detail::field_args(mu, m);
    Mat k = Mat::identity(n);
    Vec d(n);
    for (std::size_t l = 0; l < n; ++l) {
        const double tl = std::tanh(t[l]);
        d[l] = 1.0 - tl * tl;
    }
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) k(r, c) -= d[r] * m.alpha[c] * m.J()(r, c);

    Mat dm;
    try {
        dm = Lu(k).solve(diag(d));  // dmu/dh
    } catch (const DegeneracyError&) {
        throw DegeneracyError("susceptibility is singular: not a Type1 minimum");
    }

    Mat chi(n, n);
    for (std::size_t l = 0; l < n; ++l) chi(l, l) = dm(l, l);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t s = l + 1; s < n; ++s) {
            const double p = dm(l, s) * dm(s, l);
            const double scale = std::max(1.0, std::fabs(dm(l, s)) + std::fabs(dm(s, l)));
            if (p < -1e-12 * scale * scale)
                throw DegeneracyError("cross susceptibilities disagree in sign");
            const double v = (dm(l, s) >= 0.0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, p));
            chi(l, s) = v;
            chi(s, l) = v;
        }
    return chi;
}

// Htilde_G(mu)^{-1} - A^{-1}
inline Mat chi_via_hessian(const Vec& mu, const ValidatedModel& m) {
    const std::size_t n = m.n();
    const Mat hess = hess_G(mu, m);
    Mat htilde(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            htilde(r, c) = hess(r, c) / (std::sqrt(m.alpha[r]) * std::sqrt(m.alpha[c]));
    Mat hinv;
    try {
        hinv = inverse(htilde);
    } catch (const DegeneracyError&) {
        throw DegeneracyError("Hessian is singular: not a Type1 minimum");
    }
    const Mat ainv = inverse(m.A);
    return symmetrized(hinv - ainv);
}

enum class LawKind { Gaussian, Quartic, Product };

inline const char* to_string(LawKind k) {
    switch (k) {
        case LawKind::Gaussian: return "Gaussian";
        case LawKind::Quartic: return "Quartic";
        default: return "Product";
    }
}

// One monomial of the quartic density exponent: coeff * x_a x_b x_c x_d with
// sorted indices and fold-in of the symmetry multiplicity.
struct QuarticTerm {
    std::array<std::size_t, 4> idx;
    double coeff;
};

struct LimitLaw {
    LawKind kind = LawKind::Gaussian;
    Vec exponents;                         // gamma_l: 1/2 Gaussian, 1/4 quartic
    Mat chi;                               // Gaussian block(s); zero rows/cols on quartic coords
    std::vector<QuarticTerm> quartic_exponent;
    std::vector<std::size_t> gaussian_coords;
    std::vector<std::size_t> quartic_coords;
    Vec alpha;                             // echo needed to reproduce normalizations
};

namespace detail {

// collect sorted-index monomials of (1/4!) sum d4G y_a y_b y_c y_d
inline std::vector<QuarticTerm> quartic_terms(const Taylor4& t4,
                                              const std::vector<std::size_t>& coords) {
    std::vector<QuarticTerm> terms;
    const auto in = [&](std::size_t v) {
        return std::find(coords.begin(), coords.end(), v) != coords.end();
    };
    const std::size_t n = t4.n;
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a; b < n; ++b)
            for (std::size_t c = b; c < n; ++c)
                for (std::size_t d = c; d < n; ++d) {
                    if (!(in(a) && in(b) && in(c) && in(d))) continue;
                    // multiplicity of the sorted multi-index among the 4! orderings
                    std::array<std::size_t, 4> ix{a, b, c, d};
                    double mult = 24.0;
                    std::size_t run = 1;
                    for (std::size_t k = 1; k <= 3; ++k) {
                        if (ix[k] == ix[k - 1]) {
                            ++run;
                        } else {
                            for (std::size_t r = 2; r <= run; ++r) mult /= r;
                            run = 1;
                        }
                    }
                    for (std::size_t r = 2; r <= run; ++r) mult /= r;
                    const double coeff = t4.t4(a, b, c, d) * mult / 24.0;
                    if (coeff != 0.0) terms.push_back({ix, coeff});
                }
    return terms;
}

inline bool is_diagonal_quartic(const std::vector<QuarticTerm>& terms) {
    for (const auto& t : terms)
        if (!(t.idx[0] == t.idx[1] && t.idx[1] == t.idx[2] && t.idx[2] == t.idx[3]))
            return false;
    return true;
}

// evaluate the exponent polynomial
inline double quartic_exponent_value(const std::vector<QuarticTerm>& terms, const Vec& x) {
    double acc = 0.0;
    for (const auto& t : terms)
        acc += t.coeff * x[t.idx[0]] * x[t.idx[1]] * x[t.idx[2]] * x[t.idx[3]];
    return acc;
}

} // namespace detail

// Gaussian sub-covariance on the coordinates of the non-degenerate blocks,
// embedded into the full n x n matrix (zeros elsewhere).
inline Mat block_chi(const Vec& mu, const ValidatedModel& m,
                     const std::vector<std::size_t>& coords) {
    const std::size_t n = m.n();
    const Vec t = detail::field_args(mu, m);
    Mat k = Mat::identity(coords.size());
    Mat d(coords.size(), coords.size());
    for (std::size_t r = 0; r < coords.size(); ++r) {
        const double tv = std::tanh(t[coords[r]]);
        const double dr = 1.0 - tv * tv;
        d(r, r) = dr;
        for (std::size_t c = 0; c < coords.size(); ++c)
            k(r, c) -= dr * m.alpha[coords[c]] * m.J()(coords[r], coords[c]);
    }
    Mat sub;
    try {
        sub = Lu(k).solve(d);
    } catch (const DegeneracyError&) {
        throw DegeneracyError("Gaussian block is degenerate");
    }
    // signed square-root symmetrization, as for the full matrix
    Mat chi(n, n);
    for (std::size_t r = 0; r < coords.size(); ++r) {
        chi(coords[r], coords[r]) = sub(r, r);
        for (std::size_t c = r + 1; c < coords.size(); ++c) {
            const double p = sub(r, c) * sub(c, r);
            const double v = (sub(r, c) >= 0.0 ? 1.0 : -1.0) * std::sqrt(std::max(0.0, p));
            chi(coords[r], coords[c]) = v;
            chi(coords[c], coords[r]) = v;
        }
    }
    return chi;
}

inline LimitLaw build_limit_law(const CriticalPoint& pt, const ValidatedModel& m) {
    const std::size_t n = m.n();
    LimitLaw law;
    law.alpha = m.alpha;
    law.exponents.assign(n, 0.5);

    switch (pt.k) {
        case MinimumType::Type1: {
            law.kind = LawKind::Gaussian;
            law.chi = susceptibility_chi(pt.mu, m);
            for (std::size_t l = 0; l < n; ++l) law.gaussian_coords.push_back(l);
            return law;
        }
        case MinimumType::Type2: {
            law.kind = LawKind::Quartic;
            std::vector<std::size_t> all(n);
            for (std::size_t l = 0; l < n; ++l) all[l] = l;
            const Taylor4 t4 = pt.quartic ? *pt.quartic : taylor4_G(pt.mu, m);
            law.quartic_exponent = detail::quartic_terms(t4, all);
            law.quartic_coords = all;
            law.exponents.assign(n, 0.25);
            law.chi = Mat(n, n);
            return law;
        }
        case MinimumType::NonHomogeneousSeparable: {
            law.kind = LawKind::Product;
            std::vector<char> is_null(n, 0);
            for (std::size_t l : pt.null_coords) is_null[l] = 1;
            for (std::size_t l = 0; l < n; ++l)
                (is_null[l] ? law.quartic_coords : law.gaussian_coords).push_back(l);
            const Taylor4 t4 = pt.quartic ? *pt.quartic : taylor4_G(pt.mu, m);
            law.quartic_exponent = detail::quartic_terms(t4, law.quartic_coords);
            law.chi = block_chi(pt.mu, m, law.gaussian_coords);
            for (std::size_t l : law.quartic_coords) law.exponents[l] = 0.25;
            return law;
        }
        default:
            throw ValidationError("cannot build a limit law for an unclassified point");
    }
}

struct LawMoments {
    Vec mean;                  // zero for these laws; quadrature-verified
    Mat covariance;
    Vec fourth_raw;            // E[x_l^4]
    Vec fourth_standardized;   // E[x_l^4] / E[x_l^2]^2
    double normalization = 1.0;  // integral of exp(-Q) over the quartic block
    double max_odd_moment = 0.0;
};

namespace detail {

struct Quartic1D {
    double z;   // int exp(-c x^4)
    double m1;
    double m2;
    double m3;
    double m4;
};

inline Quartic1D quartic_1d_moments(double c) {
    if (!(c > 0.0)) throw QuadratureError("quartic coefficient must be positive");
    // tail cut: exp(-c L^4) = e^{-36} keeps the truncated mass below 1e-12
    const double L = std::pow(36.0 / c, 0.25);
    const auto density = [c](double x) { return std::exp(-c * x * x * x * x); };
    Quartic1D q;
    q.z = integrate([&](double x) { return density(x); }, -L, L);
    q.m1 = integrate([&](double x) { return x * density(x); }, -L, L) / q.z;
    q.m2 = integrate([&](double x) { return x * x * density(x); }, -L, L) / q.z;
    q.m3 = integrate([&](double x) { return x * x * x * density(x); }, -L, L) / q.z;
    q.m4 = integrate([&](double x) { return x * x * x * x * density(x); }, -L, L) / q.z;
    return q;
}

} // namespace detail

inline LawMoments law_moments(const LimitLaw& law) {
    const std::size_t n = law.exponents.size();
    LawMoments out;
    out.mean.assign(n, 0.0);
    out.covariance = Mat(n, n);
    out.fourth_raw.assign(n, 0.0);
    out.fourth_standardized.assign(n, 0.0);

    for (std::size_t r : law.gaussian_coords) {
        for (std::size_t c : law.gaussian_coords) out.covariance(r, c) = law.chi(r, c);
        const double v = law.chi(r, r);
        out.fourth_raw[r] = 3.0 * v * v;
        out.fourth_standardized[r] = 3.0;
    }

    if (!law.quartic_coords.empty()) {
        if (!detail::is_diagonal_quartic(law.quartic_exponent)) {
            // cross-coupled quartic exponents only arise outside the model
            // family handled here; tensorized quadrature kept for n <= 2
            if (law.quartic_coords.size() > 2)
                throw QuadratureError("non-separable quartic law beyond 2 coordinates");
            const auto& terms = law.quartic_exponent;
            const std::size_t a = law.quartic_coords[0];
            const std::size_t b = law.quartic_coords[1];
            double cmax = 0.0;
            for (const auto& t : terms) cmax = std::max(cmax, std::fabs(t.coeff));
            const double L = std::pow(72.0 / std::max(1e-12, cmax), 0.25);
            Vec pt(n, 0.0);
            const auto dens = [&](double x, double y) {
                pt[a] = x;
                pt[b] = y;
                return std::exp(-detail::quartic_exponent_value(terms, pt));
            };
            QuadOptions inner;
            inner.rel_tol = 1e-11;
            const auto along_y = [&](const std::function<double(double, double)>& f, double x) {
                return integrate([&](double y) { return f(x, y); }, -L, L, inner);
            };
            const double z = integrate([&](double x) { return along_y(dens, x); }, -L, L, inner);
            const auto mom = [&](int pa, int pb) {
                return integrate(
                           [&](double x) {
                               return along_y(
                                   [&](double xx, double yy) {
                                       return std::pow(xx, pa) * std::pow(yy, pb) * dens(xx, yy);
                                   },
                                   x);
                           },
                           -L, L, inner) /
                       z;
            };
            out.normalization = z;
            out.covariance(a, a) = mom(2, 0);
            out.covariance(b, b) = mom(0, 2);
            out.covariance(a, b) = out.covariance(b, a) = mom(1, 1);
            out.fourth_raw[a] = mom(4, 0);
            out.fourth_raw[b] = mom(0, 4);
            out.fourth_standardized[a] = out.fourth_raw[a] / (mom(2, 0) * mom(2, 0));
            out.fourth_standardized[b] = out.fourth_raw[b] / (mom(0, 2) * mom(0, 2));
            out.max_odd_moment = std::max(std::fabs(mom(1, 0)), std::fabs(mom(0, 1)));
            return out;
        }
        double z_total = 1.0;
        for (const auto& t : law.quartic_exponent) {
            const std::size_t l = t.idx[0];
            const auto q = detail::quartic_1d_moments(t.coeff);
            z_total *= q.z;
            out.covariance(l, l) = q.m2;
            out.fourth_raw[l] = q.m4;
            out.fourth_standardized[l] = q.m4 / (q.m2 * q.m2);
            out.max_odd_moment =
                std::max({out.max_odd_moment, std::fabs(q.m1), std::fabs(q.m3)});
        }
        out.normalization = z_total;
    }
    return out;
}

} // namespace mscw
