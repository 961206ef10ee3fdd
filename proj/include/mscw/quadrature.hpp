#pragma once

// Adaptive Gauss-Kronrod 15(7) quadrature. The 7-point Gauss subset provides
// the error estimate; panels bisect until the local estimate passes.

#include <cmath>
#include <cstddef>
#include <functional>

#include "mscw/errors.hpp"

namespace mscw {

namespace detail {

// QUADPACK dqk15 abscissae/weights on [-1, 1]
inline constexpr double gk_nodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144838258730, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double gk_weights[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double g7_weights[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct PanelResult {
    double integral;
    double error;
};

template <typename F>
PanelResult gk15(const F& f, double a, double b) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_mid = f(mid);
    double kronrod = gk_weights[7] * f_mid;
    double gauss = g7_weights[3] * f_mid;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * gk_nodes[i];
        const double fsum = f(mid - dx) + f(mid + dx);
        kronrod += gk_weights[i] * fsum;
        if (i % 2 == 1) gauss += g7_weights[i / 2] * fsum;
    }
    kronrod *= half;
    gauss *= half;
    return {kronrod, std::fabs(kronrod - gauss)};
}

} // namespace detail

struct QuadOptions {
    double rel_tol = 1e-13;
    double abs_tol = 1e-15;
    int max_depth = 48;
    long max_panels = 200000;
};

// integral of f over [a, b]
template <typename F>
double integrate(const F& f, double a, double b, const QuadOptions& opts = {}) {
    long panels = 0;
    const std::function<double(double, double, detail::PanelResult, int)> refine =
        [&](double lo, double hi, detail::PanelResult r, int depth) -> double {
        if (++panels > opts.max_panels)
            throw QuadratureError("quadrature panel budget exceeded");
        if (r.error <= opts.abs_tol + opts.rel_tol * std::fabs(r.integral) ||
            depth >= opts.max_depth)
            return r.integral;
        const double mid = 0.5 * (lo + hi);
        const auto left = detail::gk15(f, lo, mid);
        const auto right = detail::gk15(f, mid, hi);
        return refine(lo, mid, left, depth + 1) + refine(mid, hi, right, depth + 1);
    };
    return refine(a, b, detail::gk15(f, a, b), 0);
}

} // namespace mscw
