#pragma once

// Multi-species Curie-Weiss model: n species of sizes N_1..N_n, a symmetric
// n x n reduced interaction matrix J with positive diagonal, and per-species
// external fields h. The quadratic Hamiltonian
//     H(sigma) = -(1/2N) sum_{i,j} J_ij sigma_i sigma_j - sum_i h_i sigma_i
// (block-constant couplings, self-pairs i=j included) collapses exactly to
// H = -N g(m_1..m_n) in the species magnetizations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mscw/errors.hpp"
#include "mscw/linalg.hpp"

namespace mscw {

struct SpeciesPartition {
    std::vector<std::int64_t> sizes;  // N_l >= 1

    std::size_t species() const { return sizes.size(); }

    std::int64_t total() const {
        return std::accumulate(sizes.begin(), sizes.end(), std::int64_t{0});
    }

    // alpha_l = N_l / N, derived from sizes on demand, never stored.
    Vec alphas() const {
        const double n_total = static_cast<double>(total());
        Vec a(sizes.size());
        for (std::size_t l = 0; l < sizes.size(); ++l)
            a[l] = static_cast<double>(sizes[l]) / n_total;
        return a;
    }

    void validate() const {
        if (sizes.empty()) throw ValidationError("partition has no species");
        for (std::size_t l = 0; l < sizes.size(); ++l)
            if (sizes[l] < 1)
                throw ValidationError("species size N_" + std::to_string(l + 1) +
                                      " must be >= 1");
    }
};

struct ModelSpec {
    SpeciesPartition partition;
    Mat J;  // n x n, symmetric, J_ll > 0
    Vec h;  // n
};

struct ValidatedModel {
    ModelSpec spec;
    bool positive_definite = false;
    Mat A;                              // D_alpha J D_alpha
    double smallest_eigenvalue = 0.0;   // of J
    Vec alpha;                          // cached alphas

    std::size_t n() const { return alpha.size(); }
    const Mat& J() const { return spec.J; }
    const Vec& h() const { return spec.h; }
};

// Spins live in {-1,+1}, laid out species block by species block.
struct SpinConfig {
    std::vector<std::int8_t> sigma;

    void validate(const SpeciesPartition& p) const {
        if (static_cast<std::int64_t>(sigma.size()) != p.total())
            throw ValidationError("spin configuration length does not match partition");
        for (std::int8_t s : sigma)
            if (s != 1 && s != -1) throw ValidationError("spins must be +1 or -1");
    }

    // per-species sums S_l
    std::vector<std::int64_t> species_sums(const SpeciesPartition& p) const {
        std::vector<std::int64_t> s(p.species(), 0);
        std::size_t i = 0;
        for (std::size_t l = 0; l < p.species(); ++l)
            for (std::int64_t k = 0; k < p.sizes[l]; ++k) s[l] += sigma[i++];
        return s;
    }

    // per-species magnetizations m_l = S_l / N_l
    Vec magnetizations(const SpeciesPartition& p) const {
        auto s = species_sums(p);
        Vec m(s.size());
        for (std::size_t l = 0; l < s.size(); ++l)
            m[l] = static_cast<double>(s[l]) / static_cast<double>(p.sizes[l]);
        return m;
    }
};

// Checks the type invariants, symmetrizes J (rejecting asymmetry beyond
// 1e-12 instead of hiding it), and settles positive definiteness by a full
// symmetric eigendecomposition with threshold 1e-10 * max(1, |J|_max).
inline ValidatedModel validate_model(ModelSpec spec) {
    spec.partition.validate();
    const std::size_t n = spec.partition.species();
    if (spec.J.rows() != n || spec.J.cols() != n)
        throw ValidationError("J must be " + std::to_string(n) + "x" + std::to_string(n));
    if (spec.h.size() != n)
        throw ValidationError("h must have length " + std::to_string(n));

    const double j_scale = std::max(1.0, spec.J.max_abs());
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = r + 1; c < n; ++c)
            if (std::fabs(spec.J(r, c) - spec.J(c, r)) > 1e-12 * j_scale)
                throw ValidationError("J is not symmetric at entry (" + std::to_string(r + 1) +
                                      "," + std::to_string(c + 1) + ")");
    spec.J = symmetrized(spec.J);
    for (std::size_t l = 0; l < n; ++l)
        if (!(spec.J(l, l) > 0.0))
            throw ValidationError("diagonal entry J_" + std::to_string(l + 1) +
                                  std::to_string(l + 1) + " must be positive");
    for (double v : spec.J.data())
        if (!std::isfinite(v)) throw ValidationError("J has a non-finite entry");
    for (double v : spec.h)
        if (!std::isfinite(v)) throw ValidationError("h has a non-finite entry");

    ValidatedModel m;
    m.alpha = spec.partition.alphas();
    const auto eig = eigen_sym(spec.J);
    m.smallest_eigenvalue = eig.values.front();
    m.positive_definite = m.smallest_eigenvalue > 1e-10 * j_scale;

    m.A = Mat(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            m.A(r, c) = std::sqrt(m.alpha[r]) * spec.J(r, c) * std::sqrt(m.alpha[c]);
    m.A = symmetrized(m.A);
    m.spec = std::move(spec);
    return m;
}

// g(m) = 1/2 sum_{l,s} alpha_l alpha_s J_ls m_l m_s + sum_l alpha_l h_l m_l
inline double g_per_spin(const Vec& m, const ValidatedModel& model) {
    const std::size_t n = model.n();
    if (m.size() != n) throw ValidationError("magnetization vector has wrong length");
    for (double v : m)
        if (std::fabs(v) > 1.0 + 1e-12)
            throw ValidationError("magnetizations must lie in [-1, 1]");
    double quad = 0.0, lin = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        double row = 0.0;
        for (std::size_t s = 0; s < n; ++s)
            row += model.alpha[s] * model.J()(l, s) * m[s];
        quad += model.alpha[l] * m[l] * row;
        lin += model.alpha[l] * model.h()[l] * m[l];
    }
    return 0.5 * quad + lin;
}

// The full quadratic form in the spins; the block structure makes it a
// function of the species sums only, so H = -N g(m) holds exactly.
inline double energy_quadratic(const SpinConfig& config, const ValidatedModel& model) {
    config.validate(model.spec.partition);
    const auto sums = config.species_sums(model.spec.partition);
    const std::size_t n = model.n();
    const double n_total = static_cast<double>(model.spec.partition.total());
    double quad = 0.0, field = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t s = 0; s < n; ++s)
            quad += model.J()(l, s) * static_cast<double>(sums[l]) * static_cast<double>(sums[s]);
        field += model.h()[l] * static_cast<double>(sums[l]);
    }
    return -quad / (2.0 * n_total) - field;
}

} // namespace mscw
