// Acceptance suite: desk-scale experiments that check the predicted limit
// laws against exact finite-N enumeration, plus the property batteries the
// library contracts promise. One PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mscw/mscw.hpp"
#include "../unit/test_helpers.hpp"

using namespace mscw;
using testutil::make_model;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
};

#define REQUIRE_TRUE(out, cond, msg)                                   \
    do {                                                               \
        if (!(cond)) {                                                 \
            (out).pass = false;                                        \
            (out).detail << " [" << (msg) << "]";                      \
        }                                                              \
    } while (0)

// ---- 1. Hamiltonian identity over all configurations --------------------

Outcome criterion_hamiltonian_identity() {
    Outcome out;
    std::mt19937_64 rng(101);
    double worst = 0.0;
    for (int done = 0; done < 200;) {
        const auto m = testutil::random_model(rng, false, 3, 5);
        const auto n_total = m.spec.partition.total();
        if (n_total > 12) continue;
        ++done;
        for (std::uint64_t mask = 0; mask < (1ull << n_total); ++mask) {
            SpinConfig cfg;
            cfg.sigma.resize(n_total);
            for (std::int64_t i = 0; i < n_total; ++i)
                cfg.sigma[i] = (mask >> i) & 1 ? 1 : -1;
            const double hq = energy_quadratic(cfg, m);
            const double hg = -static_cast<double>(n_total) *
                              g_per_spin(cfg.magnetizations(m.spec.partition), m);
            const double rel = std::fabs(hq - hg) / std::max(1.0, std::fabs(hg));
            worst = std::max(worst, rel);
        }
    }
    out.detail << "max relative difference " << worst;
    REQUIRE_TRUE(out, worst <= 1e-12, "identity violated");
    return out;
}

// ---- 2. Count-collapse enumeration vs 2^N brute force --------------------

Outcome criterion_brute_force_distribution() {
    Outcome out;
    std::mt19937_64 rng(103);
    double worst = 0.0;
    for (int done = 0; done < 200;) {
        const auto m = testutil::random_model(rng, false, 3, 5);
        if (m.spec.partition.total() > 12) continue;
        ++done;
        const auto oracle = testutil::brute_force_distribution(m);
        const auto dist = exact_joint(m);
        std::vector<std::int64_t> c;
        for (std::size_t cell = 0; cell < dist.cells(); ++cell) {
            dist.counts(cell, c);
            const auto hit = oracle.find(c);
            const double expected = hit == oracle.end() ? 0.0 : hit->second;
            worst = std::max(worst, std::fabs(dist.probability(cell) - expected));
        }
    }
    out.detail << "max probability error " << worst;
    REQUIRE_TRUE(out, worst <= 1e-12, "distributions differ");
    return out;
}

// ---- 3. Covariance cross-formula ------------------------------------------

Outcome criterion_chi_cross_formula() {
    Outcome out;
    std::mt19937_64 rng(107);
    double worst = 0.0;
    double worst_eig = 1e9;
    for (int it = 0; it < 100; ++it) {
        const auto m = testutil::random_model(rng, true, 3, 60);
        const Vec mu = solve_mean_field(Vec(m.n(), 0.0), m, 1e-13);
        const Mat a = susceptibility_chi(mu, m);
        const Mat b = chi_via_hessian(mu, m);
        for (std::size_t r = 0; r < m.n(); ++r)
            for (std::size_t c = 0; c < m.n(); ++c)
                worst = std::max(worst, std::fabs(a(r, c) - b(r, c)));
        worst_eig = std::min(worst_eig, eigen_sym(a).values.front());
        worst_eig = std::min(worst_eig, eigen_sym(b).values.front());
        for (std::size_t r = 0; r < m.n(); ++r)
            for (std::size_t c = r + 1; c < m.n(); ++c) {
                REQUIRE_TRUE(out, a(r, c) == a(c, r), "susceptibility not symmetric");
                REQUIRE_TRUE(out, b(r, c) == b(c, r), "Hessian route not symmetric");
            }
    }
    out.detail << "max entry difference " << worst << ", min eigenvalue " << worst_eig;
    REQUIRE_TRUE(out, worst <= 1e-10, "routes disagree");
    REQUIRE_TRUE(out, worst_eig > 0.0, "not positive definite");
    return out;
}

// ---- 4. Gaussian limit of the subcritical pair model ----------------------

Outcome criterion_gaussian_convergence() {
    Outcome out;
    const auto base = make_model({100, 100}, {{0.8, 0.3}, {0.3, 0.8}}, {0.0, 0.0});
    const auto pt = classify_minimum({0.0, 0.0}, base);
    REQUIRE_TRUE(out, pt.k == MinimumType::Type1, "expected a Type1 minimum");
    const auto law = build_limit_law(pt, base);

    double prev = 1e9;
    double last = 0.0;
    for (std::int64_t n : {100, 200, 400, 800}) {
        const auto m = make_model({n, n}, {{0.8, 0.3}, {0.3, 0.8}}, {0.0, 0.0});
        const auto dist = exact_joint(m);
        const auto rep = normalized_moments(dist, pt.mu, law.exponents);
        const auto disc = compare_to_law(rep, law);
        out.detail << " N=" << n << ":" << disc.covariance_max_rel;
        REQUIRE_TRUE(out, disc.covariance_max_rel < prev, "discrepancy not decreasing");
        prev = disc.covariance_max_rel;
        last = disc.covariance_max_rel;
    }
    REQUIRE_TRUE(out, last <= 0.05, "above 5% at N=800");
    return out;
}

// ---- 5. Quartic limit at the critical point --------------------------------

Outcome criterion_quartic_convergence() {
    Outcome out;
    const auto base = make_model({200, 200}, {{2.0, 0.0}, {0.0, 2.0}}, {0.0, 0.0});
    const auto pt = classify_minimum({0.0, 0.0}, base);
    REQUIRE_TRUE(out, pt.k == MinimumType::Type2, "expected a Type2 minimum");
    const auto law = build_limit_law(pt, base);
    const auto lm = law_moments(law);
    REQUIRE_TRUE(out, std::fabs(lm.fourth_raw[0] - 6.0) <= 1e-8,
                 "quadrature oracle must give E[x^4] = 6");

    double prev = 1e9;
    double last = 0.0;
    for (std::int64_t n : {200, 500, 1000}) {
        const auto m = make_model({n, n}, {{2.0, 0.0}, {0.0, 2.0}}, {0.0, 0.0});
        const auto dist = exact_joint(m);
        const auto rep = normalized_moments(dist, pt.mu, law.exponents);
        double gap = 0.0;
        for (std::size_t l = 0; l < 2; ++l)
            gap = std::max(gap, std::fabs(rep.fourth_raw[l] - 6.0));
        out.detail << " N=" << n << ":|E[x^4]-6|=" << gap;
        REQUIRE_TRUE(out, gap < prev, "gap not decreasing");
        prev = gap;
        last = gap;
    }
    REQUIRE_TRUE(out, last <= 0.15 * 6.0, "above 15% at N=1000");
    return out;
}

// ---- 6. Gaussian x quartic product law -------------------------------------

Outcome criterion_product_law() {
    Outcome out;
    const auto base = make_model({800, 800}, {{2.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0});
    const auto pt = classify_minimum({0.0, 0.0}, base);
    REQUIRE_TRUE(out, pt.k == MinimumType::NonHomogeneousSeparable, "expected a product law");
    const auto law = build_limit_law(pt, base);
    REQUIRE_TRUE(out, law.exponents[0] == 0.25 && law.exponents[1] == 0.5,
                 "coordinate 1 quartic, coordinate 2 Gaussian");

    {
        const auto m = make_model({800, 800}, {{2.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0});
        const auto rep = normalized_moments(exact_joint(m), pt.mu, law.exponents);
        const double kurt = rep.fourth_standardized[1];
        out.detail << " N2=800 kurtosis=" << kurt;
        REQUIRE_TRUE(out, std::fabs(kurt - 3.0) <= 0.05 * 3.0,
                     "Gaussian coordinate kurtosis off by more than 5%");
        REQUIRE_TRUE(out, std::fabs(rep.covariance(0, 1)) <= 1e-10,
                     "normalized coordinates not independent");
    }
    {
        const auto m = make_model({1000, 1000}, {{2.0, 0.0}, {0.0, 1.0}}, {0.0, 0.0});
        const auto rep = normalized_moments(exact_joint(m), pt.mu, law.exponents);
        out.detail << " N1=1000 E[x^4]=" << rep.fourth_raw[0];
        REQUIRE_TRUE(out, std::fabs(rep.fourth_raw[0] - 6.0) <= 0.15 * 6.0,
                     "quartic coordinate fourth moment off by more than 15%");
        REQUIRE_TRUE(out, std::fabs(rep.covariance(0, 1)) <= 1e-10,
                     "normalized coordinates not independent");
    }
    return out;
}

// ---- 7. Ball-conditioned law around one of two minima ----------------------

Outcome criterion_conditional_law() {
    Outcome out;

    // the weakly coupled pair sits below the critical channel
    // (alpha (J11 + J12) = 0.85 < 1): its landscape has exactly one minimum,
    // so the two-minimum experiment runs on a supercritical model instead
    {
        const auto weak = make_model({100, 100}, {{1.5, 0.2}, {0.2, 1.5}}, {0.0, 0.0});
        const auto set = find_global_minima(weak);
        REQUIRE_TRUE(out, set.points.size() == 1 && norm_inf(set.points[0].mu) < 1e-10,
                     "weakly coupled pair model must have a unique minimum at 0");
        out.detail << "weak pair unimodal (verified); ball experiment on J=2.4/0.8:";
    }

    const auto base = make_model({200, 200}, {{2.4, 0.8}, {0.8, 2.4}}, {0.0, 0.0});
    const auto set = find_global_minima(base);
    REQUIRE_TRUE(out, set.points.size() == 2, "expected two symmetric minima");
    if (set.points.size() != 2) return out;
    const auto& plus =
        set.points[0].mu[0] > 0.0 ? set.points[0] : set.points[1];
    REQUIRE_TRUE(out, plus.k == MinimumType::Type1, "minima must be Type1");
    const auto law = build_limit_law(plus, base);
    const double d = set.delta_bar / 2.0;
    out.detail << " mu*=" << plus.mu[0] << " delta_bar=" << set.delta_bar;

    double mean_err = 1e9, cov_err = 1e9;
    for (std::int64_t n : {200, 400, 800}) {
        const auto m = make_model({n, n}, {{2.4, 0.8}, {0.8, 2.4}}, {0.0, 0.0});
        const auto dist = conditional_joint(m, plus.mu, d);
        const auto rep = normalized_moments(dist, plus.mu, law.exponents);
        mean_err = 0.0;
        for (std::size_t l = 0; l < 2; ++l)
            mean_err = std::max(mean_err,
                                std::fabs(rep.mean_magnetization[l] - plus.mu[l]) /
                                    std::fabs(plus.mu[l]));
        const auto disc = compare_to_law(rep, law);
        cov_err = disc.covariance_max_rel;
        out.detail << " N=" << n << ":(mean " << mean_err << ", cov " << cov_err << ")";
    }
    REQUIRE_TRUE(out, mean_err <= 0.02, "conditional mean off by more than 2% at N=800");
    REQUIRE_TRUE(out, cov_err <= 0.07, "conditional covariance off by more than 7% at N=800");
    return out;
}

// ---- 8. Analytic derivatives vs Richardson finite differences --------------

Outcome criterion_derivatives() {
    Outcome out;
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> unif(-1.2, 1.2);
    double worst = 0.0;
    for (int it = 0; it < 200; ++it) {
        const auto m = testutil::random_model(rng, false, 3, 8);
        Vec x(m.n());
        for (auto& v : x) v = unif(rng);
        const auto f = [&](const Vec& p) { return eval_G(p, m); };

        const Vec g = grad_G(x, m);
        const Vec g_fd = testutil::fd_grad(f, x);
        for (std::size_t i = 0; i < m.n(); ++i)
            worst = std::max(worst, std::fabs(g[i] - g_fd[i]) / std::max(1.0, std::fabs(g_fd[i])));

        const Mat h = hess_G(x, m);
        const Mat h_fd = testutil::fd_hess(f, x);
        for (std::size_t i = 0; i < m.n(); ++i)
            for (std::size_t j = 0; j < m.n(); ++j)
                worst = std::max(worst, std::fabs(h(i, j) - h_fd(i, j)) /
                                            std::max(1.0, std::fabs(h_fd(i, j))));

        if (it % 10 == 0) {  // full third/fourth tensors are pricier; sample
            const auto t = taylor4_G(x, m);
            for (std::size_t i = 0; i < m.n(); ++i)
                for (std::size_t j = 0; j < m.n(); ++j)
                    for (std::size_t k = 0; k < m.n(); ++k) {
                        const double fd = testutil::fd_third(f, x, i, j, k);
                        worst = std::max(worst, std::fabs(t.t3(i, j, k) - fd) /
                                                    std::max(1.0, std::fabs(fd)));
                    }
            for (std::size_t i = 0; i < m.n(); ++i)
                for (std::size_t j = 0; j < m.n(); ++j) {
                    const double fd = testutil::fd_fourth(f, x, i, i, j, j);
                    worst = std::max(worst, std::fabs(t.t4(i, i, j, j) - fd) /
                                                std::max(1.0, std::fabs(fd)));
                }
        }
    }
    out.detail << "max relative error " << worst;
    REQUIRE_TRUE(out, worst <= 1e-6, "derivative mismatch");
    return out;
}

// ---- 9. Classical one-species reduction ------------------------------------

Outcome criterion_classical_reduction() {
    Outcome out;
    {
        const auto m = make_model({50}, {{1.5}}, {0.0});
        const auto set = find_global_minima(m);
        REQUIRE_TRUE(out, set.points.size() == 2, "expected a symmetric pair");
        const double root = testutil::scalar_mean_field_root(1.5);
        for (const auto& pt : set.points)
            REQUIRE_TRUE(out, std::fabs(std::fabs(pt.mu[0]) - root) <= 1e-10,
                         "minimum does not match the bisection oracle");
        out.detail << "mu*=" << root;
    }
    {
        const auto m = make_model({50}, {{0.5}}, {0.0});
        const Mat chi = susceptibility_chi({0.0}, m);
        out.detail << " chi(J=0.5)=" << chi(0, 0);
        REQUIRE_TRUE(out, std::fabs(chi(0, 0) - 2.0) <= 1e-10, "chi must equal 2");
    }
    return out;
}

// ---- 10. Monte-Carlo vs exact moments --------------------------------------

Outcome criterion_glauber_agreement() {
    Outcome out;
    const auto m = make_model({50, 50}, {{0.8, 0.3}, {0.3, 0.8}}, {0.2, 0.1});
    GlauberOptions opts;
    opts.sweeps = 100000;
    opts.burn_in = 5000;
    opts.seed = 2024;
    const auto mc = glauber_sample(m, opts);
    const auto exact = normalized_moments(exact_joint(m), {0.0, 0.0}, {1.0, 1.0});
    for (std::size_t l = 0; l < 2; ++l) {
        const double se = std::max((*mc.mean_se)[l], 1e-12);
        const double pull = std::fabs(mc.mean[l] - exact.mean[l]) / se;
        out.detail << " mean" << (l + 1) << " pull=" << pull;
        REQUIRE_TRUE(out, pull <= 3.0, "mean outside 3 standard errors");
    }
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = r; c < 2; ++c) {
            const double se = std::max((*mc.covariance_se)(r, c), 1e-12);
            const double pull = std::fabs(mc.covariance(r, c) - exact.covariance(r, c)) / se;
            REQUIRE_TRUE(out, pull <= 3.0, "covariance outside 3 standard errors");
        }
    return out;
}

} // namespace

int main() {
    struct Entry {
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria = {
        {"hamiltonian-identity", criterion_hamiltonian_identity},
        {"brute-force-distribution", criterion_brute_force_distribution},
        {"covariance-cross-formula", criterion_chi_cross_formula},
        {"gaussian-convergence", criterion_gaussian_convergence},
        {"quartic-convergence", criterion_quartic_convergence},
        {"product-law", criterion_product_law},
        {"conditional-law", criterion_conditional_law},
        {"derivative-correctness", criterion_derivatives},
        {"classical-reduction", criterion_classical_reduction},
        {"monte-carlo-agreement", criterion_glauber_agreement},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = criteria[i].run();
        } catch (const std::exception& e) {
            out.pass = false;
            out.detail << " [exception: " << e.what() << "]";
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("ACCEPTANCE %2zu %-28s %s (%.1fs)%s\n", i + 1, criteria[i].name,
                    out.pass ? "PASS" : "FAIL", secs, out.detail.str().c_str());
        if (!out.pass) ++failures;
    }
    if (failures) std::printf("%d criterion(s) failed\n", failures);
    return failures;
}
