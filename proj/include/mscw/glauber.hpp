#pragma once

// Single-site heat-bath (Glauber) dynamics. A spin i of species l is
// resampled from its exact conditional,
//   P(sigma_i = +1 | rest) = (1 + tanh(theta)) / 2,
//   theta = (1/N)(sum_s J_ls S_s - J_ll sigma_i) + h_l,
// which leaves the Boltzmann-Gibbs measure invariant. One sweep is N updates
// at uniformly random sites. Fully reproducible from the seed; moments are
// reported with batch-mean standard errors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mscw/errors.hpp"
#include "mscw/exactdist.hpp"
#include "mscw/model.hpp"

namespace mscw {

struct GlauberOptions {
    long sweeps = 100000;
    long burn_in = 1000;
    std::uint64_t seed = 1;
    int batches = 32;
};

inline MomentReport glauber_sample(const ValidatedModel& model, const GlauberOptions& opts) {
    if (opts.burn_in < 0 || opts.sweeps <= opts.burn_in)
        throw ValidationError("need sweeps > burn_in >= 0");
    if (opts.batches < 2) throw ValidationError("need at least 2 batches");

    const auto& p = model.spec.partition;
    const std::size_t n = p.species();
    const std::int64_t n_total = p.total();
    const double n_tot_d = static_cast<double>(n_total);

    // species lookup per site
    std::vector<std::uint32_t> species_of(static_cast<std::size_t>(n_total));
    {
        std::size_t i = 0;
        for (std::size_t l = 0; l < n; ++l)
            for (std::int64_t k = 0; k < p.sizes[l]; ++k) species_of[i++] = l;
    }

    std::mt19937_64 rng(opts.seed);
    std::uniform_int_distribution<std::int64_t> pick(0, n_total - 1);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // cold start: all up
    std::vector<std::int8_t> sigma(static_cast<std::size_t>(n_total), 1);
    std::vector<std::int64_t> sums(n);
    for (std::size_t l = 0; l < n; ++l) sums[l] = p.sizes[l];

    const auto sweep_once = [&] {
        for (std::int64_t step = 0; step < n_total; ++step) {
            const std::size_t i = static_cast<std::size_t>(pick(rng));
            const std::size_t l = species_of[i];
            double theta = model.h()[l];
            for (std::size_t s = 0; s < n; ++s)
                theta += model.J()(l, s) * static_cast<double>(sums[s]) / n_tot_d;
            theta -= model.J()(l, l) * static_cast<double>(sigma[i]) / n_tot_d;
            const double p_up = 0.5 * (1.0 + std::tanh(theta));
            const std::int8_t next = unif(rng) < p_up ? 1 : -1;
            if (next != sigma[i]) {
                sums[l] += 2 * next;
                sigma[i] = next;
            }
        }
    };

    for (long sw = 0; sw < opts.burn_in; ++sw) sweep_once();

    const long measured = opts.sweeps - opts.burn_in;
    const long per_batch = std::max<long>(1, measured / opts.batches);
    const int n_batches = static_cast<int>(std::min<long>(opts.batches, measured / per_batch));

    struct BatchMoments {
        Vec mean;
        Mat second;
        Vec fourth;
        Vec central4_parts;  // E[x^3] for the standardized moment
    };

    std::vector<BatchMoments> batch(n_batches);
    long sweeps_done = 0;
    for (int b = 0; b < n_batches; ++b) {
        Vec s1(n, 0.0), s3(n, 0.0), s4(n, 0.0);
        Mat s2(n, n);
        const long count = (b == n_batches - 1) ? measured - sweeps_done : per_batch;
        for (long sw = 0; sw < count; ++sw) {
            sweep_once();
            for (std::size_t l = 0; l < n; ++l) {
                const double x = static_cast<double>(sums[l]);
                s1[l] += x;
                s3[l] += x * x * x;
                s4[l] += x * x * x * x;
                for (std::size_t m2 = 0; m2 < n; ++m2)
                    s2(l, m2) += x * static_cast<double>(sums[m2]);
            }
        }
        sweeps_done += count;
        BatchMoments bm;
        bm.mean.resize(n);
        bm.fourth.resize(n);
        bm.central4_parts.resize(n);
        bm.second = Mat(n, n);
        for (std::size_t l = 0; l < n; ++l) {
            bm.mean[l] = s1[l] / count;
            bm.fourth[l] = s4[l] / count;
            bm.central4_parts[l] = s3[l] / count;
            for (std::size_t m2 = 0; m2 < n; ++m2) bm.second(l, m2) = s2(l, m2) / count;
        }
        batch[b] = std::move(bm);
    }

    MomentReport rep;
    rep.center.assign(n, 0.0);
    rep.exponents.assign(n, 1.0);  // raw sums
    rep.mean.assign(n, 0.0);
    rep.second_about_center.assign(n, 0.0);
    rep.fourth_raw.assign(n, 0.0);
    rep.fourth_standardized.assign(n, 0.0);
    rep.mean_magnetization.assign(n, 0.0);
    rep.covariance = Mat(n, n);
    rep.cross_fourth = Mat(n, n);
    Vec mean_se(n, 0.0);
    Mat cov_se(n, n);

    // batch estimates of derived quantities; the spread across batches gives
    // the standard errors
    std::vector<Mat> batch_cov(n_batches, Mat(n, n));
    for (int b = 0; b < n_batches; ++b)
        for (std::size_t l = 0; l < n; ++l)
            for (std::size_t m2 = 0; m2 < n; ++m2)
                batch_cov[b](l, m2) = batch[b].second(l, m2) - batch[b].mean[l] * batch[b].mean[m2];

    for (std::size_t l = 0; l < n; ++l) {
        double mean_avg = 0.0, fourth_avg = 0.0, third_avg = 0.0, second_avg = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            mean_avg += batch[b].mean[l];
            fourth_avg += batch[b].fourth[l];
            third_avg += batch[b].central4_parts[l];
            second_avg += batch[b].second(l, l);
        }
        mean_avg /= n_batches;
        fourth_avg /= n_batches;
        third_avg /= n_batches;
        second_avg /= n_batches;
        rep.mean[l] = mean_avg;
        rep.second_about_center[l] = second_avg;
        rep.fourth_raw[l] = fourth_avg;
        rep.mean_magnetization[l] = mean_avg / static_cast<double>(p.sizes[l]);
        const double var = second_avg - mean_avg * mean_avg;
        const double central4 = fourth_avg - 4.0 * mean_avg * third_avg +
                                6.0 * mean_avg * mean_avg * second_avg -
                                3.0 * mean_avg * mean_avg * mean_avg * mean_avg;
        rep.fourth_standardized[l] = var > 0.0 ? central4 / (var * var) : 0.0;

        double sd = 0.0;
        for (int b = 0; b < n_batches; ++b) {
            const double diff = batch[b].mean[l] - mean_avg;
            sd += diff * diff;
        }
        mean_se[l] = std::sqrt(sd / (n_batches - 1) / n_batches);
    }
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t m2 = 0; m2 < n; ++m2) {
            double avg = 0.0;
            for (int b = 0; b < n_batches; ++b) avg += batch_cov[b](l, m2);
            avg /= n_batches;
            rep.covariance(l, m2) = avg;
            double sd = 0.0;
            for (int b = 0; b < n_batches; ++b) {
                const double diff = batch_cov[b](l, m2) - avg;
                sd += diff * diff;
            }
            cov_se(l, m2) = std::sqrt(sd / (n_batches - 1) / n_batches);
        }
    rep.mean_se = std::move(mean_se);
    rep.covariance_se = std::move(cov_se);
    return rep;
}

} // namespace mscw
