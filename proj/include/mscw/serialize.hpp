#pragma once

// JSON/CSV round-trips. The model file schema is
//   {"sizes": [...], "J": [[...]], "h": [...]}
// and every emitted document echoes the model and the tool version.

#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mscw/errors.hpp"
#include "mscw/exactdist.hpp"
#include "mscw/glauber.hpp"
#include "mscw/landscape.hpp"
#include "mscw/limits.hpp"
#include "mscw/model.hpp"
#include "mscw/version.hpp"

namespace mscw {

using json = nlohmann::ordered_json;

inline json to_json(const Vec& v) { return json(v); }

inline json to_json(const Mat& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ModelSpec model_from_json(const json& doc) {
    if (!doc.contains("sizes") || !doc.contains("J") || !doc.contains("h"))
        throw ValidationError("model file must contain sizes, J and h");
    ModelSpec spec;
    for (const auto& s : doc.at("sizes")) {
        if (!s.is_number_integer() || s.get<std::int64_t>() < 1)
            throw ValidationError("sizes must be positive integers");
        spec.partition.sizes.push_back(s.get<std::int64_t>());
    }
    const std::size_t n = spec.partition.sizes.size();
    const auto& jm = doc.at("J");
    if (jm.size() != n) throw ValidationError("J must be an n x n array");
    spec.J = Mat(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (jm[r].size() != n) throw ValidationError("J must be an n x n array");
        for (std::size_t c = 0; c < n; ++c) spec.J(r, c) = jm[r][c].get<double>();
    }
    const auto& hv = doc.at("h");
    if (hv.size() != n) throw ValidationError("h must have length n");
    for (const auto& v : hv) spec.h.push_back(v.get<double>());
    return spec;
}

inline ModelSpec load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open model file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw ValidationError("model file is not valid JSON: " + std::string(e.what()));
    }
    return model_from_json(doc);
}

inline json model_echo(const ValidatedModel& m) {
    json doc;
    doc["sizes"] = m.spec.partition.sizes;
    doc["J"] = to_json(m.spec.J);
    doc["h"] = to_json(m.spec.h);
    return doc;
}

inline json to_json(const LimitLaw& law) {
    json doc;
    doc["kind"] = to_string(law.kind);
    doc["exponents"] = to_json(law.exponents);
    if (!law.gaussian_coords.empty()) doc["chi"] = to_json(law.chi);
    if (!law.quartic_exponent.empty()) {
        json terms = json::array();
        for (const auto& t : law.quartic_exponent) {
            json term;
            term["idx"] = {t.idx[0], t.idx[1], t.idx[2], t.idx[3]};
            term["value"] = t.coeff;
            terms.push_back(std::move(term));
        }
        doc["quartic"] = {{"terms", std::move(terms)}};
    }
    if (law.kind == LawKind::Product) {
        doc["gaussian_coords"] = law.gaussian_coords;
        doc["quartic_coords"] = law.quartic_coords;
        json per = json::array();
        for (std::size_t l = 0; l < law.exponents.size(); ++l) {
            json entry;
            entry["coord"] = l;
            if (law.exponents[l] == 0.5) {
                entry["kind"] = "Gaussian";
                entry["variance"] = law.chi(l, l);
            } else {
                entry["kind"] = "Quartic";
                for (const auto& t : law.quartic_exponent)
                    if (t.idx[0] == l) entry["coefficient"] = t.coeff;
            }
            per.push_back(std::move(entry));
        }
        doc["per_coordinate"] = std::move(per);
    }
    return doc;
}

inline json to_json(const CriticalPoint& pt) {
    json doc;
    doc["mu"] = to_json(pt.mu);
    doc["value"] = pt.value;
    doc["grad_norm"] = pt.grad_norm;
    doc["hessian"] = to_json(pt.hessian);
    doc["k"] = to_string(pt.k);
    doc["third_order_norm"] = pt.third_order_norm;
    if (pt.quartic) {
        json terms = json::array();
        const auto folded = detail::quartic_terms(*pt.quartic, [&] {
            std::vector<std::size_t> all(pt.quartic->n);
            for (std::size_t l = 0; l < all.size(); ++l) all[l] = l;
            return all;
        }());
        for (const auto& t : folded) {
            json term;
            term["idx"] = {t.idx[0], t.idx[1], t.idx[2], t.idx[3]};
            term["value"] = t.coeff;
            terms.push_back(std::move(term));
        }
        doc["quartic"] = {{"terms", std::move(terms)}};
    }
    return doc;
}

inline json to_json(const MinimaSet& set) {
    json doc;
    doc["f_min"] = set.f_min;
    if (std::isfinite(set.delta_bar))
        doc["delta_bar"] = set.delta_bar;
    else
        doc["delta_bar"] = nullptr;
    json pts = json::array();
    for (const auto& p : set.points) pts.push_back(to_json(p));
    doc["points"] = std::move(pts);
    return doc;
}

inline json to_json(const MomentReport& rep) {
    json doc;
    doc["center"] = to_json(rep.center);
    doc["exponents"] = to_json(rep.exponents);
    doc["mean"] = to_json(rep.mean);
    doc["mean_magnetization"] = to_json(rep.mean_magnetization);
    doc["covariance"] = to_json(rep.covariance);
    doc["second_about_center"] = to_json(rep.second_about_center);
    doc["fourth_raw"] = to_json(rep.fourth_raw);
    doc["fourth_standardized"] = to_json(rep.fourth_standardized);
    doc["cross_fourth"] = to_json(rep.cross_fourth);
    if (rep.mean_se) doc["mean_standard_error"] = to_json(*rep.mean_se);
    if (rep.covariance_se) doc["covariance_standard_error"] = to_json(*rep.covariance_se);
    return doc;
}

inline json to_json(const Discrepancy& d) {
    json doc;
    doc["covariance_max_abs"] = d.covariance_max_abs;
    doc["covariance_max_rel"] = d.covariance_max_rel;
    doc["fourth_raw_diff"] = to_json(d.fourth_raw_diff);
    doc["fourth_standardized_diff"] = to_json(d.fourth_standardized_diff);
    if (d.tv_distance >= 0.0) doc["tv_distance"] = d.tv_distance;
    return doc;
}

// CSV export: one row per grid cell, columns c_1..c_n, S_1..S_n, probability.
// The optional provenance argument goes into a leading comment line.
inline void write_dist_csv(const FiniteDist& dist, std::ostream& out,
                           const std::string& model_echo_line = "") {
    const std::size_t n = dist.partition.species();
    if (!model_echo_line.empty()) out << "# model " << model_echo_line << "\n";
    for (std::size_t l = 0; l < n; ++l) out << "c" << (l + 1) << ",";
    for (std::size_t l = 0; l < n; ++l) out << "S" << (l + 1) << ",";
    out << "probability\n";
    std::vector<std::int64_t> c(n);
    out.precision(17);
    for (std::size_t cell = 0; cell < dist.cells(); ++cell) {
        const double p = dist.probability(cell);
        if (p == 0.0 && dist.condition) continue;  // outside the ball
        dist.counts(cell, c);
        for (std::size_t l = 0; l < n; ++l) out << c[l] << ",";
        for (std::size_t l = 0; l < n; ++l)
            out << (2 * c[l] - dist.partition.sizes[l]) << ",";
        out << p << "\n";
    }
}

inline json dist_summary_json(const FiniteDist& dist) {
    json doc;
    doc["sizes"] = dist.partition.sizes;
    doc["log_z"] = dist.log_z;
    doc["cells"] = dist.cells();
    if (dist.condition) {
        doc["ball_center"] = to_json(dist.condition->center);
        doc["ball_radius"] = dist.condition->radius;
        doc["boundary_mass"] = dist.boundary_mass;
        doc["boundary_flagged"] = dist.boundary_flagged;
    }
    return doc;
}

} // namespace mscw
