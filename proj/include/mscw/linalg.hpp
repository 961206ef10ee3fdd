#pragma once

// Small dense matrices for the species-index space (n is the number of
// species, a handful at most). Cyclic Jacobi for symmetric eigenproblems,
// partial-pivot LU for solves/inverses.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "mscw/errors.hpp"

namespace mscw {

using Vec = std::vector<double>;

class Mat {
public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    const std::vector<double>& data() const { return data_; }

    Mat transposed() const {
        Mat t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    Vec operator*(const Vec& v) const {
        Vec out(rows_, 0.0);
        for (std::size_t r = 0; r < rows_; ++r) {
            double acc = 0.0;
            for (std::size_t c = 0; c < cols_; ++c) acc += (*this)(r, c) * v[c];
            out[r] = acc;
        }
        return out;
    }

    Mat operator*(const Mat& o) const {
        Mat out(rows_, o.cols_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t k = 0; k < cols_; ++k) {
                const double a = (*this)(r, k);
                if (a == 0.0) continue;
                for (std::size_t c = 0; c < o.cols_; ++c) out(r, c) += a * o(k, c);
            }
        return out;
    }

    Mat operator-(const Mat& o) const {
        Mat out = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] -= o.data_[i];
        return out;
    }

    Mat operator+(const Mat& o) const {
        Mat out = *this;
        for (std::size_t i = 0; i < data_.size(); ++i) out.data_[i] += o.data_[i];
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : data_) m = std::max(m, std::fabs(v));
        return m;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

inline Mat diag(const Vec& d) {
    Mat m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

inline Mat symmetrized(const Mat& a) {
    Mat s(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) s(r, c) = 0.5 * (a(r, c) + a(c, r));
    return s;
}

struct EigenSym {
    Vec values;   // ascending
    Mat vectors;  // column k pairs with values[k]; orthonormal
};

// Cyclic Jacobi. Robust for the tiny symmetric matrices used here.
inline EigenSym eigen_sym(Mat a, int max_sweeps = 100) {
    const std::size_t n = a.rows();
    Mat v = Mat::identity(n);
    if (n == 1) return {Vec{a(0, 0)}, v};

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (off <= 1e-300) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::fabs(apq) <= 1e-280) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = app - t * apq;
                a(q, q) = aqq + t * apq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    if (k == p || k == q) continue;
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = akp - s * (akq + tau * akp);
                    a(p, k) = a(k, p);
                    a(k, q) = akq + s * (akp - tau * akq);
                    a(q, k) = a(k, q);
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = vkp - s * (vkq + tau * vkp);
                    v(k, q) = vkq + s * (vkp - tau * vkq);
                }
            }
        }
    }

    // sort ascending, carrying columns
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });
    EigenSym out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t r = 0; r < n; ++r) out.vectors(r, k) = v(r, order[k]);
    }
    return out;
}

// LU with partial pivoting; throws DegeneracyError on a (near-)singular pivot.
class Lu {
public:
    explicit Lu(Mat a) : lu_(std::move(a)), piv_(lu_.rows()) {
        const std::size_t n = lu_.rows();
        double scale = lu_.max_abs();
        if (scale == 0.0) scale = 1.0;
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t pivot = col;
            double best = std::fabs(lu_(col, col));
            for (std::size_t r = col + 1; r < n; ++r) {
                const double v = std::fabs(lu_(r, col));
                if (v > best) { best = v; pivot = r; }
            }
            if (best <= 1e-13 * scale)
                throw DegeneracyError("singular matrix in linear solve");
            piv_[col] = pivot;
            if (pivot != col)
                for (std::size_t c = 0; c < n; ++c) std::swap(lu_(col, c), lu_(pivot, c));
            for (std::size_t r = col + 1; r < n; ++r) {
                lu_(r, col) /= lu_(col, col);
                const double f = lu_(r, col);
                if (f == 0.0) continue;
                for (std::size_t c = col + 1; c < n; ++c) lu_(r, c) -= f * lu_(col, c);
            }
        }
    }

    Vec solve(Vec b) const {
        const std::size_t n = lu_.rows();
        for (std::size_t i = 0; i < n; ++i)
            if (piv_[i] != i) std::swap(b[i], b[piv_[i]]);
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t j = 0; j < i; ++j) b[i] -= lu_(i, j) * b[j];
        for (std::size_t ii = n; ii-- > 0;) {
            for (std::size_t j = ii + 1; j < n; ++j) b[ii] -= lu_(ii, j) * b[j];
            b[ii] /= lu_(ii, ii);
        }
        return b;
    }

    Mat solve(const Mat& b) const {
        Mat out(b.rows(), b.cols());
        for (std::size_t c = 0; c < b.cols(); ++c) {
            Vec col(b.rows());
            for (std::size_t r = 0; r < b.rows(); ++r) col[r] = b(r, c);
            col = solve(std::move(col));
            for (std::size_t r = 0; r < b.rows(); ++r) out(r, c) = col[r];
        }
        return out;
    }

private:
    Mat lu_;
    std::vector<std::size_t> piv_;
};

inline Vec solve(const Mat& a, Vec b) { return Lu(a).solve(std::move(b)); }
inline Mat inverse(const Mat& a) { return Lu(a).solve(Mat::identity(a.rows())); }

inline double norm_inf(const Vec& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::fabs(x));
    return m;
}

inline double norm2(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace mscw
