#pragma once

// Dense matrix/vector kernels shared by every solver in this library.
//
// Storage is column-major so Gram products and masked column sweeps touch
// contiguous memory. Summation order in gram/matvec/masked_matvec is fixed
// (ascending index) so repeated runs are bit-reproducible.

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace antilop {

namespace detail {

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_finite(std::span<const double> values, const std::string& what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(what + ": non-finite entry");
        }
    }
}

}  // namespace detail

/// Fixed-length vector of finite doubles. Entries are validated at
/// construction; callers that mutate entries afterwards keep them finite.
class Vector {
public:
    Vector() = default;

    explicit Vector(std::size_t len, double fill = 0.0) : data_(len, fill) {
        detail::require(std::isfinite(fill), "Vector: non-finite fill value");
    }

    Vector(std::initializer_list<double> values) : data_(values) {
        detail::require_finite(data_, "Vector");
    }

    explicit Vector(std::vector<double> values) : data_(std::move(values)) {
        detail::require_finite(data_, "Vector");
    }

    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double operator[](std::size_t i) const { return data_[i]; }
    double& operator[](std::size_t i) { return data_[i]; }

    const std::vector<double>& data() const noexcept { return data_; }
    std::vector<double>& data() noexcept { return data_; }

    auto begin() const noexcept { return data_.begin(); }
    auto end() const noexcept { return data_.end(); }

private:
    std::vector<double> data_;
};

/// Dense matrix with column-major storage. rows, cols >= 1 and every entry
/// finite at construction.
class DenseMatrix {
public:
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        detail::require(rows >= 1 && cols >= 1, "DenseMatrix: rows and cols must be >= 1");
        detail::require(std::isfinite(fill), "DenseMatrix: non-finite fill value");
    }

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> column_major)
        : rows_(rows), cols_(cols), data_(std::move(column_major)) {
        detail::require(rows >= 1 && cols >= 1, "DenseMatrix: rows and cols must be >= 1");
        detail::require(data_.size() == rows * cols, "DenseMatrix: data length != rows*cols");
        detail::require_finite(data_, "DenseMatrix");
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    /// Row-list constructor, mainly for tests and small fixed problems.
    static DenseMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        detail::require(rows.size() >= 1, "DenseMatrix: rows must be >= 1");
        const std::size_t r = rows.size();
        const std::size_t c = rows.begin()->size();
        DenseMatrix m(r, c, 0.0);
        std::size_t i = 0;
        for (const auto& row : rows) {
            detail::require(row.size() == c, "DenseMatrix: ragged row list");
            std::size_t j = 0;
            for (double v : row) {
                detail::require(std::isfinite(v), "DenseMatrix: non-finite entry");
                m(i, j) = v;
                ++j;
            }
            ++i;
        }
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }

    std::span<const double> column(std::size_t j) const {
        return {data_.data() + j * rows_, rows_};
    }

    const std::vector<double>& data() const noexcept { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Vector helpers.

inline double dot(const Vector& a, const Vector& b) {
    detail::require(a.size() == b.size(), "dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm_sq(const Vector& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += v[i] * v[i];
    return s;
}

inline double norm2(const Vector& v) { return std::sqrt(norm_sq(v)); }

inline double norm_inf(const Vector& v) {
    double m = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Matrix kernels.

/// Gram matrix H = A^T A. H is exactly symmetric: each off-diagonal entry is
/// computed once and written to both triangles.
inline DenseMatrix gram(const DenseMatrix& a) {
    const std::size_t n = a.cols();
    DenseMatrix h(n, n, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        const auto cj = a.column(j);
        for (std::size_t i = 0; i <= j; ++i) {
            const auto ci = a.column(i);
            double s = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) s += ci[k] * cj[k];
            h(i, j) = s;
            h(j, i) = s;
        }
    }
    return h;
}

/// y = M v, accumulated column by column in ascending order. This is the
/// same operation order as masked_matvec with a full mask, so the two agree
/// bitwise.
inline Vector matvec(const DenseMatrix& m, const Vector& v) {
    detail::require(m.cols() == v.size(), "matvec: dimension mismatch");
    Vector y(m.rows());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const double vj = v[j];
        const auto col = m.column(j);
        for (std::size_t i = 0; i < m.rows(); ++i) y[i] += col[i] * vj;
    }
    return y;
}

/// y = M v for v supported on `mask`: only the listed columns are touched,
/// costing exactly rows()*mask.size() scalar multiplies. Mask indices are
/// processed in the order given; pass them ascending to match matvec.
inline Vector masked_matvec(const DenseMatrix& m, const Vector& v,
                            std::span<const std::size_t> mask,
                            std::size_t* multiply_count = nullptr) {
    detail::require(m.cols() == v.size(), "masked_matvec: dimension mismatch");
    Vector y(m.rows());
    for (std::size_t j : mask) {
        if (j >= m.cols()) throw std::out_of_range("masked_matvec: mask index out of range");
        const double vj = v[j];
        const auto col = m.column(j);
        for (std::size_t i = 0; i < m.rows(); ++i) y[i] += col[i] * vj;
    }
    if (multiply_count) *multiply_count += m.rows() * mask.size();
    return y;
}

/// y = M^T v (column dot products, ascending).
inline Vector transpose_matvec(const DenseMatrix& m, const Vector& v) {
    detail::require(m.rows() == v.size(), "transpose_matvec: dimension mismatch");
    Vector y(m.cols());
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const auto col = m.column(j);
        double s = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) s += col[i] * v[i];
        y[j] = s;
    }
    return y;
}

/// Entrywise 2-norm sqrt(sum_ij M_ij^2).
inline double frobenius_norm(const DenseMatrix& m) {
    double s = 0.0;
    for (double v : m.data()) s += v * v;
    return std::sqrt(s);
}

}  // namespace antilop
