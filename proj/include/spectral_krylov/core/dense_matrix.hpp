#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace spk {

/// Row-major dense matrix of doubles. The workhorse container for square
/// matrices, n-by-s block vectors and small s-by-s coefficient blocks alike.
class DenseMatrix {
public:
    DenseMatrix() = default;

    DenseMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
        : rows_(rows), cols_(cols), data_(std::move(entries)) {
        if (data_.size() != rows_ * cols_)
            throw std::invalid_argument("DenseMatrix: entry count does not match dimensions");
    }

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row_ptr(std::size_t i) { return data_.data() + i * cols_; }
    const double* row_ptr(std::size_t i) const { return data_.data() + i * cols_; }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool all_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    DenseMatrix transposed() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    /// Columns [c0, c1) as a new matrix.
    DenseMatrix columns(std::size_t c0, std::size_t c1) const {
        DenseMatrix out(rows_, c1 - c0);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = c0; j < c1; ++j) out(i, j - c0) = (*this)(i, j);
        return out;
    }

    void scale(double a) {
        for (double& v : data_) v *= a;
    }

    DenseMatrix& operator+=(const DenseMatrix& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }

    DenseMatrix& operator-=(const DenseMatrix& o) {
        check_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }

    friend DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
    friend DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }

    friend DenseMatrix operator*(double a, DenseMatrix m) {
        m.scale(a);
        return m;
    }

private:
    void check_same_shape(const DenseMatrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("DenseMatrix: shape mismatch");
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// A block of s column vectors of length n is stored as an n-by-s matrix.
using BlockVector = DenseMatrix;

/// C = A * B
inline DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows()) throw std::invalid_argument("matmul: inner dimension mismatch");
    DenseMatrix c(a.rows(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t i = 0; i < n; ++i) {
        double* ci = c.row_ptr(i);
        for (std::size_t p = 0; p < k; ++p) {
            const double aip = a(i, p);
            if (aip == 0.0) continue;
            const double* bp = b.row_ptr(p);
            for (std::size_t j = 0; j < m; ++j) ci[j] += aip * bp[j];
        }
    }
    return c;
}

/// C = A^T * B
inline DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("matmul_tn: dimension mismatch");
    DenseMatrix c(a.cols(), b.cols());
    const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
    for (std::size_t p = 0; p < n; ++p) {
        const double* ap = a.row_ptr(p);
        const double* bp = b.row_ptr(p);
        for (std::size_t i = 0; i < k; ++i) {
            const double api = ap[i];
            if (api == 0.0) continue;
            double* ci = c.row_ptr(i);
            for (std::size_t j = 0; j < m; ++j) ci[j] += api * bp[j];
        }
    }
    return c;
}

/// C = A * B^T
inline DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("matmul_nt: dimension mismatch");
    DenseMatrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            const double* ai = a.row_ptr(i);
            const double* bj = b.row_ptr(j);
            for (std::size_t p = 0; p < a.cols(); ++p) s += ai[p] * bj[p];
            c(i, j) = s;
        }
    return c;
}

/// Frobenius norm with compensated (Kahan) accumulation so the invariant
/// tolerances stay meaningful at n ~ 1e4 entries.
inline double frobenius_norm(const DenseMatrix& m) {
    double sum = 0.0, comp = 0.0;
    for (double v : m.values()) {
        const double term = v * v - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return std::sqrt(sum);
}

inline double max_abs(const DenseMatrix& m) {
    double r = 0.0;
    for (double v : m.values()) r = std::max(r, std::abs(v));
    return r;
}

inline double column_norm(const DenseMatrix& m, std::size_t j) {
    double sum = 0.0, comp = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double v = m(i, j);
        const double term = v * v - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return std::sqrt(sum);
}

/// Kronecker product: (A kron B)[i*r+k, j*t+l] = A[i,j] * B[k,l].
inline DenseMatrix kron(const DenseMatrix& a, const DenseMatrix& b) {
    const std::size_t p = a.rows(), q = a.cols(), r = b.rows(), t = b.cols();
    if (p * r == 0 || q * t == 0) throw std::invalid_argument("kron: empty operand");
    if (p > 0 && r > (std::size_t(1) << 26) / p) throw std::length_error("kron: dimension product overflow");
    if (q > 0 && t > (std::size_t(1) << 26) / q) throw std::length_error("kron: dimension product overflow");
    DenseMatrix c(p * r, q * t);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < q; ++j) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            for (std::size_t k = 0; k < r; ++k)
                for (std::size_t l = 0; l < t; ++l) c(i * r + k, j * t + l) = aij * b(k, l);
        }
    return c;
}

}  // namespace spk
