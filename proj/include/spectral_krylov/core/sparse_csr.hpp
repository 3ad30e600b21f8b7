#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"

namespace spk {

/// Compressed sparse row storage. The only sparse format in the library;
/// symmetric matrices are stored fully so the matvec kernels stay uniform.
struct SparseCSR {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_offsets;  // rows+1, monotone
    std::vector<std::size_t> col_indices;  // strictly increasing within a row
    std::vector<double> values;

    std::size_t nnz() const { return values.size(); }

    void validate() const {
        if (row_offsets.size() != rows + 1)
            throw std::invalid_argument("SparseCSR: row_offsets length must be rows+1");
        if (row_offsets.front() != 0 || row_offsets.back() != values.size())
            throw std::invalid_argument("SparseCSR: row_offsets endpoints inconsistent");
        if (col_indices.size() != values.size())
            throw std::invalid_argument("SparseCSR: col_indices/values length mismatch");
        for (std::size_t i = 0; i < rows; ++i) {
            if (row_offsets[i] > row_offsets[i + 1])
                throw std::invalid_argument("SparseCSR: row_offsets not monotone");
            for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
                if (col_indices[k] >= cols)
                    throw std::invalid_argument("SparseCSR: column index out of range");
                if (k > row_offsets[i] && col_indices[k] <= col_indices[k - 1])
                    throw std::invalid_argument("SparseCSR: column indices not strictly increasing");
                if (!std::isfinite(values[k]))
                    throw std::invalid_argument("SparseCSR: non-finite value");
            }
        }
    }

    /// Build from unordered (row, col, value) triplets. Duplicate positions are
    /// rejected rather than summed.
    static SparseCSR from_triplets(std::size_t rows, std::size_t cols,
                                   std::vector<std::tuple<std::size_t, std::size_t, double>> trip) {
        std::sort(trip.begin(), trip.end(), [](const auto& a, const auto& b) {
            return std::get<0>(a) != std::get<0>(b) ? std::get<0>(a) < std::get<0>(b)
                                                    : std::get<1>(a) < std::get<1>(b);
        });
        SparseCSR m;
        m.rows = rows;
        m.cols = cols;
        m.row_offsets.assign(rows + 1, 0);
        m.col_indices.reserve(trip.size());
        m.values.reserve(trip.size());
        for (std::size_t k = 0; k < trip.size(); ++k) {
            auto [i, j, v] = trip[k];
            if (i >= rows || j >= cols) throw std::out_of_range("SparseCSR: triplet index out of range");
            if (k > 0 && std::get<0>(trip[k - 1]) == i && std::get<1>(trip[k - 1]) == j)
                throw std::invalid_argument("SparseCSR: duplicate entry");
            m.row_offsets[i + 1]++;
            m.col_indices.push_back(j);
            m.values.push_back(v);
        }
        for (std::size_t i = 0; i < rows; ++i) m.row_offsets[i + 1] += m.row_offsets[i];
        return m;
    }

    DenseMatrix to_dense() const {
        DenseMatrix d(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k)
                d(i, col_indices[k]) = values[k];
        return d;
    }

    /// Y = A * X for a block X with cols(X) columns.
    DenseMatrix apply(const DenseMatrix& x) const {
        if (x.rows() != cols) throw std::invalid_argument("SparseCSR::apply: dimension mismatch");
        DenseMatrix y(rows, x.cols());
        for (std::size_t i = 0; i < rows; ++i) {
            double* yi = y.row_ptr(i);
            for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
                const double v = values[k];
                const double* xr = x.row_ptr(col_indices[k]);
                for (std::size_t c = 0; c < x.cols(); ++c) yi[c] += v * xr[c];
            }
        }
        return y;
    }

    /// Y = A^T * X via a column scatter over the stored rows.
    DenseMatrix apply_transpose(const DenseMatrix& x) const {
        if (x.rows() != rows) throw std::invalid_argument("SparseCSR::apply_transpose: dimension mismatch");
        DenseMatrix y(cols, x.cols());
        for (std::size_t i = 0; i < rows; ++i) {
            const double* xi = x.row_ptr(i);
            for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
                const double v = values[k];
                double* yr = y.row_ptr(col_indices[k]);
                for (std::size_t c = 0; c < x.cols(); ++c) yr[c] += v * xi[c];
            }
        }
        return y;
    }
};

inline double frobenius_norm(const SparseCSR& m) {
    double sum = 0.0, comp = 0.0;
    for (double v : m.values) {
        const double term = v * v - comp;
        const double t = sum + term;
        comp = (t - sum) - term;
        sum = t;
    }
    return std::sqrt(sum);
}

/// Sparse Kronecker product, same index convention as the dense kron.
inline SparseCSR kron(const SparseCSR& a, const SparseCSR& b) {
    SparseCSR c;
    c.rows = a.rows * b.rows;
    c.cols = a.cols * b.cols;
    c.row_offsets.assign(c.rows + 1, 0);
    c.col_indices.reserve(a.nnz() * b.nnz());
    c.values.reserve(a.nnz() * b.nnz());
    for (std::size_t ia = 0; ia < a.rows; ++ia)
        for (std::size_t ib = 0; ib < b.rows; ++ib) {
            const std::size_t row = ia * b.rows + ib;
            for (std::size_t ka = a.row_offsets[ia]; ka < a.row_offsets[ia + 1]; ++ka)
                for (std::size_t kb = b.row_offsets[ib]; kb < b.row_offsets[ib + 1]; ++kb) {
                    c.col_indices.push_back(a.col_indices[ka] * b.cols + b.col_indices[kb]);
                    c.values.push_back(a.values[ka] * b.values[kb]);
                }
            c.row_offsets[row + 1] = c.col_indices.size();
        }
    return c;
}

/// C = A + B (entrywise union of patterns).
inline SparseCSR add(const SparseCSR& a, const SparseCSR& b) {
    if (a.rows != b.rows || a.cols != b.cols) throw std::invalid_argument("SparseCSR add: shape mismatch");
    SparseCSR c;
    c.rows = a.rows;
    c.cols = a.cols;
    c.row_offsets.assign(c.rows + 1, 0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        std::size_t ka = a.row_offsets[i], kb = b.row_offsets[i];
        while (ka < a.row_offsets[i + 1] || kb < b.row_offsets[i + 1]) {
            std::size_t ja = ka < a.row_offsets[i + 1] ? a.col_indices[ka] : a.cols;
            std::size_t jb = kb < b.row_offsets[i + 1] ? b.col_indices[kb] : b.cols;
            if (ja == jb) {
                c.col_indices.push_back(ja);
                c.values.push_back(a.values[ka++] + b.values[kb++]);
            } else if (ja < jb) {
                c.col_indices.push_back(ja);
                c.values.push_back(a.values[ka++]);
            } else {
                c.col_indices.push_back(jb);
                c.values.push_back(b.values[kb++]);
            }
        }
        c.row_offsets[i + 1] = c.col_indices.size();
    }
    return c;
}

}  // namespace spk
