#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"

namespace spk {

/// Partially pivoted LU split of a small s-by-s coefficient block:
/// perm * M = L * Uu with L unit lower triangular and Uu upper triangular.
/// perm[i] is the source row of M placed at position i.
struct LuSplit {
    DenseMatrix l;
    DenseMatrix uu;
    std::vector<std::size_t> perm;
    double min_diag = 0;  // smallest |Uu_kk|
    /// Diagonal entries of Uu above tol * ||M||_F; singular-to-tolerance
    /// factors surface here for the caller's breakdown handling.
    int rank(double tol = 1e-12) const {
        const double scale = frobenius_norm(uu);
        int rk = 0;
        for (std::size_t k = 0; k < uu.rows(); ++k)
            if (std::abs(uu(k, k)) > tol * scale) ++rk;
        return rk;
    }
};

inline LuSplit lu_biorth_split(const DenseMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("lu_biorth_split: matrix must be square");
    if (!m.all_finite()) throw std::invalid_argument("lu_biorth_split: non-finite input");
    const std::size_t s = m.rows();

    DenseMatrix a = m;
    std::vector<std::size_t> perm(s);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = 0; k < s; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < s; ++i)
            if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
        if (piv != k) {
            for (std::size_t j = 0; j < s; ++j) std::swap(a(k, j), a(piv, j));
            std::swap(perm[k], perm[piv]);
        }
        const double d = a(k, k);
        if (d == 0.0) continue;  // exactly singular; multipliers stay zero
        for (std::size_t i = k + 1; i < s; ++i) {
            a(i, k) /= d;
            const double lik = a(i, k);
            for (std::size_t j = k + 1; j < s; ++j) a(i, j) -= lik * a(k, j);
        }
    }

    LuSplit out;
    out.perm = std::move(perm);
    out.l = DenseMatrix::identity(s);
    out.uu = DenseMatrix(s, s);
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < i; ++j) out.l(i, j) = a(i, j);
        for (std::size_t j = i; j < s; ++j) out.uu(i, j) = a(i, j);
    }
    out.min_diag = s ? std::abs(out.uu(0, 0)) : 0.0;
    for (std::size_t k = 0; k < s; ++k) out.min_diag = std::min(out.min_diag, std::abs(out.uu(k, k)));
    return out;
}

/// LU factorization of a general square matrix, for the dense solves behind
/// problem generation and inverse iteration.
struct LuDense {
    DenseMatrix lu;
    std::vector<std::size_t> piv;  // row i of the factor came from piv[i]
    bool singular = false;
};

inline LuDense lu_factor(const DenseMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("lu_factor: matrix must be square");
    const std::size_t n = m.rows();
    LuDense f;
    f.lu = m;
    f.piv.resize(n);
    std::iota(f.piv.begin(), f.piv.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(f.lu(i, k)) > std::abs(f.lu(piv, k))) piv = i;
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(piv, j));
            std::swap(f.piv[k], f.piv[piv]);
        }
        const double d = f.lu(k, k);
        if (d == 0.0) {
            f.singular = true;
            continue;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            f.lu(i, k) /= d;
            const double lik = f.lu(i, k);
            if (lik == 0.0) continue;
            for (std::size_t j = k + 1; j < n; ++j) f.lu(i, j) -= lik * f.lu(k, j);
        }
    }
    return f;
}

/// Solve A * X = B for all columns of B.
inline DenseMatrix lu_solve(const LuDense& f, const DenseMatrix& b) {
    const std::size_t n = f.lu.rows();
    if (b.rows() != n) throw std::invalid_argument("lu_solve: dimension mismatch");
    if (f.singular) throw std::runtime_error("lu_solve: singular factor");
    DenseMatrix x(n, b.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < b.cols(); ++c) x(i, c) = b(f.piv[i], c);
    // forward: L y = P b
    for (std::size_t i = 1; i < n; ++i)
        for (std::size_t k = 0; k < i; ++k) {
            const double lik = f.lu(i, k);
            if (lik == 0.0) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) x(i, c) -= lik * x(k, c);
        }
    // backward: U x = y
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) {
            const double uik = f.lu(i, k);
            if (uik == 0.0) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) x(i, c) -= uik * x(k, c);
        }
        const double d = f.lu(i, i);
        for (std::size_t c = 0; c < b.cols(); ++c) x(i, c) /= d;
    }
    return x;
}

/// Solve A^T * X = B using the factorization of A: with P A = L U this is
/// U^T y = B, L^T z = y, X = P^T z.
inline DenseMatrix lu_solve_transposed(const LuDense& f, const DenseMatrix& b) {
    const std::size_t n = f.lu.rows();
    if (b.rows() != n) throw std::invalid_argument("lu_solve_transposed: dimension mismatch");
    if (f.singular) throw std::runtime_error("lu_solve_transposed: singular factor");
    DenseMatrix z = b;
    // forward: U^T y = B (U^T is lower triangular)
    for (std::size_t i = 0; i < n; ++i) {
        const double d = f.lu(i, i);
        for (std::size_t c = 0; c < b.cols(); ++c) z(i, c) /= d;
        for (std::size_t k = i + 1; k < n; ++k) {
            const double uik = f.lu(i, k);
            if (uik == 0.0) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) z(k, c) -= uik * z(i, c);
        }
    }
    // backward: L^T z = y (L^T is unit upper triangular)
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) {
            const double lki = f.lu(k, i);
            if (lki == 0.0) continue;
            for (std::size_t c = 0; c < b.cols(); ++c) z(i, c) -= lki * z(k, c);
        }
    }
    DenseMatrix x(n, b.cols());
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < b.cols(); ++c) x(f.piv[i], c) = z(i, c);
    return x;
}

inline DenseMatrix lu_inverse(const DenseMatrix& m) {
    return lu_solve(lu_factor(m), DenseMatrix::identity(m.rows()));
}

/// X * R = B with R upper triangular (right division), used by the Lanczos
/// coefficient normalization V_{j+1} = Vhat * Uu^{-1}.
inline DenseMatrix solve_right_upper(const DenseMatrix& b, const DenseMatrix& r) {
    const std::size_t s = r.rows();
    if (r.cols() != s || b.cols() != s) throw std::invalid_argument("solve_right_upper: shape mismatch");
    DenseMatrix x = b;
    for (std::size_t j = 0; j < s; ++j) {
        const double d = r(j, j);
        if (d == 0.0) throw std::runtime_error("solve_right_upper: singular triangular factor");
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double acc = x(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= x(i, k) * r(k, j);
            x(i, j) = acc / d;
        }
    }
    return x;
}

/// X * L^T = B with L lower triangular, i.e. X = B * L^{-T}.
inline DenseMatrix solve_right_lower_transpose(const DenseMatrix& b, const DenseMatrix& l) {
    const std::size_t s = l.rows();
    if (l.cols() != s || b.cols() != s) throw std::invalid_argument("solve_right_lower_transpose: shape mismatch");
    // (L^T) is upper with (L^T)(k,j) = l(j,k)
    DenseMatrix x = b;
    for (std::size_t j = 0; j < s; ++j) {
        const double d = l(j, j);
        if (d == 0.0) throw std::runtime_error("solve_right_lower_transpose: singular triangular factor");
        for (std::size_t i = 0; i < x.rows(); ++i) {
            double acc = x(i, j);
            for (std::size_t k = 0; k < j; ++k) acc -= x(i, k) * l(j, k);
            x(i, j) = acc / d;
        }
    }
    return x;
}

}  // namespace spk
