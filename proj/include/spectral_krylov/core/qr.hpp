#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"

namespace spk {

/// Thin QR of an n-by-s block, n >= s, by Householder reflections
/// (Golub & Van Loan, Matrix Computations 4th ed., Alg. 5.2.1).
/// Sign convention: diagonal of R is nonnegative.
struct QrResult {
    DenseMatrix q;        // n-by-s, orthonormal columns
    DenseMatrix r;        // s-by-s, upper triangular, diag >= 0
    double min_diag = 0;  // smallest |r_kk|
    /// Columns with |r_kk| above tol * ||M||_F. Rank deficiency is reported,
    /// not thrown; callers decide what a deficient block means.
    int rank(double tol = 1e-12) const {
        const double scale = frobenius_norm(r);
        int rk = 0;
        for (std::size_t k = 0; k < r.rows(); ++k)
            if (std::abs(r(k, k)) > tol * scale) ++rk;
        return rk;
    }
};

inline QrResult qr_factor(const DenseMatrix& m) {
    const std::size_t n = m.rows(), s = m.cols();
    if (n < s) throw std::invalid_argument("qr_factor: need rows >= cols");
    if (!m.all_finite()) throw std::invalid_argument("qr_factor: non-finite input");

    DenseMatrix a = m;                      // reflectors accumulate in place
    std::vector<std::vector<double>> vs(s); // unit Householder vectors
    for (std::size_t k = 0; k < s; ++k) {
        double norm_x = 0;
        for (std::size_t i = k; i < n; ++i) norm_x = std::hypot(norm_x, a(i, k));
        std::vector<double> v(n - k, 0.0);
        if (norm_x > 0.0) {
            for (std::size_t i = k; i < n; ++i) v[i - k] = a(i, k);
            v[0] += (a(k, k) >= 0 ? norm_x : -norm_x);
            double norm_v = 0;
            for (double x : v) norm_v = std::hypot(norm_v, x);
            if (norm_v > 0.0) {
                for (double& x : v) x /= norm_v;
                for (std::size_t j = k; j < s; ++j) {
                    double dot = 0;
                    for (std::size_t i = k; i < n; ++i) dot += v[i - k] * a(i, j);
                    for (std::size_t i = k; i < n; ++i) a(i, j) -= 2.0 * dot * v[i - k];
                }
            }
        }
        vs[k] = std::move(v);
    }

    QrResult out;
    out.r = DenseMatrix(s, s);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = i; j < s; ++j) out.r(i, j) = a(i, j);

    // Q = H_1 ... H_s * [I_s; 0], applied in reverse order.
    out.q = DenseMatrix(n, s);
    for (std::size_t j = 0; j < s; ++j) out.q(j, j) = 1.0;
    for (std::size_t k = s; k-- > 0;) {
        const auto& v = vs[k];
        for (std::size_t j = 0; j < s; ++j) {
            double dot = 0;
            for (std::size_t i = k; i < n; ++i) dot += v[i - k] * out.q(i, j);
            for (std::size_t i = k; i < n; ++i) out.q(i, j) -= 2.0 * dot * v[i - k];
        }
    }

    // Flip signs so diag(R) >= 0.
    for (std::size_t k = 0; k < s; ++k) {
        if (out.r(k, k) < 0) {
            for (std::size_t j = k; j < s; ++j) out.r(k, j) = -out.r(k, j);
            for (std::size_t i = 0; i < n; ++i) out.q(i, k) = -out.q(i, k);
        }
    }
    out.min_diag = out.r.rows() ? std::abs(out.r(0, 0)) : 0.0;
    for (std::size_t k = 0; k < s; ++k) out.min_diag = std::min(out.min_diag, std::abs(out.r(k, k)));
    return out;
}

}  // namespace spk
