#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"

namespace spk {

/// Householder reduction to upper Hessenberg form with accumulated
/// transformation: Uacc^T * M * Uacc = H (Golub & Van Loan, Alg. 7.4.2).
struct HessenbergResult {
    DenseMatrix h;
    DenseMatrix uacc;
};

inline HessenbergResult hessenberg(const DenseMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("hessenberg: matrix must be square");
    if (!m.all_finite()) throw std::invalid_argument("hessenberg: non-finite input");
    const std::size_t n = m.rows();
    HessenbergResult out{m, DenseMatrix::identity(n)};
    if (n < 3) return out;

    DenseMatrix& h = out.h;
    DenseMatrix& u = out.uacc;
    std::vector<double> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double below = 0;
        for (std::size_t i = k + 2; i < n; ++i) below = std::hypot(below, h(i, k));
        if (below == 0.0) continue;  // column already in Hessenberg form
        double norm_x = 0;
        for (std::size_t i = k + 1; i < n; ++i) norm_x = std::hypot(norm_x, h(i, k));
        if (norm_x == 0.0) continue;
        for (std::size_t i = k + 1; i < n; ++i) v[i] = h(i, k);
        v[k + 1] += (h(k + 1, k) >= 0 ? norm_x : -norm_x);
        double norm_v = 0;
        for (std::size_t i = k + 1; i < n; ++i) norm_v = std::hypot(norm_v, v[i]);
        if (norm_v == 0.0) continue;
        for (std::size_t i = k + 1; i < n; ++i) v[i] /= norm_v;

        // H <- P H P with P = I - 2 v v^T (rows then columns)
        for (std::size_t j = 0; j < n; ++j) {
            double dot = 0;
            for (std::size_t i = k + 1; i < n; ++i) dot += v[i] * h(i, j);
            for (std::size_t i = k + 1; i < n; ++i) h(i, j) -= 2.0 * dot * v[i];
        }
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0;
            for (std::size_t j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
            for (std::size_t j = k + 1; j < n; ++j) h(i, j) -= 2.0 * dot * v[j];
        }
        // Uacc <- Uacc P
        for (std::size_t i = 0; i < n; ++i) {
            double dot = 0;
            for (std::size_t j = k + 1; j < n; ++j) dot += u(i, j) * v[j];
            for (std::size_t j = k + 1; j < n; ++j) u(i, j) -= 2.0 * dot * v[j];
        }
        for (std::size_t i = k + 2; i < n; ++i) h(i, k) = 0.0;
    }
    return out;
}

}  // namespace spk
