#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"

namespace spk {

/// SVD of a small s-by-s matrix (s <= 64) by one-sided Jacobi rotations:
/// M = U * diag(sigma) * V^T with sigma sorted descending.
/// One-sided Jacobi orthogonalizes the columns of a working copy G = M*V;
/// at convergence the column norms are the singular values.
struct SvdResult {
    DenseMatrix u;              // s-by-s orthonormal
    std::vector<double> sigma;  // descending, nonnegative
    DenseMatrix v;              // s-by-s orthonormal
};

namespace detail {

/// Fill column j of u with a unit vector orthogonal to columns of u whose
/// index is listed in `fixed`. Used to complete U when sigma_j ~ 0.
inline void complete_orthonormal_column(DenseMatrix& u, std::size_t j,
                                        const std::vector<std::size_t>& fixed) {
    const std::size_t s = u.rows();
    double best_rem = -1.0;
    std::vector<double> best(s, 0.0);
    for (std::size_t e = 0; e < s; ++e) {
        std::vector<double> w(s, 0.0);
        w[e] = 1.0;
        for (std::size_t f : fixed) {
            double dot = 0;
            for (std::size_t i = 0; i < s; ++i) dot += u(i, f) * w[i];
            for (std::size_t i = 0; i < s; ++i) w[i] -= dot * u(i, f);
        }
        double rem = 0;
        for (double x : w) rem += x * x;
        if (rem > best_rem) {
            best_rem = rem;
            best = w;
        }
    }
    const double nrm = std::sqrt(best_rem);
    for (std::size_t i = 0; i < s; ++i) u(i, j) = nrm > 0 ? best[i] / nrm : 0.0;
}

}  // namespace detail

inline SvdResult svd_small(const DenseMatrix& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("svd_small: matrix must be square");
    if (m.rows() > 64) throw std::invalid_argument("svd_small: configured for s <= 64");
    if (!m.all_finite()) throw std::invalid_argument("svd_small: non-finite input");
    const std::size_t s = m.rows();

    DenseMatrix g = m;
    DenseMatrix v = DenseMatrix::identity(s);
    const double eps = 1e-15;
    const int max_sweeps = 60;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < s; ++p)
            for (std::size_t q = p + 1; q < s; ++q) {
                double app = 0, aqq = 0, apq = 0;
                for (std::size_t i = 0; i < s; ++i) {
                    app += g(i, p) * g(i, p);
                    aqq += g(i, q) * g(i, q);
                    apq += g(i, p) * g(i, q);
                }
                if (std::abs(apq) <= eps * std::sqrt(app * aqq)) continue;
                rotated = true;
                // Rutishauser rotation annihilating the (p,q) column product.
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                for (std::size_t i = 0; i < s; ++i) {
                    const double gp = g(i, p), gq = g(i, q);
                    g(i, p) = cs * gp - sn * gq;
                    g(i, q) = sn * gp + cs * gq;
                    const double vp = v(i, p), vq = v(i, q);
                    v(i, p) = cs * vp - sn * vq;
                    v(i, q) = sn * vp + cs * vq;
                }
            }
        if (!rotated) break;
    }

    SvdResult out;
    out.sigma.resize(s);
    out.u = DenseMatrix(s, s);
    out.v = v;

    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> norms(s);
    for (std::size_t j = 0; j < s; ++j) norms[j] = column_norm(g, j);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return norms[a] > norms[b]; });

    const double tiny = 1e-300;
    std::vector<std::size_t> fixed;
    DenseMatrix vo(s, s);
    for (std::size_t jo = 0; jo < s; ++jo) {
        const std::size_t j = order[jo];
        out.sigma[jo] = norms[j];
        for (std::size_t i = 0; i < s; ++i) vo(i, jo) = v(i, j);
        if (norms[j] > tiny) {
            for (std::size_t i = 0; i < s; ++i) out.u(i, jo) = g(i, j) / norms[j];
            fixed.push_back(jo);
        }
    }
    // Zero singular values leave U columns undetermined; complete them.
    for (std::size_t jo = 0; jo < s; ++jo) {
        if (out.sigma[jo] > tiny) continue;
        detail::complete_orthonormal_column(out.u, jo, fixed);
        fixed.push_back(jo);
    }
    out.v = vo;
    return out;
}

}  // namespace spk
