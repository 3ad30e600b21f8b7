#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spectral_krylov/core/linear_operator.hpp"
#include "spectral_krylov/core/lu.hpp"
#include "spectral_krylov/core/random.hpp"
#include "spectral_krylov/eig/eig_dense.hpp"
#include "spectral_krylov/eig/francis.hpp"

namespace spk {

/// A generated test problem: the operator, its exact spectrum when the
/// construction provides one, and the seed actually used (regeneration under
/// the conditioning guard may advance it).
struct GeneratedProblem {
    LinearOperator op;
    std::optional<Spectrum> exact_spectrum;
    std::string description;
    std::uint64_t seed_used = 0;
};

namespace detail {

/// Condition estimate of Q via a few power iterations on Q^T Q (largest
/// singular value) and inverse iterations through an LU of Q (smallest).
inline double condition_estimate(const DenseMatrix& q, const LuDense& lu, Rng& rng) {
    const std::size_t n = q.rows();
    DenseMatrix x = gaussian_block(n, 1, rng);
    double smax2 = 0;
    for (int it = 0; it < 12; ++it) {
        x = matmul_tn(q, matmul(q, x));
        smax2 = frobenius_norm(x);
        if (smax2 == 0) return std::numeric_limits<double>::infinity();
        x.scale(1.0 / smax2);
    }
    DenseMatrix y = gaussian_block(n, 1, rng);
    double smin2_inv = 0;
    for (int it = 0; it < 12; ++it) {
        // y <- (Q^T Q)^{-1} y = Q^{-1} Q^{-T} y
        DenseMatrix t = lu_solve_transposed(lu, y);
        y = lu_solve(lu, t);
        smin2_inv = frobenius_norm(y);
        if (smin2_inv == 0) break;
        y.scale(1.0 / smin2_inv);
    }
    if (smin2_inv == 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(smax2 * smin2_inv);
}

}  // namespace detail

/// Dense diagonalizable matrix A = Q D Q^{-1} with eigenvalues evenly spaced
/// from lambda_max down to lambda_min and a seeded standard-normal Q. Q is
/// regenerated with seed+1, seed+2, ... while its condition estimate exceeds
/// 1e8; the seed finally used is recorded.
inline GeneratedProblem gen_spaced_diagonalizable(std::size_t n, double lambda_max, double lambda_min,
                                                  std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("gen_spaced_diagonalizable: n must be >= 1");
    if (n > 4000) throw std::invalid_argument("gen_spaced_diagonalizable: n exceeds the dense budget");
    if (n >= 2 && !(lambda_max > lambda_min))
        throw std::invalid_argument("gen_spaced_diagonalizable: need lambda_max > lambda_min");

    Spectrum exact;
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag[i] = (n == 1) ? lambda_max
                           : lambda_max - (lambda_max - lambda_min) * double(i) / double(n - 1);
        exact.values.emplace_back(diag[i], 0.0);
    }

    if (n == 1) {
        DenseMatrix a(1, 1);
        a(0, 0) = lambda_max;
        return GeneratedProblem{LinearOperator::from_dense(a), exact, "spaced:n=1", seed};
    }

    std::uint64_t use_seed = seed;
    for (;; ++use_seed) {
        Rng rng(use_seed);
        DenseMatrix q = gaussian_block(n, n, rng);
        LuDense lu = lu_factor(q);
        if (lu.singular) continue;
        Rng cond_rng(use_seed ^ 0xc0de5eedc0de5eedULL);
        if (detail::condition_estimate(q, lu, cond_rng) > 1e8) continue;

        DenseMatrix qd = q;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) qd(i, j) *= diag[j];
        const DenseMatrix qinv = lu_solve(lu, DenseMatrix::identity(n));
        DenseMatrix a = matmul(qd, qinv);

        // eigenvectors are the columns of Q (A Q e_i = d_i Q e_i)
        exact.vectors = ComplexMatrix(n, n);
        exact.vectors->re = q;
        exact.vector_residuals.assign(n, 0.0);
        exact.flagged.assign(n, false);

        GeneratedProblem p{LinearOperator::from_dense(std::move(a)), std::move(exact), "", use_seed};
        p.description = "spaced diagonalizable n=" + std::to_string(n);
        return p;
    }
}

/// 2D Laplacian 5-point stencil on an N-by-N interior grid with Dirichlet
/// boundary: diagonal 4, neighbor entries -1, CSR storage, exactly symmetric.
/// The scaled variant multiplies by 1/h^2, h = 1/(N+1). The unscaled stencil
/// is the default; its top eigenvalues sit just below 8.
inline GeneratedProblem gen_laplacian2d(std::size_t n_grid, bool scaled = false) {
    if (n_grid == 0) throw std::invalid_argument("gen_laplacian2d: N must be >= 1");
    const std::size_t n = n_grid * n_grid;
    const double factor = scaled ? double((n_grid + 1) * (n_grid + 1)) : 1.0;

    SparseCSR a;
    a.rows = a.cols = n;
    a.row_offsets.assign(n + 1, 0);
    a.col_indices.reserve(5 * n);
    a.values.reserve(5 * n);
    for (std::size_t i = 0; i < n_grid; ++i)
        for (std::size_t j = 0; j < n_grid; ++j) {
            const std::size_t row = i * n_grid + j;
            auto push = [&](std::size_t col, double v) {
                a.col_indices.push_back(col);
                a.values.push_back(v * factor);
            };
            if (i > 0) push(row - n_grid, -1.0);
            if (j > 0) push(row - 1, -1.0);
            push(row, 4.0);
            if (j + 1 < n_grid) push(row + 1, -1.0);
            if (i + 1 < n_grid) push(row + n_grid, -1.0);
            a.row_offsets[row + 1] = a.col_indices.size();
        }

    Spectrum exact;
    exact.values.reserve(n);
    for (std::size_t i = 1; i <= n_grid; ++i)
        for (std::size_t j = 1; j <= n_grid; ++j) {
            const double lam = 4.0 - 2.0 * std::cos(double(i) * M_PI / double(n_grid + 1)) -
                               2.0 * std::cos(double(j) * M_PI / double(n_grid + 1));
            exact.values.emplace_back(lam * factor, 0.0);
        }
    sort_spectrum(exact.values);

    GeneratedProblem p{LinearOperator::from_csr(std::move(a)), std::move(exact), "", 0};
    p.description = "laplacian2d N=" + std::to_string(n_grid) + (scaled ? " scaled" : "");
    return p;
}

/// The `count` largest eigenvalues of the N-by-N 2D Laplacian stencil,
/// descending: lambda_{i,j} = 4 - 2 cos(i pi/(N+1)) - 2 cos(j pi/(N+1)).
/// Symmetric index pairs appear with multiplicity two.
inline std::vector<double> laplacian_exact_eigs(std::size_t n_grid, std::size_t count) {
    const std::size_t n = n_grid * n_grid;
    if (count < 1 || count > n) throw std::invalid_argument("laplacian_exact_eigs: count out of range");
    std::vector<double> all;
    all.reserve(n);
    for (std::size_t i = 1; i <= n_grid; ++i)
        for (std::size_t j = 1; j <= n_grid; ++j)
            all.push_back(4.0 - 2.0 * std::cos(double(i) * M_PI / double(n_grid + 1)) -
                          2.0 * std::cos(double(j) * M_PI / double(n_grid + 1)));
    std::sort(all.rbegin(), all.rend());
    all.resize(count);
    return all;
}

}  // namespace spk
