#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"
#include "spectral_krylov/core/lu.hpp"
#include "spectral_krylov/core/qr.hpp"
#include "spectral_krylov/core/random.hpp"
#include "spectral_krylov/core/svd.hpp"
#include "spectral_krylov/lanczos/block_tridiagonal.hpp"

namespace spk {

struct BreakdownRecord {
    std::size_t step = 0;
    double sigma_min = 0;  // smallest singular value of What^T Vhat at the stop
};

struct RecoveryRecord {
    std::size_t step = 0;
    double sigma_min = 0;
    int replaced_directions = 0;
};

struct LanczosOptions {
    double breakdown_tol = 1e-10;
    /// Two-sided re-biorthogonalization against every previous block each
    /// step. Off by default; diagnostic runs only.
    bool full_rebiorth = false;
    /// Replace deficient singular directions by seeded random vectors and
    /// continue instead of stopping (adaptive variant only).
    bool adaptive_recovery = true;
    /// Adaptive variant: when the new candidate blocks' duality drift against
    /// the previous basis exceeds this (relative to the block norm), apply one
    /// two-sided Gram-Schmidt sweep before normalizing. sqrt(eps) keeps
    /// semi-biorthogonality; set to infinity to disable maintenance.
    double semi_biorth_drift = 1.49e-8;
    std::uint64_t seed = 0;
};

/// Output of both Lanczos variants: bases V_1..V_{k+1} and W_1..W_{k+1},
/// the projected block tridiagonal, and breakdown/recovery bookkeeping.
struct LanczosDecomposition {
    std::vector<BlockVector> v_blocks;
    std::vector<BlockVector> w_blocks;
    BlockTridiagonal tridiag;
    std::size_t steps_completed = 0;
    std::optional<BreakdownRecord> breakdown;
    std::vector<RecoveryRecord> recoveries;

    std::size_t block_size() const { return tridiag.s; }
    std::size_t dim() const { return v_blocks.empty() ? 0 : v_blocks.front().rows(); }

    /// [V_1 ... V_k] as one n-by-ks matrix (the completed steps only).
    DenseMatrix basis_v() const { return concat(v_blocks); }
    DenseMatrix basis_w() const { return concat(w_blocks); }

private:
    DenseMatrix concat(const std::vector<BlockVector>& blocks) const {
        const std::size_t k = steps_completed, s = tridiag.s, n = dim();
        DenseMatrix out(n, k * s);
        for (std::size_t b = 0; b < k; ++b)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < s; ++j) out(i, b * s + j) = blocks[b](i, j);
        return out;
    }
};

namespace detail {

inline void check_lanczos_preconditions(std::size_t n, const BlockVector& v1, const BlockVector& w1,
                                        std::size_t m) {
    if (v1.rows() != n || w1.rows() != n || v1.cols() != w1.cols())
        throw std::invalid_argument("lanczos: starting block shapes do not match the operator");
    const std::size_t s = v1.cols();
    if (s == 0 || m == 0) throw std::invalid_argument("lanczos: need s >= 1 and m >= 1");
    if (m * s > n) throw std::invalid_argument("lanczos: m*s must not exceed n");
    DenseMatrix g = matmul_tn(w1, v1);
    g -= DenseMatrix::identity(s);
    if (frobenius_norm(g) > 1e-10)
        throw std::invalid_argument("lanczos: starting blocks are not biorthogonal (||W1^T V1 - I|| > 1e-10)");
}

/// One two-sided Gram-Schmidt sweep of the candidate blocks against all
/// previous basis blocks.
inline void rebiorth_sweep(DenseMatrix& vhat, DenseMatrix& what, const std::vector<BlockVector>& v,
                           const std::vector<BlockVector>& w, std::size_t upto) {
    for (std::size_t b = 0; b < upto; ++b) {
        vhat -= matmul(v[b], matmul_tn(w[b], vhat));
        what -= matmul(w[b], matmul_tn(v[b], what));
    }
}

/// Duality drift of the candidates against the previous basis:
/// max_b ||W_b^T Vhat||_F / ||Vhat||_F (and the mirror for What).
inline double duality_drift(const DenseMatrix& vhat, const DenseMatrix& what,
                            const std::vector<BlockVector>& v, const std::vector<BlockVector>& w,
                            std::size_t upto) {
    const double nv = std::max(frobenius_norm(vhat), 1e-300);
    const double nw = std::max(frobenius_norm(what), 1e-300);
    double drift = 0;
    for (std::size_t b = 0; b < upto; ++b) {
        drift = std::max(drift, frobenius_norm(matmul_tn(w[b], vhat)) / nv);
        drift = std::max(drift, frobenius_norm(matmul_tn(v[b], what)) / nw);
    }
    return drift;
}

inline DenseMatrix scale_columns(const DenseMatrix& m, const std::vector<double>& d) {
    DenseMatrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= d[j];
    return out;
}

inline DenseMatrix scale_rows(const DenseMatrix& m, const std::vector<double>& d) {
    DenseMatrix out = m;
    for (std::size_t i = 0; i < out.rows(); ++i)
        for (std::size_t j = 0; j < out.cols(); ++j) out(i, j) *= d[i];
    return out;
}

}  // namespace detail

/// Standard nonsymmetric block Lanczos biorthogonalization.
///
/// The coefficient split of What^T Vhat uses a partially pivoted LU,
/// B_{j+1} = P^T L and C_{j+1} = Uu, so that W_{j+1}^T V_{j+1} = I while
/// A V_j   = V_{j-1} B_j + V_j A_j + V_{j+1} C_{j+1} and
/// A^T W_j = W_{j-1} C_j^T + W_j A_j^T + W_{j+1} B_{j+1}^T
/// hold to roundoff. A split that is singular to `breakdown_tol` (relative
/// to the block's Frobenius norm) stops the iteration early with a
/// breakdown record; the partial decomposition stays valid.
template <class Op>
LanczosDecomposition block_lanczos(const Op& op, const BlockVector& v1, const BlockVector& w1,
                                   std::size_t m, const LanczosOptions& opts = {}) {
    const std::size_t n = op.dim();
    detail::check_lanczos_preconditions(n, v1, w1, m);
    const std::size_t s = v1.cols();

    LanczosDecomposition dec;
    dec.tridiag.s = s;
    dec.v_blocks.push_back(v1);
    dec.w_blocks.push_back(w1);

    DenseMatrix prev_b, prev_c;  // B_j, C_j entering step j
    for (std::size_t j = 1; j <= m; ++j) {
        const BlockVector& vj = dec.v_blocks[j - 1];
        const BlockVector& wj = dec.w_blocks[j - 1];
        DenseMatrix s_block = op.apply(vj);
        DenseMatrix a_j = matmul_tn(wj, s_block);

        DenseMatrix vhat = std::move(s_block);
        vhat -= matmul(vj, a_j);
        DenseMatrix what = op.apply_transpose(wj);
        what -= matmul(wj, a_j.transposed());
        if (j >= 2) {
            vhat -= matmul(dec.v_blocks[j - 2], prev_b);
            what -= matmul(dec.w_blocks[j - 2], prev_c.transposed());
            dec.tridiag.super.push_back(prev_b);
            dec.tridiag.sub.push_back(prev_c);
        }
        dec.tridiag.diag.push_back(a_j);
        if (opts.full_rebiorth) detail::rebiorth_sweep(vhat, what, dec.v_blocks, dec.w_blocks, j);

        DenseMatrix mprod = matmul_tn(what, vhat);
        const double m_scale = frobenius_norm(mprod);
        const double sigma_min = svd_small(mprod).sigma.back();
        dec.steps_completed = j;
        if (sigma_min <= opts.breakdown_tol * std::max(m_scale, 1e-300)) {
            dec.breakdown = BreakdownRecord{j, sigma_min};
            const auto qv = qr_factor(vhat);
            const auto qw = qr_factor(what);
            dec.v_blocks.push_back(qv.q);
            dec.w_blocks.push_back(qw.q);
            dec.tridiag.trailing_sub = qv.r;
            dec.tridiag.trailing_super = qw.r;
            return dec;
        }

        const auto lu = lu_biorth_split(mprod);
        DenseMatrix b_next(s, s);  // B_{j+1} = P^T L
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t c = 0; c < s; ++c) b_next(lu.perm[i], c) = lu.l(i, c);
        const DenseMatrix& c_next = lu.uu;  // C_{j+1}

        DenseMatrix v_next = solve_right_upper(vhat, c_next);
        // W_{j+1} = What * B_{j+1}^{-T}; with B = P^T L this is a triangular
        // solve against L after permuting columns of What.
        DenseMatrix what_p(n, s);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < s; ++c) what_p(i, c) = what(i, lu.perm[c]);
        DenseMatrix w_next = solve_right_lower_transpose(what_p, lu.l);

        dec.v_blocks.push_back(std::move(v_next));
        dec.w_blocks.push_back(std::move(w_next));
        prev_b = b_next;
        prev_c = c_next;
        if (j == m) {
            dec.tridiag.trailing_sub = c_next;
            dec.tridiag.trailing_super = b_next;
        }
    }
    return dec;
}

/// Adaptive block Lanczos: the new blocks are orthonormalized by QR and then
/// rescaled through the SVD of W_{j+1}^T V_{j+1} = P D Q^T,
///   V_{j+1} <- V_{j+1} Q D^{-1/2},  W_{j+1} <- W_{j+1} P D^{-1/2},
/// which restores W_{j+1}^T V_{j+1} = I exactly (up to roundoff) each step.
/// The rescaling is pushed into the coefficients in the orientation that
/// keeps both three-term relations exact at machine precision,
///   C_{j+1} = D^{1/2} Q^T R_V,   B_{j+1} = R_W^T P D^{1/2},
/// and these carried blocks are what the next step's recurrence subtracts
/// and what the assembled T holds. (Recomputing them as fresh inner products
/// gives the same blocks in exact arithmetic but lets the usual gradual loss
/// of biorthogonality leak into the Lanczos relation.)
///
/// When a singular value of W^T V falls below `breakdown_tol` the deficient
/// directions are replaced by seeded random vectors, re-biorthogonalized
/// against all previous blocks, and the step is retried once; failing that,
/// the iteration stops with a breakdown record.
template <class Op>
LanczosDecomposition able(const Op& op, const BlockVector& v1, const BlockVector& w1, std::size_t m,
                          const LanczosOptions& opts = {}) {
    const std::size_t n = op.dim();
    detail::check_lanczos_preconditions(n, v1, w1, m);
    const std::size_t s = v1.cols();

    LanczosDecomposition dec;
    dec.tridiag.s = s;
    dec.v_blocks.push_back(v1);
    dec.w_blocks.push_back(w1);
    Rng recovery_rng(opts.seed ^ 0xab1eab1eab1eab1eULL);

    DenseMatrix prev_b, prev_c;  // carried B_j, C_j entering step j
    for (std::size_t j = 1; j <= m; ++j) {
        const BlockVector& vj = dec.v_blocks[j - 1];
        const BlockVector& wj = dec.w_blocks[j - 1];
        DenseMatrix s_j = op.apply(vj);
        DenseMatrix r_j = op.apply_transpose(wj);
        DenseMatrix a_j = matmul_tn(wj, s_j);

        DenseMatrix stil = s_j;
        stil -= matmul(vj, a_j);
        DenseMatrix rtil = std::move(r_j);
        if (j >= 2) {
            stil -= matmul(dec.v_blocks[j - 2], prev_b);
            rtil -= matmul(dec.w_blocks[j - 2], prev_c.transposed());
            dec.tridiag.super.push_back(prev_b);
            dec.tridiag.sub.push_back(prev_c);
        }
        rtil -= matmul(wj, a_j.transposed());
        dec.tridiag.diag.push_back(a_j);
        if (opts.full_rebiorth) {
            detail::rebiorth_sweep(stil, rtil, dec.v_blocks, dec.w_blocks, j);
        } else if (j >= 2 &&
                   detail::duality_drift(stil, rtil, dec.v_blocks, dec.w_blocks, j) >
                       opts.semi_biorth_drift) {
            // semi-biorthogonality maintenance: sweep only when drift shows
            detail::rebiorth_sweep(stil, rtil, dec.v_blocks, dec.w_blocks, j);
        }

        auto qv = qr_factor(stil);
        auto qw = qr_factor(rtil);

        // Vanishing remainders mean the Krylov space is (numerically)
        // A-invariant: stop, there is nothing left to expand.
        const double s_scale = std::max(frobenius_norm(s_j), 1e-300);
        if (frobenius_norm(stil) <= opts.breakdown_tol * s_scale ||
            frobenius_norm(rtil) <= opts.breakdown_tol * s_scale) {
            dec.breakdown = BreakdownRecord{j, std::min(qv.min_diag, qw.min_diag)};
            dec.steps_completed = j;
            dec.v_blocks.push_back(qv.q);
            dec.w_blocks.push_back(qw.q);
            dec.tridiag.trailing_sub = qv.r;
            dec.tridiag.trailing_super = qw.r;
            return dec;
        }

        DenseMatrix mprod = matmul_tn(qw.q, qv.q);
        SvdResult svd = svd_small(mprod);

        const double stil_norm = frobenius_norm(stil);
        const double rtil_norm = frobenius_norm(rtil);
        auto breakdown_exit = [&](double sigma, bool project_trailing) -> LanczosDecomposition& {
            dec.breakdown = BreakdownRecord{j, sigma};
            dec.steps_completed = j;
            dec.v_blocks.push_back(qv.q);
            dec.w_blocks.push_back(qw.q);
            dec.tridiag.trailing_sub = project_trailing ? matmul_tn(qv.q, stil) : qv.r;
            dec.tridiag.trailing_super =
                project_trailing ? matmul_tn(qw.q, rtil).transposed() : qw.r;
            return dec;
        };
        auto rebuild = [&](DenseMatrix vc, DenseMatrix wc) {
            detail::rebiorth_sweep(vc, wc, dec.v_blocks, dec.w_blocks, j);
            qv = qr_factor(vc);
            qw = qr_factor(wc);
            mprod = matmul_tn(qw.q, qv.q);
            svd = svd_small(mprod);
        };

        bool recovered = false;
        // Rank-deficient remainders: replace the low-content singular
        // directions of Stil and Rtil (left singular vectors via the SVD of
        // the small R factors), each carrying only sigma_i worth of content.
        {
            const SvdResult sv = svd_small(qv.r);
            const SvdResult sw = svd_small(qw.r);
            std::vector<std::size_t> bad_v, bad_w;
            for (std::size_t c = 0; c < s; ++c) {
                if (sv.sigma[c] <= opts.breakdown_tol * stil_norm) bad_v.push_back(c);
                if (sw.sigma[c] <= opts.breakdown_tol * rtil_norm) bad_w.push_back(c);
            }
            if (!bad_v.empty() || !bad_w.empty()) {
                const double measure =
                    std::min(sv.sigma.back() / stil_norm, sw.sigma.back() / rtil_norm);
                if (!opts.adaptive_recovery) return breakdown_exit(measure, false);
                DenseMatrix vc = matmul(qv.q, sv.u);
                DenseMatrix wc = matmul(qw.q, sw.u);
                for (std::size_t c : bad_v)
                    for (std::size_t i = 0; i < n; ++i) vc(i, c) = recovery_rng.normal();
                for (std::size_t c : bad_w)
                    for (std::size_t i = 0; i < n; ++i) wc(i, c) = recovery_rng.normal();
                rebuild(std::move(vc), std::move(wc));
                dec.recoveries.push_back(
                    RecoveryRecord{j, measure, int(std::max(bad_v.size(), bad_w.size()))});
                recovered = true;
            }
        }
        // Left and right ranges nearly orthogonal in some direction: replace
        // the offending singular directions.
        if (svd.sigma.back() < opts.breakdown_tol) {
            if (!opts.adaptive_recovery) return breakdown_exit(svd.sigma.back(), false);
            const double bad_sigma = svd.sigma.back();
            DenseMatrix vrot = matmul(qv.q, svd.v);
            DenseMatrix wrot = matmul(qw.q, svd.u);
            int replaced = 0;
            for (std::size_t c = 0; c < s; ++c) {
                if (svd.sigma[c] >= opts.breakdown_tol) continue;
                for (std::size_t i = 0; i < n; ++i) {
                    vrot(i, c) = recovery_rng.normal();
                    wrot(i, c) = recovery_rng.normal();
                }
                ++replaced;
            }
            rebuild(std::move(vrot), std::move(wrot));
            dec.recoveries.push_back(RecoveryRecord{j, bad_sigma, replaced});
            recovered = true;
            if (svd.sigma.back() < opts.breakdown_tol) return breakdown_exit(svd.sigma.back(), true);
        }

        std::vector<double> d_m12(s), d_12(s);
        for (std::size_t c = 0; c < s; ++c) {
            d_12[c] = std::sqrt(svd.sigma[c]);
            d_m12[c] = 1.0 / d_12[c];
        }
        BlockVector v_next = matmul(qv.q, detail::scale_columns(svd.v, d_m12));
        BlockVector w_next = matmul(qw.q, detail::scale_columns(svd.u, d_m12));
        dec.v_blocks.push_back(std::move(v_next));
        dec.w_blocks.push_back(std::move(w_next));
        dec.steps_completed = j;

        if (!recovered) {
            prev_c = detail::scale_rows(matmul_tn(svd.v, qv.r), d_12);
            prev_b = detail::scale_rows(matmul_tn(svd.u, qw.r), d_12).transposed();
        } else {
            // replaced directions broke the QR coefficients; project instead
            prev_c = matmul_tn(dec.w_blocks[j], stil);
            prev_b = matmul_tn(dec.v_blocks[j], rtil).transposed();
        }
        if (j == m) {
            dec.tridiag.trailing_sub = prev_c;
            dec.tridiag.trailing_super = prev_b;
        }
    }
    return dec;
}

}  // namespace spk
