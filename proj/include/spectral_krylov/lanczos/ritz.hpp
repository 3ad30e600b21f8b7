#pragma once

#include <algorithm>
#include <complex>
#include <stdexcept>
#include <vector>

#include "spectral_krylov/eig/eig_dense.hpp"
#include "spectral_krylov/lanczos/block_lanczos.hpp"

namespace spk {

/// Ritz approximations lifted from a Lanczos decomposition: eigenvalues of
/// the projected T_k with their coefficient vectors y, the lifted vectors
/// Z = [V_1..V_k] y (unit 2-norm, first significant component real-positive),
/// true per-pair residuals and the cheap block residual estimate.
struct RitzSet {
    std::vector<std::complex<double>> values;  // wanted, ordering contract
    ComplexMatrix coef_vectors;                // ks-by-w; Z = basis_v * coef
    ComplexMatrix ritz_vectors;                // n-by-w, unit columns
    std::vector<double> per_pair_residuals;    // ||A z_i - mu_i z_i||_2
    double block_residual_estimate = 0;
    std::vector<std::complex<double>> projected_spectrum;  // all ks values
    std::vector<bool> flagged;                 // projected eigenvector stagnated
    std::size_t rejected_spurious = 0;         // screened extraction only
    std::vector<std::complex<double>> rejected_values;
};

/// ||V_{k+1} * C_{k+1} * Ztil||_F where Ztil is the last s rows of the
/// coefficient eigenvector matrix: the Frobenius-norm eigenpair error of the
/// lifted block, computed without touching the operator.
inline double residual_estimate_block(const LanczosDecomposition& dec, const ComplexMatrix& coef) {
    const std::size_t s = dec.block_size(), k = dec.steps_completed;
    if (coef.rows() != k * s) throw std::invalid_argument("residual_estimate_block: coefficient shape mismatch");
    const std::size_t w = coef.cols();
    ComplexMatrix ztil(s, w);
    for (std::size_t i = 0; i < s; ++i)
        for (std::size_t j = 0; j < w; ++j) {
            ztil.re(i, j) = coef.re((k - 1) * s + i, j);
            ztil.im(i, j) = coef.im((k - 1) * s + i, j);
        }
    const DenseMatrix lifted = matmul(dec.v_blocks[k], dec.tridiag.trailing_sub);  // V_{k+1} C_{k+1}
    const double re = frobenius_norm(matmul(lifted, ztil.re));
    const double im = frobenius_norm(matmul(lifted, ztil.im));
    return std::hypot(re, im);
}

/// Eigenvalues of the projected T_k under the library ordering contract.
inline std::vector<std::complex<double>> projected_values(const LanczosDecomposition& dec) {
    if (dec.steps_completed == 0) throw std::invalid_argument("projected_values: empty decomposition");
    return eig_values(dec.tridiag.assemble(false)).values;
}

namespace detail {

/// Lift the coefficient eigenvectors of the given projected values into
/// normalized Ritz pairs, with per-pair residual estimates (no operator
/// applications: the estimate uses the trailing block identity).
struct LiftedPairs {
    std::vector<std::complex<double>> values;
    ComplexMatrix coef;
    ComplexMatrix lifted;
    std::vector<double> estimates;  // ||V_{k+1} C_{k+1} ytil_i|| per unit pair
    std::vector<bool> flagged;
};

inline LiftedPairs lift_pairs(const LanczosDecomposition& dec,
                              const std::vector<std::complex<double>>& values) {
    const std::size_t s = dec.block_size(), k = dec.steps_completed, ks = k * s;
    LiftedPairs out;
    out.values = values;
    const DenseMatrix t = dec.tridiag.assemble(false);
    Spectrum vecs = eig_vectors(t, values);  // dense-eig non-convergence propagates
    out.coef = std::move(*vecs.vectors);
    out.flagged = vecs.flagged;

    const DenseMatrix basis = dec.basis_v();
    out.lifted = ComplexMatrix(basis.rows(), values.size());
    out.lifted.re = matmul(basis, out.coef.re);
    out.lifted.im = matmul(basis, out.coef.im);

    const std::size_t n = basis.rows();
    for (std::size_t c = 0; c < values.size(); ++c) {
        const double nrm = column_norm(out.lifted, c);
        if (nrm == 0) continue;
        std::size_t lead = 0;
        while (lead + 1 < n && std::abs(out.lifted(lead, c)) <= 1e-12 * nrm) ++lead;
        const auto z = out.lifted(lead, c);
        const std::complex<double> rot =
            (std::abs(z) > 0 ? std::conj(z) / std::abs(z) : std::complex<double>(1.0)) / nrm;
        for (std::size_t i = 0; i < n; ++i) out.lifted.set(i, c, out.lifted(i, c) * rot);
        for (std::size_t i = 0; i < ks; ++i) out.coef.set(i, c, out.coef(i, c) * rot);
    }

    // per-pair residual estimate from the trailing identity
    const DenseMatrix tail = matmul(dec.v_blocks[k], dec.tridiag.trailing_sub);
    out.estimates.assign(values.size(), 0.0);
    for (std::size_t c = 0; c < values.size(); ++c) {
        double acc = 0;
        for (std::size_t r = 0; r < tail.rows(); ++r) {
            std::complex<double> dot = 0;
            for (std::size_t i = 0; i < s; ++i)
                dot += tail(r, i) * out.coef((k - 1) * s + i, c);
            acc += std::norm(dot);
        }
        out.estimates[c] = std::sqrt(acc);
    }
    return out;
}

/// True residuals ||A z_i - mu_i z_i||_2 with one operator application per
/// distinct pair (batched; a conjugate shares its mate's residual).
template <class Op>
std::vector<double> true_residuals(const Op& op, const std::vector<std::complex<double>>& values,
                                   const ComplexMatrix& z) {
    const std::size_t n = z.rows(), w = values.size();
    std::vector<double> out(w, -1.0);
    std::vector<std::pair<std::size_t, bool>> layout;  // (index, has_imag)
    for (std::size_t c = 0; c < w; ++c) {
        if (values[c].imag() < 0) {
            bool shared = false;
            for (std::size_t p = 0; p < c; ++p)
                if (values[p] == std::conj(values[c])) {
                    shared = true;
                    break;
                }
            if (shared) continue;
        }
        layout.emplace_back(c, values[c].imag() != 0.0);
    }
    std::size_t total = 0;
    for (const auto& [c, has_im] : layout) total += has_im ? 2 : 1;
    DenseMatrix block(n, total);
    std::size_t col = 0;
    for (const auto& [c, has_im] : layout) {
        for (std::size_t i = 0; i < n; ++i) block(i, col) = z.re(i, c);
        if (has_im)
            for (std::size_t i = 0; i < n; ++i) block(i, col + 1) = z.im(i, c);
        col += has_im ? 2 : 1;
    }
    const DenseMatrix ab = total > 0 ? op.apply(block) : DenseMatrix(n, 0);
    col = 0;
    for (const auto& [c, has_im] : layout) {
        const auto mu = values[c];
        double acc = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const std::complex<double> az(ab(i, col), has_im ? ab(i, col + 1) : 0.0);
            acc += std::norm(az - mu * z(i, c));
        }
        out[c] = std::sqrt(acc);
        col += has_im ? 2 : 1;
    }
    for (std::size_t c = 0; c < w; ++c) {
        if (out[c] >= 0) continue;
        for (std::size_t p = 0; p < c; ++p)
            if (values[p] == std::conj(values[c])) {
                out[c] = out[p];
                break;
            }
        if (out[c] < 0) out[c] = 0;  // unreachable
    }
    return out;
}

inline RitzSet assemble_ritz_set(const LanczosDecomposition& dec, LiftedPairs&& pairs,
                                 std::vector<double>&& residuals,
                                 std::vector<std::complex<double>> projected) {
    RitzSet out;
    out.values = std::move(pairs.values);
    out.coef_vectors = std::move(pairs.coef);
    out.ritz_vectors = std::move(pairs.lifted);
    out.per_pair_residuals = std::move(residuals);
    out.flagged = std::move(pairs.flagged);
    out.projected_spectrum = std::move(projected);
    out.block_residual_estimate = residual_estimate_block(dec, out.coef_vectors);
    return out;
}

}  // namespace detail

/// Extract the s_wanted Ritz pairs of largest real part. One extra operator
/// application per distinct pair evaluates the true residuals; conjugate
/// partners share their mate's residual.
template <class Op>
RitzSet ritz_extract(const LanczosDecomposition& dec, std::size_t s_wanted, const Op& op) {
    const std::size_t s = dec.block_size(), k = dec.steps_completed;
    if (k == 0) throw std::invalid_argument("ritz_extract: decomposition has no completed steps");
    const std::size_t ks = k * s;
    if (s_wanted == 0 || s_wanted > ks) throw std::invalid_argument("ritz_extract: s_wanted out of range");

    std::vector<std::complex<double>> projected = projected_values(dec);
    std::vector<std::complex<double>> wanted(projected.begin(), projected.begin() + s_wanted);
    auto pairs = detail::lift_pairs(dec, wanted);
    auto residuals = detail::true_residuals(op, pairs.values, pairs.lifted);
    return detail::assemble_ritz_set(dec, std::move(pairs), std::move(residuals), std::move(projected));
}

/// Screening knobs for spurious-pair rejection in the restarted driver.
struct ScreeningOptions {
    std::size_t pool_extra = 8;  // candidates examined beyond the wanted count
    double anchor = 1e-2;        // a pair this converged arms the rejection
    double ratio = 100.0;        // reject pairs this much worse than the anchor
    double floor = 1e-2;         // but never cut below this residual level
};

/// Like ritz_extract, but guards the largest-real-part selection against
/// spurious oblique Ritz values. The two-sided projection can place wild
/// values with order-one residuals above the genuine spectrum once the left
/// and right bases nearly decouple (strongly nonnormal problems); those
/// would otherwise poison restart after restart. A candidate with real part
/// above the best-converged pair is skipped when its residual estimate is
/// worse than `cut` while that anchor pair sits below `anchor`. The wanted
/// set is kept conjugate-closed (a boundary pair widens it by one).
template <class Op>
RitzSet screened_ritz_extract(const LanczosDecomposition& dec, std::size_t s_wanted, const Op& op,
                              const ScreeningOptions& opts = {}) {
    const std::size_t s = dec.block_size(), k = dec.steps_completed;
    if (k == 0) throw std::invalid_argument("screened_ritz_extract: no completed steps");
    const std::size_t ks = k * s;
    if (s_wanted == 0 || s_wanted > ks)
        throw std::invalid_argument("screened_ritz_extract: s_wanted out of range");

    std::vector<std::complex<double>> projected = projected_values(dec);

    std::size_t pool_size = std::min(ks, s_wanted + opts.pool_extra);
    for (;;) {
        std::vector<std::complex<double>> pool(projected.begin(), projected.begin() + pool_size);
        auto pairs = detail::lift_pairs(dec, pool);

        // relative estimates, shared across conjugate partners
        std::vector<double> rel(pool_size);
        for (std::size_t i = 0; i < pool_size; ++i)
            rel[i] = pairs.estimates[i] / std::max(1.0, std::abs(pool[i]));
        double best = rel[0];
        std::size_t best_idx = 0;
        for (std::size_t i = 1; i < pool_size; ++i)
            if (rel[i] < best) {
                best = rel[i];
                best_idx = i;
            }
        const bool armed = best <= opts.anchor;
        const double anchor_re = pool[best_idx].real();
        const double cut = std::max(opts.ratio * best, opts.floor);

        std::vector<std::size_t> chosen;
        std::vector<bool> taken(pool_size, false);
        std::vector<std::complex<double>> rejected;
        for (std::size_t i = 0; i < pool_size && chosen.size() < s_wanted; ++i) {
            if (taken[i]) continue;
            const bool spurious = armed && pool[i].real() > anchor_re && rel[i] >= cut;
            if (spurious) {
                rejected.push_back(pool[i]);
                if (pool[i].imag() > 0) {
                    for (std::size_t j = i + 1; j < pool_size; ++j)
                        if (!taken[j] && pool[j] == std::conj(pool[i])) {
                            taken[j] = true;
                            rejected.push_back(pool[j]);
                            break;
                        }
                }
                continue;
            }
            chosen.push_back(i);
            if (pool[i].imag() != 0.0) {
                // keep the wanted set conjugate-closed
                for (std::size_t j = i + 1; j < pool_size; ++j)
                    if (!taken[j] && pool[j] == std::conj(pool[i])) {
                        taken[j] = true;
                        chosen.push_back(j);
                        break;
                    }
            }
        }

        if (chosen.size() < s_wanted && pool_size < ks) {
            pool_size = std::min(ks, pool_size * 2 + s_wanted);
            continue;  // pool too thin after rejections; widen and retry
        }

        std::vector<std::complex<double>> values;
        for (std::size_t i : chosen) values.push_back(pool[i]);
        detail::LiftedPairs sel;
        sel.values = values;
        sel.coef = ComplexMatrix(ks, chosen.size());
        sel.lifted = ComplexMatrix(dec.dim(), chosen.size());
        for (std::size_t c = 0; c < chosen.size(); ++c) {
            sel.flagged.push_back(pairs.flagged[chosen[c]]);
            sel.estimates.push_back(pairs.estimates[chosen[c]]);
            for (std::size_t i = 0; i < ks; ++i) sel.coef.set(i, c, pairs.coef(i, chosen[c]));
            for (std::size_t i = 0; i < dec.dim(); ++i)
                sel.lifted.set(i, c, pairs.lifted(i, chosen[c]));
        }
        auto residuals = detail::true_residuals(op, sel.values, sel.lifted);
        RitzSet out = detail::assemble_ritz_set(dec, std::move(sel), std::move(residuals),
                                                std::move(projected));
        out.rejected_spurious = rejected.size();
        out.rejected_values = std::move(rejected);
        return out;
    }
}

}  // namespace spk
