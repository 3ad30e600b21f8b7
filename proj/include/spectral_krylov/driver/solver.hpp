#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include "spectral_krylov/chebyshev/filter.hpp"
#include "spectral_krylov/core/linear_operator.hpp"
#include "spectral_krylov/core/qr.hpp"
#include "spectral_krylov/core/random.hpp"
#include "spectral_krylov/driver/config.hpp"
#include "spectral_krylov/lanczos/block_lanczos.hpp"
#include "spectral_krylov/lanczos/ritz.hpp"
#include "spectral_krylov/util/log.hpp"

namespace spk {

/// Seeded biorthogonal starting pair: V1 = W1 = Q from the QR of a
/// standard-normal block, so W1^T V1 = I to roundoff.
inline std::pair<BlockVector, BlockVector> initial_blocks(std::size_t n, std::size_t s,
                                                          std::uint64_t seed) {
    if (s > n) throw std::invalid_argument("initial_blocks: s must not exceed n");
    Rng rng(seed);
    BlockVector q = qr_factor(gaussian_block(n, s, rng)).q;
    return {q, q};
}

/// Stopping rule: converged iff max_i ||A z_i - mu_i z_i||_2 / max(1, |mu_i|)
/// is at or below tol. Returns that maximum alongside the flag.
inline std::pair<bool, double> check_convergence(const RitzSet& ritz, double tol) {
    double worst = 0;
    for (std::size_t i = 0; i < ritz.values.size(); ++i) {
        const double scale = std::max(1.0, std::abs(ritz.values[i]));
        worst = std::max(worst, ritz.per_pair_residuals[i] / scale);
    }
    return {worst <= tol, worst};
}

namespace detail {

/// Forwarding operator that counts applications in columns, per phase.
class CountingOperator {
public:
    enum class Phase { lanczos, chebyshev, residual };

    explicit CountingOperator(const LinearOperator& op) : op_(&op) {}

    std::size_t dim() const { return op_->dim(); }

    DenseMatrix apply(const DenseMatrix& x) const {
        bump(x.cols(), true);
        return op_->apply(x);
    }
    DenseMatrix apply_transpose(const DenseMatrix& x) const {
        bump(x.cols(), false);
        return op_->apply_transpose(x);
    }

    void set_phase(Phase p) { phase_ = p; }
    long long a_cols() const { return a_cols_; }
    long long at_cols() const { return at_cols_; }
    long long phase_cols(Phase p) const { return phase_cols_[int(p)]; }

private:
    void bump(std::size_t cols, bool forward) const {
        (forward ? a_cols_ : at_cols_) += cols;
        phase_cols_[int(phase_)] += cols;
    }

    const LinearOperator* op_;
    Phase phase_ = Phase::lanczos;
    mutable long long a_cols_ = 0;
    mutable long long at_cols_ = 0;
    mutable long long phase_cols_[3] = {0, 0, 0};
};

/// Real restart block from the wanted Ritz vectors: a real eigenvalue
/// contributes its (real) vector, a conjugate pair contributes the real and
/// imaginary parts of its upper member. The extraction width is already
/// conjugate-closed, so the block comes out exactly as wide.
inline BlockVector real_restart_block(const RitzSet& ritz) {
    const std::size_t n = ritz.ritz_vectors.rows();
    const std::size_t w = ritz.values.size();
    BlockVector block(n, w);
    std::vector<bool> consumed(w, false);
    std::size_t col = 0;
    for (std::size_t i = 0; i < w; ++i) {
        if (consumed[i]) continue;
        if (ritz.values[i].imag() == 0.0) {
            for (std::size_t r = 0; r < n; ++r) block(r, col) = ritz.ritz_vectors.re(r, i);
            ++col;
            continue;
        }
        for (std::size_t j = i + 1; j < w; ++j) {
            if (!consumed[j] && ritz.values[j] == std::conj(ritz.values[i])) {
                consumed[j] = true;
                break;
            }
        }
        for (std::size_t r = 0; r < n; ++r) block(r, col) = ritz.ritz_vectors.re(r, i);
        ++col;
        if (col < w) {
            for (std::size_t r = 0; r < n; ++r) block(r, col) = ritz.ritz_vectors.im(r, i);
            ++col;
        }
    }
    return block.columns(0, col);
}

inline RitzSet truncate_ritz(const RitzSet& ritz, std::size_t count) {
    if (count >= ritz.values.size()) return ritz;
    RitzSet out;
    out.values.assign(ritz.values.begin(), ritz.values.begin() + count);
    out.per_pair_residuals.assign(ritz.per_pair_residuals.begin(),
                                  ritz.per_pair_residuals.begin() + count);
    out.flagged.assign(ritz.flagged.begin(), ritz.flagged.begin() + count);
    out.block_residual_estimate = ritz.block_residual_estimate;
    out.projected_spectrum = ritz.projected_spectrum;
    const std::size_t n = ritz.ritz_vectors.rows(), ks = ritz.coef_vectors.rows();
    out.ritz_vectors = ComplexMatrix(n, count);
    out.coef_vectors = ComplexMatrix(ks, count);
    for (std::size_t c = 0; c < count; ++c) {
        for (std::size_t i = 0; i < n; ++i) out.ritz_vectors.set(i, c, ritz.ritz_vectors(i, c));
        for (std::size_t i = 0; i < ks; ++i) out.coef_vectors.set(i, c, ritz.coef_vectors(i, c));
    }
    return out;
}

}  // namespace detail

/// The restarted outer loop shared by all four methods. Each cycle runs m
/// Lanczos (or adaptive Lanczos) steps, extracts the s wanted Ritz pairs,
/// records residuals, and either stops or restarts from the re-orthonormalized
/// (optionally Chebyshev-filtered) Ritz block with W1 = V1.
inline SolveReport solve(const LinearOperator& op, const SolverConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = op.dim();
    config.validate(n);

    SolveReport report;
    report.config = config;
    report.n = n;

    detail::CountingOperator counter(op);
    using Phase = detail::CountingOperator::Phase;

    auto [v1, w1] = initial_blocks(n, config.s, config.seed);
    double best_residual = std::numeric_limits<double>::infinity();
    int no_improve = 0;

    for (std::size_t cycle = 0; cycle <= config.max_restarts; ++cycle) {
        const std::size_t width = v1.cols();
        const std::size_t m_eff = std::min(config.m, n / width);

        LanczosOptions lopts;
        lopts.breakdown_tol = config.breakdown_tol;
        lopts.full_rebiorth = config.full_rebiorth;
        lopts.seed = config.seed ^ (0x9e3779b97f4a7c15ULL * (cycle + 1));
        counter.set_phase(Phase::lanczos);
        const LanczosDecomposition dec = is_adaptive(config.method)
                                             ? able(counter, v1, w1, m_eff, lopts)
                                             : block_lanczos(counter, v1, w1, m_eff, lopts);
        report.recovery_events += dec.recoveries.size();

        const std::size_t ks = dec.steps_completed * width;
        const std::size_t want = std::min(config.s, ks);

        // The filtered pipeline screens out spurious oblique Ritz values:
        // the ellipse needs a sane wanted set (a wild value above lambda_ref
        // destroys the gap test and then the restart). Unfiltered methods
        // select purely by real part (anchor < 0 disables the rejection but
        // keeps the conjugate closure of the wanted set).
        counter.set_phase(Phase::residual);
        ScreeningOptions screening;
        if (!is_filtered(config.method)) screening.anchor = -1.0;
        const RitzSet ritz = screened_ritz_extract(dec, want, counter, screening);
        const std::size_t s_eff = ritz.values.size();  // want, or want+1 for a boundary pair
        const RitzSet wanted = detail::truncate_ritz(ritz, want);

        ConvergenceRecord rec;
        rec.restart_index = cycle;
        rec.ritz_values = wanted.values;
        for (std::size_t i = 0; i < want; ++i)
            rec.per_pair_residuals.push_back(wanted.per_pair_residuals[i] /
                                             std::max(1.0, std::abs(wanted.values[i])));
        const auto [conv, max_rel] = check_convergence(wanted, config.tol);
        rec.max_residual = max_rel;
        rec.block_residual_estimate = ritz.block_residual_estimate;
        rec.breakdown_events = dec.breakdown ? 1 : 0;
        rec.widened = s_eff > want;
        rec.rejected_spurious = ritz.rejected_spurious;
        report.final = wanted;

        if (conv) {
            report.records.push_back(std::move(rec));
            report.converged = true;
            break;
        }
        if (cycle == config.max_restarts) {
            report.records.push_back(std::move(rec));
            break;
        }

        // restart block from the (conjugate-closed) Ritz vectors
        BlockVector block = detail::real_restart_block(ritz);

        if (is_filtered(config.method)) {
            // unwanted Ritz values: everything not selected, minus rejected
            // spurious values and near-duplicates of wanted ones
            std::vector<std::complex<double>> unwanted;
            for (const auto& v : ritz.projected_spectrum) {
                bool skip = false;
                for (std::size_t jw = 0; jw < s_eff && !skip; ++jw)
                    if (v == ritz.values[jw] || std::abs(v - ritz.values[jw]) <= 1e-8) skip = true;
                for (const auto& r : ritz.rejected_values)
                    if (v == r) skip = true;
                if (!skip) unwanted.push_back(v);
            }
            if (unwanted.empty()) {
                SPK_LOG_INFO("restart %zu: no unwanted Ritz values left, restarting unfiltered",
                             cycle);
                rec.filtered = false;
            } else {
                const auto lambda_ref = ritz.values[s_eff - 1];
                try {
                    FilterSpec fspec;
                    fspec.ellipse = estimate_ellipse(unwanted, lambda_ref);
                    fspec.degree = config.k;
                    rec.ellipse_d = fspec.ellipse.d;
                    rec.ellipse_c2 = fspec.ellipse.c_squared;
                    counter.set_phase(Phase::chebyshev);
                    block = cheb_filter(counter, block, fspec).z;
                    rec.filtered = true;
                    SPK_LOG_DEBUG("restart %zu: filter d=%.6g c2=%.6g k=%zu", cycle,
                                  fspec.ellipse.d, fspec.ellipse.c_squared, config.k);
                } catch (const std::exception& e) {
                    report.diagnostic = e.what();
                    report.records.push_back(std::move(rec));
                    SPK_LOG_ERROR("restart %zu: %s", cycle, e.what());
                    break;
                }
            }
        }

        v1 = qr_factor(block).q;

        // stagnation guard: three restarts without a 1% improvement earn a
        // seeded rank-s perturbation of relative size 1e-6
        if (max_rel > 0.99 * best_residual) {
            if (++no_improve >= 3) {
                Rng kick(config.seed ^ (0x5bd1e9955bd1e995ULL * (cycle + 1)));
                DenseMatrix g = gaussian_block(n, v1.cols(), kick);
                g.scale(1e-6 * frobenius_norm(v1) / std::max(frobenius_norm(g), 1e-300));
                v1 += g;
                v1 = qr_factor(v1).q;
                rec.stagnation_kick = true;
                no_improve = 0;
                SPK_LOG_INFO("restart %zu: stagnation kick applied", cycle);
            }
        } else {
            no_improve = 0;
        }
        best_residual = std::min(best_residual, max_rel);

        w1 = v1;
        if (config.keep_restart_blocks) report.restart_blocks.push_back(v1);
        report.restarts_performed = cycle + 1;
        report.records.push_back(std::move(rec));
    }

    report.applies_a = counter.a_cols();
    report.applies_at = counter.at_cols();
    report.applies_lanczos = counter.phase_cols(Phase::lanczos);
    report.applies_chebyshev = counter.phase_cols(Phase::chebyshev);
    report.applies_residual = counter.phase_cols(Phase::residual);
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

}  // namespace spk
