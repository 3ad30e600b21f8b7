#pragma once

#include <memory>
#include <stdexcept>
#include <thread>
#include <variant>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"
#include "spectral_krylov/core/sparse_csr.hpp"

namespace spk {

/// y = A*X and y = A^T*X on n-by-s blocks, backed by a dense or CSR matrix.
/// Immutable after construction; safe to share read-only across solves.
///
/// `with_threads` returns a copy (sharing the backing store) whose block
/// applies split the columns of X across that many threads. Each output
/// column is accumulated by exactly one thread in the same order as the
/// serial code, so results stay deterministic.
class LinearOperator {
public:
    static LinearOperator from_dense(DenseMatrix a) {
        if (a.rows() != a.cols()) throw std::invalid_argument("LinearOperator: matrix must be square");
        if (!a.all_finite()) throw std::invalid_argument("LinearOperator: non-finite entries");
        LinearOperator op;
        op.n_ = a.rows();
        op.backing_ = std::make_shared<Backing>(Backing{std::move(a)});
        return op;
    }

    static LinearOperator from_csr(SparseCSR a) {
        if (a.rows != a.cols) throw std::invalid_argument("LinearOperator: matrix must be square");
        a.validate();
        LinearOperator op;
        op.n_ = a.rows;
        op.backing_ = std::make_shared<Backing>(Backing{std::move(a)});
        return op;
    }

    std::size_t dim() const { return n_; }
    bool can_apply() const { return true; }
    bool can_apply_transpose() const { return true; }
    bool is_dense() const { return std::holds_alternative<DenseMatrix>(backing_->m); }

    LinearOperator with_threads(std::size_t threads) const {
        LinearOperator op = *this;
        op.threads_ = threads > 0 ? threads : 1;
        return op;
    }
    std::size_t threads() const { return threads_; }

    DenseMatrix apply(const DenseMatrix& x) const { return run(x, false); }
    DenseMatrix apply_transpose(const DenseMatrix& x) const { return run(x, true); }

    double frobenius_norm() const {
        if (const auto* d = std::get_if<DenseMatrix>(&backing_->m)) return spk::frobenius_norm(*d);
        return spk::frobenius_norm(std::get<SparseCSR>(backing_->m));
    }

    DenseMatrix to_dense() const {
        if (const auto* d = std::get_if<DenseMatrix>(&backing_->m)) return *d;
        return std::get<SparseCSR>(backing_->m).to_dense();
    }

    const SparseCSR* csr() const { return std::get_if<SparseCSR>(&backing_->m); }
    const DenseMatrix* dense() const { return std::get_if<DenseMatrix>(&backing_->m); }

private:
    struct Backing {
        std::variant<DenseMatrix, SparseCSR> m;
    };

    DenseMatrix apply_serial(const DenseMatrix& x, bool transpose) const {
        if (const auto* d = std::get_if<DenseMatrix>(&backing_->m))
            return transpose ? matmul_tn(*d, x) : matmul(*d, x);
        const auto& s = std::get<SparseCSR>(backing_->m);
        return transpose ? s.apply_transpose(x) : s.apply(x);
    }

    DenseMatrix run(const DenseMatrix& x, bool transpose) const {
        const std::size_t cols = x.cols();
        const std::size_t nthreads = std::min(threads_, cols);
        if (nthreads <= 1) return apply_serial(x, transpose);
        DenseMatrix y(n_, cols);
        std::vector<std::thread> pool;
        pool.reserve(nthreads);
        for (std::size_t t = 0; t < nthreads; ++t) {
            pool.emplace_back([&, t] {
                const std::size_t c0 = cols * t / nthreads;
                const std::size_t c1 = cols * (t + 1) / nthreads;
                if (c0 == c1) return;
                const DenseMatrix part = apply_serial(x.columns(c0, c1), transpose);
                for (std::size_t i = 0; i < n_; ++i)
                    for (std::size_t c = c0; c < c1; ++c) y(i, c) = part(i, c - c0);
            });
        }
        for (auto& th : pool) th.join();
        return y;
    }

    std::size_t n_ = 0;
    std::size_t threads_ = 1;
    std::shared_ptr<const Backing> backing_;
};

}  // namespace spk
