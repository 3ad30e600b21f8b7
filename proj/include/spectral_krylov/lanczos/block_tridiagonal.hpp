#pragma once

#include <stdexcept>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"

namespace spk {

/// The projected block tridiagonal matrix built by the Lanczos recurrences:
/// diagonal blocks A_j, superdiagonal B_j, subdiagonal C_j, plus the trailing
/// closure blocks produced at the last completed step. `trailing_sub` is
/// C_{k+1}, the extra block row that turns the square T_k into the
/// rectangular form; `trailing_super` is B_{k+1}, the closure of the
/// transposed recurrence.
struct BlockTridiagonal {
    std::size_t s = 0;
    std::vector<DenseMatrix> diag;   // A_1..A_k
    std::vector<DenseMatrix> super;  // B_2..B_k; super[i] sits at block (i, i+1)
    std::vector<DenseMatrix> sub;    // C_2..C_k; sub[i] sits at block (i+1, i)
    DenseMatrix trailing_sub;
    DenseMatrix trailing_super;

    std::size_t steps() const { return diag.size(); }

    void check_consistent() const {
        const std::size_t k = diag.size();
        if (k == 0) throw std::logic_error("BlockTridiagonal: empty");
        if (super.size() != k - 1 || sub.size() != k - 1)
            throw std::logic_error("BlockTridiagonal: off-diagonal block count mismatch");
    }

    /// Dense ks-by-ks matrix T_k, or the (k+1)s-by-ks matrix with the
    /// trailing block row appended.
    DenseMatrix assemble(bool with_trailing) const {
        check_consistent();
        const std::size_t k = diag.size();
        DenseMatrix t((k + (with_trailing ? 1 : 0)) * s, k * s);
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t a = 0; a < s; ++a)
                for (std::size_t b = 0; b < s; ++b) {
                    t(j * s + a, j * s + b) = diag[j](a, b);
                    if (j + 1 < k) {
                        t(j * s + a, (j + 1) * s + b) = super[j](a, b);
                        t((j + 1) * s + a, j * s + b) = sub[j](a, b);
                    }
                }
        if (with_trailing)
            for (std::size_t a = 0; a < s; ++a)
                for (std::size_t b = 0; b < s; ++b) t(k * s + a, (k - 1) * s + b) = trailing_sub(a, b);
        return t;
    }
};

}  // namespace spk
