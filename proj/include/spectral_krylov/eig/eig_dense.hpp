#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"
#include "spectral_krylov/core/random.hpp"
#include "spectral_krylov/eig/francis.hpp"
#include "spectral_krylov/eig/hessenberg.hpp"

namespace spk {

/// Complex n-by-k block stored as paired real blocks.
struct ComplexMatrix {
    DenseMatrix re;
    DenseMatrix im;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t rows, std::size_t cols) : re(rows, cols), im(rows, cols) {}

    std::size_t rows() const { return re.rows(); }
    std::size_t cols() const { return re.cols(); }

    std::complex<double> operator()(std::size_t i, std::size_t j) const {
        return {re(i, j), im(i, j)};
    }
    void set(std::size_t i, std::size_t j, std::complex<double> z) {
        re(i, j) = z.real();
        im(i, j) = z.imag();
    }
};

inline double frobenius_norm(const ComplexMatrix& m) {
    const double a = frobenius_norm(m.re), b = frobenius_norm(m.im);
    return std::hypot(a, b);
}

inline double column_norm(const ComplexMatrix& m, std::size_t j) {
    return std::hypot(column_norm(m.re, j), column_norm(m.im, j));
}

/// Eigenvalues (and optionally eigenvectors) of a real matrix. For real
/// inputs the values are closed under conjugation by construction.
struct Spectrum {
    std::vector<std::complex<double>> values;
    std::optional<ComplexMatrix> vectors;
    std::vector<double> vector_residuals;  // ||M z - lambda z||_2 per column
    std::vector<bool> flagged;             // inverse iteration stagnated
};

namespace detail {

/// Dense complex LU solve used by inverse iteration only.
struct ComplexLu {
    std::size_t n = 0;
    std::vector<std::complex<double>> lu;
    std::vector<std::size_t> piv;

    explicit ComplexLu(std::vector<std::complex<double>> a, std::size_t n_) : n(n_), lu(std::move(a)), piv(n_) {
        std::iota(piv.begin(), piv.end(), std::size_t{0});
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t p = k;
            for (std::size_t i = k + 1; i < n; ++i)
                if (std::abs(lu[i * n + k]) > std::abs(lu[p * n + k])) p = i;
            if (p != k) {
                for (std::size_t j = 0; j < n; ++j) std::swap(lu[k * n + j], lu[p * n + j]);
                std::swap(piv[k], piv[p]);
            }
            const auto d = lu[k * n + k];
            if (d == std::complex<double>(0.0, 0.0)) continue;
            for (std::size_t i = k + 1; i < n; ++i) {
                lu[i * n + k] /= d;
                const auto lik = lu[i * n + k];
                for (std::size_t j = k + 1; j < n; ++j) lu[i * n + j] -= lik * lu[k * n + j];
            }
        }
    }

    std::vector<std::complex<double>> solve(const std::vector<std::complex<double>>& b) const {
        std::vector<std::complex<double>> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = b[piv[i]];
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t k = 0; k < i; ++k) x[i] -= lu[i * n + k] * x[k];
        for (std::size_t i = n; i-- > 0;) {
            for (std::size_t k = i + 1; k < n; ++k) x[i] -= lu[i * n + k] * x[k];
            const auto d = lu[i * n + i];
            x[i] = (d == std::complex<double>(0.0, 0.0)) ? x[i] / 1e-300 : x[i] / d;
        }
        return x;
    }
};

inline double vec_norm(const std::vector<std::complex<double>>& v) {
    double s = 0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
}

/// Deterministic phase: rotate so the first significant component is
/// real-positive, then normalize to unit 2-norm.
inline void normalize_phase(std::vector<std::complex<double>>& v) {
    const double nrm = vec_norm(v);
    if (nrm == 0) return;
    std::size_t lead = 0;
    while (lead + 1 < v.size() && std::abs(v[lead]) <= 1e-12 * nrm) ++lead;
    const auto z = v[lead];
    const std::complex<double> rot = std::abs(z) > 0 ? std::conj(z) / std::abs(z) : 1.0;
    for (auto& x : v) x = x * rot / nrm;
}

}  // namespace detail

/// Eigenvectors by inverse iteration on (M - (lambda + eps)I) with
/// eps = 1e-10*||M||_F, one to three iterations from a fixed seeded start.
/// Defective or pathologically clustered values stagnate; those columns are
/// flagged and their residual reported instead of failing.
inline Spectrum eig_vectors(const DenseMatrix& m, const std::vector<std::complex<double>>& values) {
    const std::size_t n = m.rows();
    if (m.cols() != n) throw std::invalid_argument("eig_vectors: matrix must be square");
    const std::size_t k = values.size();
    Spectrum out;
    out.values = values;
    out.vectors = ComplexMatrix(n, k);
    out.vector_residuals.assign(k, 0.0);
    out.flagged.assign(k, false);

    const double nrm_m = std::max(frobenius_norm(m), 1e-300);
    const double shift_eps = 1e-10 * nrm_m;
    const double accept = 1e-8 * nrm_m;   // contract bound; columns above it are flagged
    const double target = 1e-13 * nrm_m;  // keep polishing down to roundoff while budget lasts
    const double dup_tol = 1e-8 * nrm_m;

    Rng rng(0x5eedULL);
    std::vector<std::complex<double>> start(n);
    for (auto& z : start) z = rng.normal();

    std::vector<std::vector<std::complex<double>>> kept(k);
    std::vector<bool> used_as_partner(k, false);

    for (std::size_t c = 0; c < k; ++c) {
        const auto lambda = values[c];

        // Conjugate of an already computed pair member: reuse it.
        if (lambda.imag() < 0) {
            bool done = false;
            for (std::size_t p = 0; p < c; ++p) {
                if (!used_as_partner[p] && values[p] == std::conj(lambda) && values[p].imag() > 0) {
                    used_as_partner[p] = true;
                    auto v = kept[p];
                    for (auto& z : v) z = std::conj(z);
                    detail::normalize_phase(v);
                    kept[c] = v;
                    for (std::size_t i = 0; i < n; ++i) out.vectors->set(i, c, v[i]);
                    out.vector_residuals[c] = out.vector_residuals[p];
                    out.flagged[c] = out.flagged[p];
                    done = true;
                    break;
                }
            }
            if (done) continue;
        }

        // Previously accepted vectors of (numerically) the same eigenvalue;
        // iterate orthogonally to them so multiple copies get independent vectors.
        std::vector<std::size_t> group;
        for (std::size_t p = 0; p < c; ++p)
            if (std::abs(values[p] - lambda) <= dup_tol) group.push_back(p);

        std::vector<std::complex<double>> a(n * n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) a[i * n + j] = m(i, j);
        for (std::size_t i = 0; i < n; ++i) a[i * n + i] -= lambda + shift_eps;
        detail::ComplexLu lu(std::move(a), n);

        auto orth = [&](std::vector<std::complex<double>>& v) {
            for (std::size_t p : group) {
                std::complex<double> dot = 0;
                for (std::size_t i = 0; i < n; ++i) dot += std::conj(kept[p][i]) * v[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * kept[p][i];
            }
        };

        std::vector<std::complex<double>> v = start;
        orth(v);
        if (detail::vec_norm(v) == 0) v = start;
        double resid = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 3; ++it) {
            v = lu.solve(v);
            orth(v);
            const double nv = detail::vec_norm(v);
            if (nv == 0 || !std::isfinite(nv)) {
                v = start;
                continue;
            }
            for (auto& z : v) z /= nv;
            // residual ||M v - lambda v||
            resid = 0;
            for (std::size_t i = 0; i < n; ++i) {
                std::complex<double> acc = -lambda * v[i];
                for (std::size_t j = 0; j < n; ++j) acc += m(i, j) * v[j];
                resid += std::norm(acc);
            }
            resid = std::sqrt(resid);
            if (resid <= target && it >= 1) break;  // at least two passes sharpen the vector
        }
        detail::normalize_phase(v);
        kept[c] = v;
        for (std::size_t i = 0; i < n; ++i) out.vectors->set(i, c, v[i]);
        out.vector_residuals[c] = resid;
        out.flagged[c] = !(resid <= accept);
    }
    return out;
}

/// Eigenvalues only: Hessenberg reduction followed by Francis QR, sorted by
/// the library ordering contract.
inline Spectrum eig_values(const DenseMatrix& m) {
    Spectrum s;
    if (m.rows() != m.cols()) throw std::invalid_argument("eig_values: matrix must be square");
    if (m.rows() == 0) return s;
    auto hres = hessenberg(m);
    s.values = francis_qr(std::move(hres.h));
    sort_spectrum(s.values);
    return s;
}

/// Full dense solve: values plus inverse-iteration eigenvectors.
inline Spectrum eig_dense(const DenseMatrix& m) {
    Spectrum s = eig_values(m);
    if (s.values.empty()) return s;
    Spectrum withvec = eig_vectors(m, s.values);
    return withvec;
}

}  // namespace spk
