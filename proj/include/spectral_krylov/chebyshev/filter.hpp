#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "spectral_krylov/chebyshev/ellipse.hpp"
#include "spectral_krylov/core/dense_matrix.hpp"

namespace spk {

/// A Chebyshev filter polynomial: P_k(lambda) = T_k((lambda-d)/c) / T_k((lambda_s-d)/c),
/// normalized to 1 at the reference eigenvalue and damping inside the ellipse.
struct FilterSpec {
    EllipseParams ellipse;
    std::size_t degree = 1;

    void validate() const {
        if (degree < 1) throw std::invalid_argument("FilterSpec: degree must be >= 1");
    }
};

/// Scalar filter evaluation by the three-term Chebyshev recurrence
/// T_{i+1}(x) = 2x T_i(x) - T_{i-1}(x), run in complex arithmetic (stable for
/// arguments off [-1,1]). Negative c^2 runs with c = sqrt(|c^2|) and the
/// reference argument uses Re(lambda_ref), matching the block filter.
inline std::complex<double> cheb_poly_scalar(const FilterSpec& spec, std::complex<double> lambda) {
    spec.validate();
    const double d = spec.ellipse.d;
    const double c = spec.ellipse.c_abs();
    const double ls = spec.ellipse.lambda_ref.real();
    const std::size_t k = spec.degree;

    if (c == 0.0) {
        if (ls == d) throw std::domain_error("cheb_poly_scalar: lambda_ref coincides with the center");
        return std::pow((lambda - d) / (ls - d), double(k));
    }
    auto cheb = [k](std::complex<double> x) {
        std::complex<double> tm1 = 1.0, t = x;
        for (std::size_t i = 1; i < k; ++i) {
            const std::complex<double> tp1 = 2.0 * x * t - tm1;
            tm1 = t;
            t = tp1;
        }
        return t;
    };
    const std::complex<double> denom = cheb((ls - d) / c);
    if (denom == std::complex<double>(0.0, 0.0))
        throw std::domain_error("cheb_poly_scalar: T_k vanishes at the reference argument");
    return cheb((lambda - d) / c) / denom;
}

/// Result of the block filter. The output spans P_k(A) Z0; overflow guards
/// may have rescaled it by exp(-log_scale) (a positive scalar common to the
/// whole block, which downstream QR ignores).
struct FilterResult {
    BlockVector z;
    double log_scale = 0;  // ln of the product of applied rescale factors
    int rescale_events = 0;
};

/// Chebyshev iteration on a block:
///   sigma_1 = c/(lambda_s - d),  Z_1 = (sigma_1/c)(A - dI) Z_0,
///   sigma_{i+1} = 1/(2/sigma_1 - sigma_i),
///   Z_{i+1} = 2 (sigma_{i+1}/c)(A - dI) Z_i - sigma_i sigma_{i+1} Z_{i-1}.
/// A point ellipse (c = 0) degenerates to scaled power iteration on (A - dI).
template <class Op>
FilterResult cheb_filter(const Op& op, const BlockVector& z0, const FilterSpec& spec) {
    spec.validate();
    if (!z0.all_finite()) throw std::invalid_argument("cheb_filter: non-finite input block");
    if (z0.rows() != op.dim()) throw std::invalid_argument("cheb_filter: block does not match operator");
    const double d = spec.ellipse.d;
    const double c = spec.ellipse.c_abs();
    const double ls = spec.ellipse.lambda_ref.real();
    if (ls == d) throw std::domain_error("cheb_filter: lambda_ref coincides with the center");
    const std::size_t k = spec.degree;

    auto apply_shifted = [&](const BlockVector& z) {
        DenseMatrix az = op.apply(z);
        for (std::size_t i = 0; i < az.rows(); ++i)
            for (std::size_t j = 0; j < az.cols(); ++j) az(i, j) -= d * z(i, j);
        return az;
    };

    FilterResult out;
    auto guard = [&out](BlockVector& znew, BlockVector& zold) {
        const double nrm = frobenius_norm(znew);
        if (nrm > 1e100) {
            const double f = 1.0 / nrm;
            znew.scale(f);
            zold.scale(f);
            out.log_scale += std::log(nrm);
            out.rescale_events += 1;
        }
    };

    if (c == 0.0) {
        BlockVector z = z0;
        BlockVector dummy(0, 0);
        for (std::size_t i = 0; i < k; ++i) {
            z = apply_shifted(z);
            z.scale(1.0 / (ls - d));
            guard(z, dummy);
        }
        if (!z.all_finite()) throw std::runtime_error("cheb_filter: non-finite iterate (ellipse misplaced)");
        out.z = std::move(z);
        return out;
    }

    const double sigma1 = c / (ls - d);
    BlockVector z_prev = z0;
    BlockVector z_cur = apply_shifted(z0);
    z_cur.scale(sigma1 / c);
    double sigma = sigma1;
    for (std::size_t i = 1; i < k; ++i) {
        const double sigma_next = 1.0 / (2.0 / sigma1 - sigma);
        BlockVector z_next = apply_shifted(z_cur);
        z_next.scale(2.0 * sigma_next / c);
        BlockVector tail = z_prev;
        tail.scale(sigma * sigma_next);
        z_next -= tail;
        z_prev = std::move(z_cur);
        z_cur = std::move(z_next);
        guard(z_cur, z_prev);
        sigma = sigma_next;
    }
    if (!z_cur.all_finite()) throw std::runtime_error("cheb_filter: non-finite iterate (ellipse misplaced)");
    out.z = std::move(z_cur);
    return out;
}

}  // namespace spk
