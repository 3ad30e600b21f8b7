#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

namespace spk {

/// Chebyshev ellipse for the spectral filter: center d on the real axis,
/// squared focal half-distance c_squared (negative when the foci sit on the
/// vertical line through d), and the reference eigenvalue lambda_ref the
/// filter is normalized at. semi_a/semi_b are kept for diagnostics.
struct EllipseParams {
    double d = 0;
    double c_squared = 0;
    std::complex<double> lambda_ref;
    double semi_a = 0;
    double semi_b = 0;

    /// c = sqrt(|c^2|): the real scalar the filter recurrence runs with.
    double c_abs() const { return std::sqrt(std::abs(c_squared)); }

    bool reference_outside() const {
        const double dx = std::abs(lambda_ref.real() - d);
        if (semi_a > 0 && semi_b > 0) {
            const double ex = dx / semi_a;
            const double ey = lambda_ref.imag() / semi_b;
            return ex * ex + ey * ey > 1.0;
        }
        return dx > semi_a;
    }
};

/// Bounding-box ellipse around the unwanted Ritz values, inflated by 1%.
/// When the spectral gap is below a hundredth of the spread, the horizontal
/// semi-axis is capped at half the gap past the unwanted set so the
/// reference eigenvalue always stays strictly outside; the plain 1.01
/// inflation would otherwise swallow it for tightly packed spectra.
inline EllipseParams estimate_ellipse(const std::vector<std::complex<double>>& unwanted,
                                      std::complex<double> lambda_ref) {
    if (unwanted.empty()) throw std::invalid_argument("estimate_ellipse: unwanted set is empty");
    double re_min = unwanted.front().real(), re_max = re_min, im_max = 0;
    for (const auto& z : unwanted) {
        re_min = std::min(re_min, z.real());
        re_max = std::max(re_max, z.real());
        im_max = std::max(im_max, std::abs(z.imag()));
    }
    const double gap = lambda_ref.real() - re_max;
    if (!(gap > 0))
        throw std::runtime_error(
            "estimate_ellipse: no spectral gap (reference eigenvalue does not lead the unwanted set); "
            "increase m or choose a different s");

    EllipseParams e;
    e.d = 0.5 * (re_max + re_min);
    const double half_spread = 0.5 * (re_max - re_min);
    e.semi_a = std::min(1.01 * half_spread, half_spread + 0.49 * gap);
    e.semi_b = 1.01 * im_max;
    e.c_squared = e.semi_a * e.semi_a - e.semi_b * e.semi_b;
    e.lambda_ref = lambda_ref;
    if (!e.reference_outside())
        throw std::runtime_error(
            "estimate_ellipse: reference eigenvalue lies inside the ellipse (no usable spectral gap); "
            "increase m or choose a different s");
    return e;
}

namespace detail {

/// sqrt branch maximizing |w + sqrt(w^2 - c2)|: the exterior Joukowski map.
inline std::complex<double> exterior_root(std::complex<double> w, double c2) {
    const std::complex<double> r = std::sqrt(w * w - c2);
    return std::abs(w + r) >= std::abs(w - r) ? w + r : w - r;
}

}  // namespace detail

/// Damping ratio of eigenvalue lambda_i relative to the reference under the
/// degree-k Chebyshev filter (asymptotically per degree):
///   |(d - lambda_i) + sqrt((d - lambda_i)^2 - c^2)| /
///   |(d - lambda_s) + sqrt((d - lambda_s)^2 - c^2)|
inline double convergence_factor(const EllipseParams& e, std::complex<double> lambda_i) {
    const std::complex<double> wi = e.d - lambda_i;
    const std::complex<double> ws = e.d - e.lambda_ref;
    const double denom = std::abs(detail::exterior_root(ws, e.c_squared));
    if (denom == 0.0) throw std::domain_error("convergence_factor: zero denominator (lambda_ref at a focus)");
    return std::abs(detail::exterior_root(wi, e.c_squared)) / denom;
}

}  // namespace spk
