#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

#include "spectral_krylov/core/dense_matrix.hpp"

namespace spk {

/// Thrown when the QR iteration exhausts its sweep budget. Eigenvalues
/// deflated before the stall are carried along.
class FrancisNonConvergence : public std::runtime_error {
public:
    FrancisNonConvergence(std::string what, std::vector<std::complex<double>> partial)
        : std::runtime_error(std::move(what)), partial_values(std::move(partial)) {}
    std::vector<std::complex<double>> partial_values;
};

/// Eigenvalues of an upper Hessenberg matrix by the Francis implicit
/// double-shift QR iteration, real arithmetic throughout; complex pairs
/// emerge from trailing 2x2 blocks. Classic hqr scheme (EISPACK; see also
/// Press et al., Numerical Recipes 3rd ed., sec. 11.6) with
///  - deflation when |h(i+1,i)| <= eps*(|h(i,i)|+|h(i+1,i+1)|),
///  - an ad hoc exceptional shift every 10 stalled sweeps,
///  - a hard cap of 30*n double-shift sweeps in total.
inline std::vector<std::complex<double>> francis_qr(DenseMatrix h) {
    if (h.rows() != h.cols()) throw std::invalid_argument("francis_qr: matrix must be square");
    const std::size_t n = h.rows();
    std::vector<std::complex<double>> values(n);
    if (n == 0) return values;

    const double eps = std::numeric_limits<double>::epsilon();
    double anorm = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = (i > 0 ? i - 1 : 0); j < n; ++j) anorm += std::abs(h(i, j));
    if (anorm == 0.0) anorm = 1.0;

    auto sign_of = [](double a, double b) { return b >= 0 ? std::abs(a) : -std::abs(a); };

    long sweeps_left = 30 * static_cast<long>(n);
    int nn = static_cast<int>(n) - 1;
    double t = 0.0;  // accumulated exceptional diagonal shifts
    while (nn >= 0) {
        int its = 0;
        int l;
        do {
            for (l = nn; l >= 1; --l) {
                double s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
                if (s == 0.0) s = anorm;
                if (std::abs(h(l, l - 1)) <= eps * s) {
                    h(l, l - 1) = 0.0;
                    break;
                }
            }
            if (l < 1) l = 0;
            double x = h(nn, nn);
            if (l == nn) {
                values[nn--] = x + t;
            } else {
                double y = h(nn - 1, nn - 1);
                double w = h(nn, nn - 1) * h(nn - 1, nn);
                if (l == nn - 1) {
                    const double p = 0.5 * (y - x);
                    const double q = p * p + w;
                    double z = std::sqrt(std::abs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + sign_of(z, p);
                        values[nn - 1] = values[nn] = x + z;
                        if (z != 0.0) values[nn] = x - w / z;
                    } else {
                        values[nn - 1] = std::complex<double>(x + p, z);
                        values[nn] = std::conj(values[nn - 1]);
                    }
                    nn -= 2;
                } else {
                    if (sweeps_left-- <= 0) {
                        std::vector<std::complex<double>> partial(values.begin() + nn + 1, values.end());
                        throw FrancisNonConvergence("francis_qr: sweep budget exhausted", std::move(partial));
                    }
                    if (its > 0 && its % 10 == 0) {
                        // exceptional shift to break symmetric cycles
                        t += x;
                        for (int i = 0; i <= nn; ++i) h(i, i) -= x;
                        const double s = std::abs(h(nn, nn - 1)) + std::abs(h(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    int m;
                    double p = 0, q = 0, r = 0, z = 0;
                    for (m = nn - 2; m >= l; --m) {
                        z = h(m, m);
                        r = x - z;
                        double s = y - z;
                        p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
                        q = h(m + 1, m + 1) - z - r - s;
                        r = h(m + 2, m + 1);
                        s = std::abs(p) + std::abs(q) + std::abs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r));
                        const double v = std::abs(p) * (std::abs(h(m - 1, m - 1)) + std::abs(z) + std::abs(h(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (int i = m; i < nn - 1; ++i) {
                        h(i + 2, i) = 0.0;
                        if (i != m) h(i + 2, i - 1) = 0.0;
                    }
                    for (int k = m; k < nn; ++k) {
                        if (k != m) {
                            p = h(k, k - 1);
                            q = h(k + 1, k - 1);
                            r = 0.0;
                            if (k + 1 != nn) r = h(k + 2, k - 1);
                            x = std::abs(p) + std::abs(q) + std::abs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        const double s = sign_of(std::sqrt(p * p + q * q + r * r), p);
                        if (s == 0.0) continue;
                        if (k == m) {
                            if (l != m) h(k, k - 1) = -h(k, k - 1);
                        } else {
                            h(k, k - 1) = -s * x;
                        }
                        p += s;
                        x = p / s;
                        double yy = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;
                        for (int j = k; j <= nn; ++j) {
                            double pp = h(k, j) + q * h(k + 1, j);
                            if (k + 1 != nn) {
                                pp += r * h(k + 2, j);
                                h(k + 2, j) -= pp * z;
                            }
                            h(k + 1, j) -= pp * yy;
                            h(k, j) -= pp * x;
                        }
                        const int mmin = nn < k + 3 ? nn : k + 3;
                        for (int i = l; i <= mmin; ++i) {
                            double pp = x * h(i, k) + yy * h(i, k + 1);
                            if (k + 1 != nn) {
                                pp += z * h(i, k + 2);
                                h(i, k + 2) -= pp * r;
                            }
                            h(i, k + 1) -= pp * q;
                            h(i, k) -= pp;
                        }
                    }
                }
            }
        } while (l + 1 < nn);
    }
    return values;
}

/// Ordering contract used everywhere downstream: descending real part,
/// ties broken by descending imaginary part.
inline void sort_spectrum(std::vector<std::complex<double>>& values) {
    std::stable_sort(values.begin(), values.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() > b.real();
        return a.imag() > b.imag();
    });
}

}  // namespace spk
