#include <catch2/catch_amalgamated.hpp>

#include <complex>

#include "spectral_krylov/chebyshev/ellipse.hpp"
#include "spectral_krylov/chebyshev/filter.hpp"
#include "spectral_krylov/core/linear_operator.hpp"
#include "spectral_krylov/core/random.hpp"

using namespace spk;
using cplx = std::complex<double>;

namespace {

std::vector<cplx> real_values(std::initializer_list<double> xs) {
    std::vector<cplx> v;
    for (double x : xs) v.emplace_back(x, 0.0);
    return v;
}

}  // namespace

TEST_CASE("estimate_ellipse bounding-box arithmetic") {
    const auto e = estimate_ellipse(real_values({1, 2, 3, 4, 5, 6, 7, 8, 9}), cplx(9.5, 0));
    CHECK(e.d == Catch::Approx(5.0));
    CHECK(e.semi_a == Catch::Approx(4.04));
    CHECK(e.semi_b == 0.0);
    CHECK(e.c_squared == Catch::Approx(4.04 * 4.04));

    const auto point = estimate_ellipse(real_values({3}), cplx(5, 0));
    CHECK(point.d == Catch::Approx(3.0));
    CHECK(point.semi_a == 0.0);
    CHECK(point.semi_b == 0.0);
    CHECK(point.c_squared == 0.0);

    const auto vert = estimate_ellipse({cplx(3, 1), cplx(3, -1)}, cplx(6, 0));
    CHECK(vert.d == Catch::Approx(3.0));
    CHECK(vert.semi_a == 0.0);
    CHECK(vert.semi_b == Catch::Approx(1.01));
    CHECK(vert.c_squared == Catch::Approx(-1.0201));
}

TEST_CASE("estimate_ellipse rejects a missing spectral gap") {
    CHECK_THROWS_AS(estimate_ellipse(real_values({1, 2, 3}), cplx(3.0, 0)), std::runtime_error);
    CHECK_THROWS_AS(estimate_ellipse(real_values({1, 2, 3}), cplx(2.5, 0)), std::runtime_error);
    CHECK_THROWS_AS(estimate_ellipse({}, cplx(1, 0)), std::invalid_argument);
}

TEST_CASE("estimate_ellipse keeps the reference outside for tight gaps") {
    // gap far below 1% of the spread: the raw 1.01 inflation would swallow
    // the reference eigenvalue; the capped semi-axis must not
    std::vector<cplx> unwanted;
    for (int i = 0; i < 500; ++i) unwanted.emplace_back(1.0 + 8.9098 * i / 499.0, 0.0);
    const auto e = estimate_ellipse(unwanted, cplx(9.9278, 0));
    CHECK(e.reference_outside());
    CHECK(e.d + e.semi_a < 9.9278);
    // all unwanted values stay enclosed horizontally
    CHECK(e.d + e.semi_a >= 9.9098);
    CHECK(e.d - e.semi_a <= 1.0);
}

TEST_CASE("convergence_factor hand values") {
    EllipseParams flat;
    flat.d = 0;
    flat.c_squared = 0;
    flat.lambda_ref = cplx(2, 0);
    CHECK(convergence_factor(flat, cplx(2, 0)) == Catch::Approx(1.0));
    CHECK(convergence_factor(flat, cplx(1, 0)) == Catch::Approx(0.5));

    EllipseParams e;
    e.d = 0;
    e.c_squared = 1;
    e.lambda_ref = cplx(2, 0);
    CHECK(convergence_factor(e, cplx(0.5, 0)) == Catch::Approx(1.0 / 3.7320508075688772).epsilon(1e-12));
}

TEST_CASE("convergence_factor is continuous as c^2 -> 0") {
    EllipseParams e0, e1;
    e0.d = e1.d = 1.0;
    e0.lambda_ref = e1.lambda_ref = cplx(4, 0);
    e0.c_squared = 0.0;
    e1.c_squared = 1e-6;
    for (double li : {-1.0, 0.2, 2.5}) {
        CHECK(std::abs(convergence_factor(e0, cplx(li, 0)) - convergence_factor(e1, cplx(li, 0))) < 1e-6);
    }
}

TEST_CASE("cheb_poly_scalar exact cases") {
    FilterSpec s;
    s.ellipse.d = 0;
    s.ellipse.c_squared = 1;
    s.ellipse.lambda_ref = cplx(2, 0);
    s.degree = 2;
    // T2(x) = 2x^2 - 1: T2(0.5)/T2(2) = -0.5/7
    const auto p = cheb_poly_scalar(s, cplx(0.5, 0));
    CHECK(p.real() == Catch::Approx(-0.5 / 7.0).epsilon(1e-13));
    CHECK(p.imag() == 0.0);

    s.degree = 1;
    const auto p1 = cheb_poly_scalar(s, cplx(0.7, 0));
    CHECK(p1.real() == Catch::Approx(0.7 / 2.0).epsilon(1e-13));

    for (std::size_t k : {1u, 3u, 7u, 20u}) {
        s.degree = k;
        const auto pr = cheb_poly_scalar(s, s.ellipse.lambda_ref);
        CHECK(std::abs(pr - cplx(1, 0)) < 1e-13);
    }
}

TEST_CASE("cheb_filter base case and diagonal oracle") {
    const std::size_t n = 20;
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0 + 9.0 * double(i) / double(n - 1);
    const auto op = LinearOperator::from_dense(a);

    std::vector<cplx> unwanted;
    for (std::size_t i = 0; i + 2 < n; ++i) unwanted.emplace_back(a(i, i), 0.0);
    FilterSpec spec;
    spec.ellipse = estimate_ellipse(unwanted, cplx(a(n - 1, n - 1), 0));
    spec.degree = 1;

    Rng rng(5);
    const auto z0 = gaussian_block(n, 2, rng);
    const auto r1 = cheb_filter(op, z0, spec);
    // k=1: (sigma_1/c)(A - dI) Z0 = (A - dI) Z0 / (lambda_s - d)
    const double ls = spec.ellipse.lambda_ref.real(), d = spec.ellipse.d;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const double expect = (a(i, i) - d) * z0(i, j) / (ls - d);
            CHECK(r1.z(i, j) == Catch::Approx(expect).margin(1e-12));
        }

    // general k: output is alpha * P_k(lambda_i) * z0_i entrywise per column
    spec.degree = 12;
    const auto rk = cheb_filter(op, z0, spec);
    for (std::size_t j = 0; j < 2; ++j) {
        double alpha = 0;
        bool have_alpha = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double expect = cheb_poly_scalar(spec, cplx(a(i, i), 0)).real() * z0(i, j);
            if (std::abs(expect) < 1e-6) continue;
            const double ratio = rk.z(i, j) / expect;
            if (!have_alpha) {
                alpha = ratio;
                have_alpha = true;
                CHECK(alpha > 0);
            } else {
                CHECK(ratio == Catch::Approx(alpha).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("cheb_filter damps an interior eigenvector against the reference") {
    const std::size_t n = 12;
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = double(i);  // 0..11
    const auto op = LinearOperator::from_dense(a);
    std::vector<cplx> unwanted;
    for (std::size_t i = 0; i + 1 < n; ++i) unwanted.emplace_back(double(i), 0.0);
    FilterSpec spec;
    spec.ellipse = estimate_ellipse(unwanted, cplx(11, 0));
    spec.degree = 25;

    // deep-interior eigenvector: |P_k| is tiny there
    DenseMatrix e5(n, 1), e_ref(n, 1);
    e5(5, 0) = 1.0;
    e_ref(n - 1, 0) = 1.0;
    const double p5 = std::abs(cheb_poly_scalar(spec, cplx(5, 0)));
    REQUIRE(p5 < 1e-3);
    const auto f5 = cheb_filter(op, e5, spec);
    const auto fref = cheb_filter(op, e_ref, spec);
    const double ratio = (frobenius_norm(f5.z) * std::exp(f5.log_scale)) /
                         (frobenius_norm(fref.z) * std::exp(fref.log_scale));
    CHECK(ratio <= 1e-3 * 1.0000001);
}

TEST_CASE("damping inside the ellipse and monotonicity in the degree") {
    // Example-1 style configuration: unwanted 1..9.4 spread, reference at 10
    std::vector<cplx> unwanted;
    for (int i = 0; i < 200; ++i) unwanted.emplace_back(1.0 + 8.4 * i / 199.0, 0.0);
    FilterSpec spec;
    spec.ellipse = estimate_ellipse(unwanted, cplx(10, 0));

    for (std::size_t k : {5u, 10u, 20u}) {
        spec.degree = k;
        CHECK(std::abs(cheb_poly_scalar(spec, cplx(10, 0)) - cplx(1, 0)) < 1e-13);
        for (double mu : {1.5, 4.0, 7.0, 9.0}) {
            CHECK(std::abs(cheb_poly_scalar(spec, cplx(mu, 0))) < 1.0);
        }
    }
    for (double mu : {1.5, 4.0, 7.0, 9.0}) {
        for (std::size_t k : {5u, 10u, 15u, 20u}) {
            spec.degree = k;
            const double pk = std::abs(cheb_poly_scalar(spec, cplx(mu, 0)));
            spec.degree = k + 5;
            const double pk5 = std::abs(cheb_poly_scalar(spec, cplx(mu, 0)));
            CHECK(pk5 <= pk);
        }
    }
}

TEST_CASE("filter/scalar consistency on randomized diagonal cases") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 8 + std::size_t(rng.uniform() * 40);
        DenseMatrix a(n, n);
        for (std::size_t i = 0; i < n; ++i) a(i, i) = 20.0 * rng.uniform() - 10.0;
        // make the reference lead the pack by a clear margin
        std::size_t top = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (a(i, i) > a(top, top)) top = i;
        a(top, top) += 1.0 + 2.0 * rng.uniform();
        const auto op = LinearOperator::from_dense(a);

        std::vector<cplx> unwanted;
        for (std::size_t i = 0; i < n; ++i)
            if (i != top) unwanted.emplace_back(a(i, i), 0.0);
        FilterSpec spec;
        spec.ellipse = estimate_ellipse(unwanted, cplx(a(top, top), 0));
        spec.degree = 1 + std::size_t(rng.uniform() * 29);

        CHECK(std::abs(cheb_poly_scalar(spec, spec.ellipse.lambda_ref) - cplx(1, 0)) <= 1e-13);

        DenseMatrix z0 = gaussian_block(n, 1, rng);
        const auto f = cheb_filter(op, z0, spec);
        double alpha = 0;
        bool have_alpha = false;
        for (std::size_t i = 0; i < n; ++i) {
            const double expect = cheb_poly_scalar(spec, cplx(a(i, i), 0)).real() * z0(i, 0);
            if (std::abs(expect) < 1e-8 * frobenius_norm(z0)) continue;
            const double ratio = f.z(i, 0) / expect;
            if (!have_alpha) {
                alpha = ratio;
                have_alpha = true;
                CHECK(alpha > 0);
            } else {
                CHECK(ratio == Catch::Approx(alpha).epsilon(1e-9));
            }
        }
        CHECK(have_alpha);
    }
}

TEST_CASE("point ellipse degenerates to scaled power iteration") {
    const std::size_t n = 6;
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) = double(i + 1);
    const auto op = LinearOperator::from_dense(a);
    FilterSpec spec;
    spec.ellipse = estimate_ellipse(real_values({3}), cplx(6, 0));
    spec.degree = 4;
    DenseMatrix z0(n, 1);
    for (std::size_t i = 0; i < n; ++i) z0(i, 0) = 1.0;
    const auto f = cheb_filter(op, z0, spec);
    for (std::size_t i = 0; i < n; ++i) {
        const double expect = std::pow((double(i + 1) - 3.0) / 3.0, 4.0);
        CHECK(f.z(i, 0) == Catch::Approx(expect).margin(1e-12));
    }
}

TEST_CASE("overflow guard rescales without changing directions") {
    // one eigenvalue far beyond the reference: |P_k| blows up there and the
    // iterates overflow without the guard
    const std::size_t n = 6;
    DenseMatrix a(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) a(i, i) = double(i + 1) * 100.0;
    a(n - 1, n - 1) = 1200.0;
    const auto op = LinearOperator::from_dense(a);
    FilterSpec spec;
    spec.ellipse = estimate_ellipse({cplx(100, 0), cplx(500, 0)}, cplx(600, 0));
    spec.degree = 500;
    DenseMatrix z0(n, 1);
    for (std::size_t i = 0; i < n; ++i) z0(i, 0) = 1.0;
    const auto f = cheb_filter(op, z0, spec);
    CHECK(f.rescale_events > 0);
    CHECK(f.z.all_finite());
    CHECK(frobenius_norm(f.z) <= 1e100);
    // the dominant direction survives the rescaling untouched
    double mx = 0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(f.z(i, 0)) > mx) {
            mx = std::abs(f.z(i, 0));
            arg = i;
        }
    CHECK(arg == n - 1);
}
