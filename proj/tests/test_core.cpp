#include <catch2/catch_amalgamated.hpp>

#include "spectral_krylov/core/dense_matrix.hpp"
#include "spectral_krylov/core/linear_operator.hpp"
#include "spectral_krylov/core/lu.hpp"
#include "spectral_krylov/core/qr.hpp"
#include "spectral_krylov/core/random.hpp"
#include "spectral_krylov/core/sparse_csr.hpp"
#include "spectral_krylov/core/svd.hpp"

using namespace spk;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    Rng rng(seed);
    return gaussian_block(r, c, rng);
}

double ortho_defect(const DenseMatrix& q) {
    DenseMatrix g = matmul_tn(q, q);
    g -= DenseMatrix::identity(q.cols());
    return frobenius_norm(g);
}

}  // namespace

TEST_CASE("qr_factor identity") {
    const auto m = DenseMatrix::identity(4);
    const auto f = qr_factor(m);
    CHECK(frobenius_norm(f.q - m) < 1e-14);
    CHECK(frobenius_norm(f.r - m) < 1e-14);
}

TEST_CASE("qr_factor pythagorean column") {
    DenseMatrix m(2, 1);
    m(0, 0) = 3;
    m(1, 0) = 4;
    const auto f = qr_factor(m);
    CHECK(f.r(0, 0) == Catch::Approx(5.0).epsilon(1e-14));
    CHECK(f.q(0, 0) == Catch::Approx(0.6).epsilon(1e-14));
    CHECK(f.q(1, 0) == Catch::Approx(0.8).epsilon(1e-14));
    CHECK(frobenius_norm(matmul(f.q, f.r) - m) < 1e-14);
}

TEST_CASE("qr_factor reconstruction and orthonormality") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto m = random_matrix(50, 3, seed);
        const auto f = qr_factor(m);
        CHECK(frobenius_norm(matmul(f.q, f.r) - m) <= 1e-12 * frobenius_norm(m));
        CHECK(ortho_defect(f.q) <= 1e-12 * 3);
        for (std::size_t k = 0; k < 3; ++k) CHECK(f.r(k, k) >= 0.0);
    }
    // wider sweep of shapes for the orthonormality invariant
    for (std::size_t s = 1; s <= 6; ++s) {
        const auto m = random_matrix(40, s, 77 + s);
        const auto f = qr_factor(m);
        CHECK(ortho_defect(f.q) <= 1e-12 * double(s));
    }
}

TEST_CASE("qr_factor reports rank deficiency instead of failing") {
    auto m = random_matrix(20, 3, 5);
    for (std::size_t i = 0; i < 20; ++i) m(i, 2) = 2.0 * m(i, 0) - m(i, 1);
    const auto f = qr_factor(m);
    CHECK(f.rank(1e-10) == 2);
    CHECK(frobenius_norm(matmul(f.q, f.r) - m) <= 1e-12 * frobenius_norm(m));
}

TEST_CASE("svd_small identity and zero") {
    const auto f = svd_small(DenseMatrix::identity(2));
    CHECK(f.sigma[0] == Catch::Approx(1.0));
    CHECK(f.sigma[1] == Catch::Approx(1.0));
    CHECK(frobenius_norm(matmul_nt(f.u, f.v) - DenseMatrix::identity(2)) < 1e-12);

    const auto z = svd_small(DenseMatrix(3, 3));
    for (double s : z.sigma) CHECK(s == 0.0);
    CHECK(ortho_defect(z.u) < 1e-12);
    CHECK(ortho_defect(z.v) < 1e-12);
}

TEST_CASE("svd_small absorbs signs") {
    DenseMatrix m(2, 2);
    m(0, 0) = 3;
    m(1, 1) = -2;
    const auto f = svd_small(m);
    CHECK(f.sigma[0] == Catch::Approx(3.0).epsilon(1e-13));
    CHECK(f.sigma[1] == Catch::Approx(2.0).epsilon(1e-13));
    DenseMatrix rec(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j)
            for (std::size_t k = 0; k < 2; ++k) rec(i, j) += f.u(i, k) * f.sigma[k] * f.v(j, k);
    CHECK(frobenius_norm(rec - m) < 1e-13 * frobenius_norm(m));
}

TEST_CASE("svd_small reconstruction property") {
    for (std::size_t s = 1; s <= 10; ++s) {
        const auto m = random_matrix(s, s, 100 + s);
        const auto f = svd_small(m);
        DenseMatrix rec(s, s);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < s; ++j) {
                double acc = 0;
                for (std::size_t k = 0; k < s; ++k) acc += f.u(i, k) * f.sigma[k] * f.v(j, k);
                rec(i, j) = acc;
            }
        CHECK(frobenius_norm(rec - m) <= 1e-12 * frobenius_norm(m));
        CHECK(std::is_sorted(f.sigma.rbegin(), f.sigma.rend()));
        CHECK(ortho_defect(f.u) < 1e-12 * double(s));
        CHECK(ortho_defect(f.v) < 1e-12 * double(s));
    }
}

TEST_CASE("lu_biorth_split basics") {
    const auto fi = lu_biorth_split(DenseMatrix::identity(3));
    CHECK(frobenius_norm(fi.l - DenseMatrix::identity(3)) < 1e-15);
    CHECK(frobenius_norm(fi.uu - DenseMatrix::identity(3)) < 1e-15);

    DenseMatrix swap(2, 2);
    swap(0, 1) = 1;
    swap(1, 0) = 1;
    const auto fs = lu_biorth_split(swap);
    CHECK(max_abs(fs.l) <= 1.0);
    DenseMatrix pm(2, 2);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) pm(i, j) = swap(fs.perm[i], j);
    CHECK(frobenius_norm(pm - matmul(fs.l, fs.uu)) < 1e-15);

    DenseMatrix d(2, 2);
    d(0, 0) = 2;
    d(1, 1) = 3;
    const auto fd = lu_biorth_split(d);
    CHECK(frobenius_norm(fd.l - DenseMatrix::identity(2)) < 1e-15);
    CHECK(frobenius_norm(fd.uu - d) < 1e-15);
}

TEST_CASE("lu_biorth_split random property") {
    for (std::size_t s = 1; s <= 8; ++s) {
        const auto m = random_matrix(s, s, 200 + s);
        const auto f = lu_biorth_split(m);
        DenseMatrix pm(s, s);
        for (std::size_t i = 0; i < s; ++i)
            for (std::size_t j = 0; j < s; ++j) pm(i, j) = m(f.perm[i], j);
        CHECK(frobenius_norm(pm - matmul(f.l, f.uu)) <= 1e-12 * frobenius_norm(m));
        CHECK(max_abs(f.l) <= 1.0 + 1e-14);
    }
}

TEST_CASE("kron placement and special cases") {
    const auto m = random_matrix(2, 2, 7);
    const auto k1 = kron(DenseMatrix::identity(2), m);
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            CHECK(k1(i, j) == m(i, j));
            CHECK(k1(2 + i, 2 + j) == m(i, j));
            CHECK(k1(i, 2 + j) == 0.0);
            CHECK(k1(2 + i, j) == 0.0);
        }

    DenseMatrix nil(2, 2);
    nil(0, 1) = 1;
    const auto k2 = kron(nil, DenseMatrix::identity(2));
    std::size_t nonzeros = 0;
    for (double v : k2.values())
        if (v != 0.0) ++nonzeros;
    CHECK(nonzeros == 2);
    CHECK(k2(0, 2) == 1.0);
    CHECK(k2(1, 3) == 1.0);

    DenseMatrix c(1, 1);
    c(0, 0) = -2.5;
    const auto k3 = kron(c, m);
    CHECK(frobenius_norm(k3 - (-2.5 * m)) < 1e-15);
}

TEST_CASE("kron bilinearity") {
    const auto a = random_matrix(3, 2, 11);
    const auto b = random_matrix(2, 4, 12);
    const auto c = random_matrix(2, 4, 13);
    const auto lhs = kron(a, b + c);
    const auto rhs = kron(a, b) + kron(a, c);
    CHECK(frobenius_norm(lhs - rhs) < 1e-13 * frobenius_norm(lhs));
}

TEST_CASE("frobenius_norm hand values") {
    CHECK(frobenius_norm(DenseMatrix::identity(3)) == Catch::Approx(std::sqrt(3.0)).epsilon(1e-15));
    CHECK(frobenius_norm(DenseMatrix(4, 5)) == 0.0);
    DenseMatrix m(1, 2);
    m(0, 0) = 3;
    m(0, 1) = 4;
    CHECK(frobenius_norm(m) == Catch::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("sparse kron matches dense kron") {
    const auto ad = random_matrix(3, 3, 21);
    const auto bd = random_matrix(2, 2, 22);
    std::vector<std::tuple<std::size_t, std::size_t, double>> ta, tb;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) ta.emplace_back(i, j, ad(i, j));
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) tb.emplace_back(i, j, bd(i, j));
    const auto as = SparseCSR::from_triplets(3, 3, ta);
    const auto bs = SparseCSR::from_triplets(2, 2, tb);
    const auto ks = kron(as, bs);
    ks.validate();
    CHECK(frobenius_norm(ks.to_dense() - kron(ad, bd)) < 1e-14);
}

TEST_CASE("csr add and validation") {
    std::vector<std::tuple<std::size_t, std::size_t, double>> t1{{0, 0, 1.0}, {1, 1, 2.0}};
    std::vector<std::tuple<std::size_t, std::size_t, double>> t2{{0, 1, 3.0}, {1, 1, -2.0}};
    const auto a = SparseCSR::from_triplets(2, 2, t1);
    const auto b = SparseCSR::from_triplets(2, 2, t2);
    const auto c = add(a, b);
    c.validate();
    CHECK(c.to_dense()(0, 0) == 1.0);
    CHECK(c.to_dense()(0, 1) == 3.0);
    CHECK(c.to_dense()(1, 1) == 0.0);

    std::vector<std::tuple<std::size_t, std::size_t, double>> dup{{0, 0, 1.0}, {0, 0, 2.0}};
    CHECK_THROWS_AS(SparseCSR::from_triplets(2, 2, dup), std::invalid_argument);

    SparseCSR bad;
    bad.rows = bad.cols = 2;
    bad.row_offsets = {0, 2, 1};
    bad.col_indices = {0, 1};
    bad.values = {1.0, 1.0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("operator apply/apply_transpose consistency") {
    const auto ad = random_matrix(30, 30, 31);
    const auto op_dense = LinearOperator::from_dense(ad);

    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    Rng rng(32);
    for (std::size_t i = 0; i < 30; ++i) {
        trip.emplace_back(i, i, 2.0 + rng.normal());
        if (i + 1 < 30) trip.emplace_back(i, i + 1, rng.normal());
        if (i >= 1) trip.emplace_back(i, i - 1, rng.normal());
    }
    const auto op_sparse = LinearOperator::from_csr(SparseCSR::from_triplets(30, 30, trip));

    for (const auto& op : {op_dense, op_sparse}) {
        const auto x = random_matrix(30, 1, 33);
        const auto y = random_matrix(30, 1, 34);
        const auto ax = op.apply(x);
        const auto aty = op.apply_transpose(y);
        double lhs = 0, rhs = 0;
        for (std::size_t i = 0; i < 30; ++i) {
            lhs += y(i, 0) * ax(i, 0);
            rhs += aty(i, 0) * x(i, 0);
        }
        CHECK(lhs == Catch::Approx(rhs).epsilon(1e-12));
    }

    // sparse apply agrees with densified product
    const auto x = random_matrix(30, 3, 35);
    const auto dense_of_sparse = op_sparse.to_dense();
    CHECK(frobenius_norm(op_sparse.apply(x) - matmul(dense_of_sparse, x)) < 1e-13);
    CHECK(frobenius_norm(op_sparse.apply_transpose(x) - matmul_tn(dense_of_sparse, x)) < 1e-13);
}

TEST_CASE("dense lu solve and inverse") {
    const auto a = random_matrix(12, 12, 41);
    const auto b = random_matrix(12, 2, 42);
    const auto x = lu_solve(lu_factor(a), b);
    CHECK(frobenius_norm(matmul(a, x) - b) < 1e-10 * frobenius_norm(b));
    const auto ainv = lu_inverse(a);
    CHECK(frobenius_norm(matmul(a, ainv) - DenseMatrix::identity(12)) < 1e-10);
}

TEST_CASE("right triangular solves") {
    const auto m = random_matrix(4, 4, 51);
    const auto f = lu_biorth_split(m);
    const auto b = random_matrix(7, 4, 52);
    const auto x1 = solve_right_upper(b, f.uu);
    CHECK(frobenius_norm(matmul(x1, f.uu) - b) < 1e-11 * frobenius_norm(b));
    const auto x2 = solve_right_lower_transpose(b, f.l);
    CHECK(frobenius_norm(matmul(x2, f.l.transposed()) - b) < 1e-11 * frobenius_norm(b));
}

TEST_CASE("threaded block apply matches the serial result bitwise") {
    const auto a = random_matrix(40, 40, 61);
    const auto op = LinearOperator::from_dense(a);
    const auto op2 = op.with_threads(3);
    const auto x = random_matrix(40, 5, 62);
    CHECK(frobenius_norm(op.apply(x) - op2.apply(x)) == 0.0);
    CHECK(frobenius_norm(op.apply_transpose(x) - op2.apply_transpose(x)) == 0.0);
}
