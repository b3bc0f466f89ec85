#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "koszul/sparse.hpp"

using namespace koszul;
using T = SparseMatrix::Triplet;

static Scalar q(long n, long d = 1) {
    Scalar s(Field::rationals(), n);
    return d == 1 ? s : s / Scalar(Field::rationals(), d);
}

TEST_CASE("scalar arithmetic over Q") {
    Field f = Field::rationals();
    CHECK(q(1, 2) + q(1, 3) == q(5, 6));
    CHECK(q(2, 3) * q(3, 2) == Scalar::one(f));
    CHECK((q(7) - q(7)).is_zero());
    CHECK(q(3).inverse() == q(1, 3));
    CHECK_THROWS(Scalar::zero(f).inverse());
}

TEST_CASE("scalar arithmetic over F_p") {
    Field f5 = Field::prime(5);
    Scalar a(f5, 3), b(f5, 4);
    CHECK(a + b == Scalar(f5, 2));
    CHECK(a * b == Scalar(f5, 2));
    CHECK(a.inverse() == Scalar(f5, 2));  // 3*2 = 6 = 1 mod 5
    CHECK((Scalar(f5, 5)).is_zero());
    CHECK_THROWS(Field::prime(6));
    CHECK_THROWS(Field::prime(1));
}

TEST_CASE("rank: basic examples") {
    Field f = Field::rationals();
    CHECK(rank(SparseMatrix::identity(f, 3)) == 3);

    auto m = SparseMatrix::from_triplets(f, 2, 2,
        {{0, 0, q(1)}, {0, 1, q(2)}, {1, 0, q(2)}, {1, 1, q(4)}});
    CHECK(rank(m) == 1);

    Field f2 = Field::prime(2);
    Scalar o2 = Scalar::one(f2);
    auto m2 = SparseMatrix::from_triplets(f2, 2, 2,
        {{0, 0, o2}, {0, 1, o2}, {1, 0, o2}, {1, 1, o2}});
    CHECK(rank(m2) == 1);
}

TEST_CASE("rref is reduced and idempotent") {
    Field f = Field::rationals();
    auto m = SparseMatrix::from_triplets(f, 3, 4,
        {{0, 0, q(2)}, {0, 1, q(4)}, {0, 3, q(2)},
         {1, 0, q(1)}, {1, 1, q(2)}, {1, 2, q(1)},
         {2, 2, q(3)}, {2, 3, q(-3)}});
    auto rr = rref(m);
    CHECK(rr.rank == 2);
    // unit pivots, zeros above and below
    for (size_t i = 0; i < rr.pivot_cols.size(); ++i) {
        int p = rr.pivot_cols[i];
        for (int r = 0; r < m.rows(); ++r)
            CHECK(rr.R.at(r, p) == (r == (int)i ? Scalar::one(f) : Scalar::zero(f)));
    }
    CHECK(rref(rr.R).R == rr.R);
}

TEST_CASE("kernel basis") {
    Field f = Field::rationals();
    // x + y + z = 0 has a 2-dimensional kernel
    auto m = SparseMatrix::from_triplets(f, 1, 3, {{0, 0, q(1)}, {0, 1, q(1)}, {0, 2, q(1)}});
    auto k = kernel_basis(m);
    CHECK(k.cols() == 2);
    CHECK((m * k).is_zero());
    CHECK(rank(k) == 2);

    CHECK(kernel_basis(SparseMatrix::identity(f, 4)).cols() == 0);
    auto z = SparseMatrix::zero(f, 2, 3);
    CHECK(kernel_basis(z).cols() == 3);
}

TEST_CASE("quotient maps") {
    Field f = Field::rationals();
    // Q^3 / span{(1,1,0)}: dim 2, proj*section = id, proj kills the subspace
    auto sub = SparseMatrix::from_triplets(f, 3, 1, {{0, 0, q(1)}, {1, 0, q(1)}});
    auto qm = quotient(f, 3, sub);
    CHECK(qm.dim == 2);
    CHECK(qm.proj * qm.section == SparseMatrix::identity(f, 2));
    CHECK((qm.proj * sub).is_zero());

    // full quotient and trivial quotient
    auto all = SparseMatrix::identity(f, 3);
    CHECK(quotient(f, 3, all).dim == 0);
    CHECK(quotient(f, 3, SparseMatrix::zero(f, 3, 0)).dim == 3);

    // redundant generators
    auto red = SparseMatrix::from_triplets(f, 3, 2,
        {{0, 0, q(1)}, {1, 0, q(1)}, {0, 1, q(2)}, {1, 1, q(2)}});
    CHECK(quotient(f, 3, red).dim == 2);
}

TEST_CASE("solve_in_span") {
    Field f = Field::rationals();
    auto B = SparseMatrix::from_triplets(f, 3, 2,
        {{0, 0, q(1)}, {1, 0, q(1)}, {1, 1, q(1)}, {2, 1, q(1)}});
    auto V = SparseMatrix::from_triplets(f, 3, 1, {{0, 0, q(2)}, {1, 0, q(5)}, {2, 0, q(3)}});
    auto X = solve_in_span(B, V);
    CHECK(B * X == V);

    auto bad = SparseMatrix::from_triplets(f, 3, 1, {{0, 0, q(1)}});
    CHECK_THROWS(solve_in_span(B, bad));
}

TEST_CASE("matrix algebra identities") {
    Field f = Field::rationals();
    auto a = SparseMatrix::from_triplets(f, 2, 3,
        {{0, 0, q(1)}, {0, 2, q(-2)}, {1, 1, q(3, 2)}});
    auto b = SparseMatrix::from_triplets(f, 3, 2,
        {{0, 1, q(4)}, {1, 0, q(-1)}, {2, 0, q(1, 3)}});
    CHECK((a * b).transpose() == b.transpose() * a.transpose());
    CHECK(a + (-a) == SparseMatrix::zero(f, 2, 3));
    CHECK(a * SparseMatrix::identity(f, 3) == a);
}

// dense Gaussian elimination over plain fractions, used as an oracle
static int dense_rank(std::vector<std::vector<Scalar>> m) {
    if (m.empty()) return 0;
    Field f = m[0][0].field();
    int rows = (int)m.size(), cols = (int)m[0].size(), r = 0;
    for (int c = 0; c < cols && r < rows; ++c) {
        int piv = -1;
        for (int i = r; i < rows; ++i)
            if (!m[i][c].is_zero()) { piv = i; break; }
        if (piv < 0) continue;
        std::swap(m[r], m[piv]);
        for (int i = 0; i < rows; ++i) {
            if (i == r || m[i][c].is_zero()) continue;
            Scalar fct = m[i][c] / m[r][c];
            for (int j = c; j < cols; ++j) m[i][j] = m[i][j] - fct * m[r][j];
        }
        ++r;
    }
    return r;
}

TEST_CASE("randomized agreement with dense oracle") {
    std::mt19937 rng(12345);
    for (Field f : {Field::rationals(), Field::prime(5)}) {
        for (int trial = 0; trial < 40; ++trial) {
            int rows = 1 + (int)(rng() % 8), cols = 1 + (int)(rng() % 8);
            std::vector<std::vector<Scalar>> dense(rows, std::vector<Scalar>(cols, Scalar::zero(f)));
            std::vector<T> ts;
            for (int i = 0; i < rows; ++i)
                for (int j = 0; j < cols; ++j) {
                    long v = (long)(rng() % 7) - 3;
                    if (v == 0) continue;
                    dense[i][j] = Scalar(f, v);
                    if (!dense[i][j].is_zero()) ts.push_back({i, j, dense[i][j]});
                }
            auto m = SparseMatrix::from_triplets(f, rows, cols, ts);
            int rk = dense_rank(dense);
            CHECK(rank(m) == rk);
            CHECK(rank(m.transpose()) == rk);
            auto k = kernel_basis(m);
            CHECK(k.cols() == cols - rk);
            CHECK((m * k).is_zero());
        }
    }
}
