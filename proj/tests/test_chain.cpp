#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "koszul/chain.hpp"

using namespace koszul;
using T = SparseMatrix::Triplet;

static const Field Q = Field::rationals();
static Scalar q(long n) { return Scalar(Q, n); }

// simplicial circle: two vertices, two edges
static ChainComplex circle() {
    ChainComplex c;
    c.field = Q;
    c.set_dim(0, 2);
    c.set_dim(1, 2);
    c.set_diff(1, SparseMatrix::from_triplets(Q, 2, 2,
        {{0, 0, q(-1)}, {1, 0, q(1)}, {0, 1, q(1)}, {1, 1, q(-1)}}));
    return c;
}

// interval: two vertices, one edge
static ChainComplex interval() {
    ChainComplex c;
    c.field = Q;
    c.set_dim(0, 2);
    c.set_dim(1, 1);
    c.set_diff(1, SparseMatrix::from_triplets(Q, 2, 1, {{0, 0, q(-1)}, {1, 0, q(1)}}));
    return c;
}

TEST_CASE("validate accepts good complexes and rejects d*d != 0") {
    validate(circle());
    validate(interval());
    validate(ChainComplex::unit(Q));

    ChainComplex bad;
    bad.field = Q;
    bad.set_dim(0, 1);
    bad.set_dim(1, 1);
    bad.set_dim(2, 1);
    bad.set_diff(1, SparseMatrix::identity(Q, 1));
    bad.set_diff(2, SparseMatrix::identity(Q, 1));
    CHECK_THROWS(validate(bad));
}

TEST_CASE("homology of the circle and the interval") {
    auto hc = homology(circle());
    CHECK(hc.dims == std::map<int, int>{{0, 1}, {1, 1}});
    // representatives are genuine cycles that are independent mod boundaries
    for (const auto& [n, reps] : hc.reps) CHECK((circle().diff(n) * reps).is_zero());

    CHECK(homology_dims(interval()) == std::map<int, int>{{0, 1}});
    CHECK(homology_dims(ChainComplex::unit(Q)) == std::map<int, int>{{0, 1}});
}

TEST_CASE("tensor: Kunneth for the torus") {
    auto t = tensor(circle(), circle());
    validate(t);
    CHECK(t.dim(0) == 4);
    CHECK(t.dim(1) == 8);
    CHECK(t.dim(2) == 4);
    CHECK(homology_dims(t) == std::map<int, int>{{0, 1}, {1, 2}, {2, 1}});
}

TEST_CASE("tensor with the unit is the identity on dims and homology") {
    auto t = tensor(circle(), ChainComplex::unit(Q));
    validate(t);
    CHECK(t.dims == circle().dims);
    CHECK(homology_dims(t) == homology_dims(circle()));
}

TEST_CASE("hom complex: dims and homology against the Kunneth-style oracle") {
    auto h = hom_cx(circle(), circle());
    validate(h);
    // hom(C,D)_n = prod_a Hom(C_a, D_{a+n})
    CHECK(h.dim(0) == 8);
    CHECK(h.dim(1) == 4);
    CHECK(h.dim(-1) == 4);
    // over a field: H_n hom(C,D) = prod_a Hom(H_a C, H_{a+n} D)
    CHECK(homology_dims(h) == std::map<int, int>{{-1, 1}, {0, 2}, {1, 1}});
}

TEST_CASE("dual and shift") {
    auto d = dual(circle());
    validate(d);
    CHECK(d.dim(0) == 2);
    CHECK(d.dim(-1) == 2);
    CHECK(homology_dims(d) == std::map<int, int>{{-1, 1}, {0, 1}});

    auto s = shift(circle(), 3);
    validate(s);
    CHECK(homology_dims(s) == std::map<int, int>{{3, 1}, {4, 1}});
    auto s2 = shift(s, -3);
    CHECK(s2.dims == circle().dims);
    CHECK(s2.diff(1) == circle().diff(1));
}

TEST_CASE("direct sum") {
    auto s = direct_sum(circle(), interval());
    validate(s);
    CHECK(homology_dims(s) == std::map<int, int>{{0, 2}, {1, 1}});
}

TEST_CASE("tensor swap is a chain iso with Koszul signs") {
    auto C = circle();
    auto D = interval();
    auto TCD = tensor(C, D);
    auto TDC = tensor(D, C);
    auto f = tensor_swap_iso(C, D);
    validate_chain_map(f, TCD, TDC);
    auto g = tensor_swap_iso(D, C);
    auto gf = compose(g, f, TCD, TDC, TCD);
    for (const auto& [n, dim] : TCD.dims)
        CHECK(gf.at(Q, TCD, TCD, n) == SparseMatrix::identity(Q, dim));
}

TEST_CASE("quasi-isomorphisms via the mapping cone") {
    auto I = interval();
    auto u = ChainComplex::unit(Q);
    // inclusion of a point into the interval
    ChainMap inc;
    inc.mats[0] = SparseMatrix::from_triplets(Q, 2, 1, {{0, 0, q(1)}});
    validate_chain_map(inc, u, I);
    CHECK(is_quasi_iso(inc, u, I));
    CHECK(is_quasi_iso(identity_map(circle()), circle(), circle()));
    // zero map from the circle to the point is not a quasi-iso
    ChainMap z;
    CHECK_FALSE(is_quasi_iso(z, circle(), u));
}
