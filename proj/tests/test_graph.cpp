#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "koszul/word.hpp"

using namespace koszul;
using T = SparseMatrix::Triplet;

static const Field Q = Field::rationals();
static Scalar q(long n) { return Scalar(Q, n); }

// a small non-diagonal graph on {0,1,2} with mixed degrees
static Graph sample_graph() {
    Graph g(Q, 0, 2);
    ChainComplex a;  // k in degrees 0 and 1 with d = 0
    a.field = Q;
    a.set_dim(0, 1);
    a.set_dim(1, 1);
    g.set(0, 1, a);
    ChainComplex b;  // interval-like: k^2 -> k
    b.field = Q;
    b.set_dim(0, 1);
    b.set_dim(1, 2);
    b.set_diff(1, SparseMatrix::from_triplets(Q, 1, 2, {{0, 0, q(1)}, {0, 1, q(-1)}}));
    g.set(1, 2, b);
    g.set(0, 0, ChainComplex::unit(Q));
    ChainComplex c;
    c.field = Q;
    c.set_dim(0, 2);
    g.set(2, 2, c);
    return g;
}

// the poset category of {0,1,2}: one basis arrow i -> j for i <= j
static Graph poset_graph() {
    Graph g(Q, 0, 2);
    for (int i = 0; i <= 2; ++i)
        for (int j = i; j <= 2; ++j) g.set(i, j, ChainComplex::unit(Q));
    return g;
}

TEST_CASE("unit graph and circ unit laws") {
    Graph u = unit_graph(Q, 0, 2);
    validate(u);
    Graph x = sample_graph();
    validate(x);
    Graph xu = circ(x, u), ux = circ(u, x);
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) {
            CHECK(xu.at(i, j).dims == x.at(i, j).dims);
            CHECK(ux.at(i, j).dims == x.at(i, j).dims);
        }
}

TEST_CASE("opposite is an involution") {
    Graph x = sample_graph();
    Graph xopop = opposite(opposite(x));
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) CHECK(xopop.at(i, j).dims == x.at(i, j).dims);
    CHECK(opposite(x).at(1, 0).dims == x.at(0, 1).dims);
}

TEST_CASE("circ composes dimensions correctly") {
    Graph x = sample_graph();
    Graph xx = circ(x, x);
    validate(xx);
    // (x o x)(0,2) = x(0,1) (x) x(1,2): dims (1+1 deg 0/1) * (1 + 2)
    CHECK(xx.at(0, 2).dim(0) == 1);
    CHECK(xx.at(0, 2).dim(1) == 3);  // deg0(x)deg1 twice + deg1(x)deg0
    CHECK(xx.at(0, 2).dim(2) == 2);
    // (x o x)(0,0) = x(0,0)(x)x(0,0)
    CHECK(xx.at(0, 0).dim(0) == 1);
}

TEST_CASE("associator is a chain iso") {
    Graph x = sample_graph();
    Graph y = poset_graph();
    Graph z = sample_graph();
    Graph src = circ(circ(x, y), z), dst = circ(x, circ(y, z));
    GraphMap f = associator(x, y, z);
    validate_graph_map(f, src, dst);
    CHECK(is_graph_iso(f, src, dst));
}

TEST_CASE("hom against the unit recovers the graph") {
    Graph z = sample_graph();
    Graph u = unit_graph(Q, 0, 2);
    Graph hr = hom_right(u, z), hl = hom_left(u, z);
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) {
            CHECK(hr.at(i, j).dims == z.at(i, j).dims);
            CHECK(hl.at(i, j).dims == z.at(i, j).dims);
        }
    validate(hr);
    validate(hl);
}

TEST_CASE("hom_right dimensions match the defining sum") {
    Graph x = sample_graph(), y = poset_graph();
    Graph h = hom_right(x, y);
    validate(h);
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j)
            for (int n = -3; n <= 3; ++n) {
                int expect = 0;
                for (int k = 0; k <= 2; ++k)
                    expect += HomBlocks(x.at(j, k).dims, y.at(i, k).dims, n).total;
                CHECK(h.at(i, j).dim(n) == expect);
            }
}

TEST_CASE("two-factor word complex agrees with circ") {
    Graph x = sample_graph();
    Graph y = poset_graph();
    Graph c = circ(x, y);
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) {
            WordComplex w = word_complex({&x, &y}, i, j);
            validate(w.cx);
            CHECK(w.cx.dims == c.at(i, j).dims);
            for (const auto& [n, m] : c.at(i, j).d) CHECK(w.cx.diff(n) == m);
        }
}

TEST_CASE("three-factor word complex: d*d = 0 and dims match nested circ") {
    Graph x = sample_graph();
    Graph y = poset_graph();
    Graph nested = circ(circ(x, y), x);
    for (int i = 0; i <= 2; ++i)
        for (int j = 0; j <= 2; ++j) {
            WordComplex w = word_complex({&x, &y, &x}, i, j);
            validate(w.cx);
            CHECK(w.cx.dims == nested.at(i, j).dims);
        }
}

// poset composition: arrow (x) arrow -> arrow
static ChainMap poset_mult(const Graph& g, int p, int q, int r) {
    ChainMap cm;
    cm.mats[0] = SparseMatrix::identity(Q, 1);
    return cm;
}

TEST_CASE("slot_merge: poset algebra is associative on words") {
    Graph a = poset_graph();
    std::map<std::tuple<int, int, int>, ChainMap> mult;
    for (int p = 0; p <= 2; ++p)
        for (int s = p; s <= 2; ++s)
            for (int r = s; r <= 2; ++r) mult[{p, s, r}] = poset_mult(a, p, s, r);
    MergeFn mu = [&](int p, int s, int r) -> const ChainMap* {
        auto it = mult.find({p, s, r});
        return it == mult.end() ? nullptr : &it->second;
    };
    for (int i = 0; i <= 2; ++i) {
        int j = 2;
        WordSpace w3({&a, &a, &a}, i, j, 0);
        WordSpace w2({&a, &a}, i, j, 0);
        WordSpace w1({&a}, i, j, 0);
        auto m01 = slot_merge(w3, w2, 0, mu);
        auto m12 = slot_merge(w3, w2, 1, mu);
        auto m0 = slot_merge(w2, w1, 0, mu);
        CHECK(m0 * m01 == m0 * m12);
        // total multiplicity: every path i<=k1<=k2<=j contributes 1
        CHECK(w1.dim() == 1);
        auto full = m0 * m01;
        int paths = 0;
        for (int k1 = i; k1 <= j; ++k1)
            for (int k2 = k1; k2 <= j; ++k2) ++paths;
        CHECK(full.entries().size() == (size_t)w3.dim());
        CHECK(w3.dim() == paths);
    }
}

TEST_CASE("slot_apply with the identity is the identity") {
    Graph x = sample_graph();
    std::map<std::pair<int, int>, ChainMap> ids;
    for (const auto& [ij, c] : x.components()) ids[ij] = identity_map(c);
    ApplyFn f = [&](int p, int s) -> const ChainMap* {
        auto it = ids.find({p, s});
        return it == ids.end() ? nullptr : &it->second;
    };
    WordSpace w({&x, &x}, 0, 2, 1);
    CHECK(slot_apply(w, w, 0, f) == SparseMatrix::identity(Q, w.dim()));
    CHECK(slot_apply(w, w, 1, f) == SparseMatrix::identity(Q, w.dim()));
}
